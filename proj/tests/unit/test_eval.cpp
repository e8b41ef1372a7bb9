#include <chainprofiler/errors.hpp>
#include <chainprofiler/eval.hpp>
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "generators.hpp"

using namespace chainprofiler;
using namespace chainprofiler::eval;

namespace {

RankedResult result(std::size_t n, std::size_t rank) {
  RankedResult r;
  r.n = n;
  r.rank = rank;
  return r;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

FeatureMap random_features(Rng& rng, std::span<const Address> who, std::size_t dim) {
  FeatureMap out;
  for (const auto& a : who) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.uniform() * 2 - 1;
    out[a] = v;
  }
  return out;
}

// Bin masses of the averaged rank density computed with floating overlaps.
double entropy_oracle(std::span<const RankedResult> results, std::size_t m) {
  std::vector<double> q(m, 0.0);
  for (const auto& r : results) {
    const double lo = static_cast<double>(r.rank - 1) / static_cast<double>(r.n);
    const double hi = static_cast<double>(r.rank) / static_cast<double>(r.n);
    for (std::size_t i = 0; i < m; ++i) {
      const double a = static_cast<double>(i) / static_cast<double>(m);
      const double b = static_cast<double>(i + 1) / static_cast<double>(m);
      const double overlap = std::min(hi, b) - std::max(lo, a);
      if (overlap > 0) q[i] += overlap * static_cast<double>(r.n);
    }
  }
  double gain = std::log2(static_cast<double>(m));
  for (double x : q) {
    x /= static_cast<double>(results.size());
    if (x > 0) gain += x * std::log2(x);
  }
  return gain;
}

// Ranks drawn with probability proportional to (n + 1 - r)^2.
std::vector<RankedResult> monotone_sample(Rng& rng, std::size_t count, std::size_t n) {
  std::vector<double> w;
  for (std::size_t r = 1; r <= n; ++r) w.push_back(static_cast<double>((n + 1 - r) * (n + 1 - r)));
  AliasTable table(w);
  std::vector<RankedResult> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(result(n, table.sample(rng) + 1));
  return out;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("an identical vector ranks first") {
    const auto who = gen::addresses(5, 9);
    Rng rng(1);
    auto f = random_features(rng, who, 4);
    f[who[3]] = f[who[0]];
    const std::vector<Address> cands(who.begin() + 1, who.end());
    const auto r = rank_candidates(f, who[0], cands, who[3]);
    CHECK(r.rank == 1);
    CHECK(r.n == 4);
    CHECK(r.candidates.front().distance == 0.0);
  }

  TEST_CASE("equal distances fall back to address order") {
    const auto who = gen::addresses(3, 10);
    FeatureMap f = {{who[0], {0, 0}}, {who[1], {1, 0}}, {who[2], {0, 1}}};
    const std::vector<Address> cands = {who[1], who[2]};
    const auto lower = std::min(who[1], who[2]);
    const auto higher = std::max(who[1], who[2]);
    CHECK(rank_candidates(f, who[0], cands, lower).rank == 1);
    CHECK(rank_candidates(f, who[0], cands, higher).rank == 2);
  }

  TEST_CASE("ordering equals a pairwise distance sort") {
    Rng rng(2);
    for (int trial = 0; trial < 30; ++trial) {
      const auto who = gen::addresses(21, static_cast<std::uint64_t>(trial));
      const auto f = random_features(rng, who, 1 + rng.index(6));
      const std::vector<Address> cands(who.begin() + 1, who.end());
      const auto got = order_candidates(f, who[0], cands);
      // count, for each candidate, how many others strictly precede it
      for (std::size_t i = 0; i < cands.size(); ++i) {
        std::size_t ahead = 0;
        const double di = distance(f.at(cands[i]), f.at(who[0]));
        for (std::size_t j = 0; j < cands.size(); ++j) {
          const double dj = distance(f.at(cands[j]), f.at(who[0]));
          if (dj < di || (dj == di && cands[j] < cands[i])) ++ahead;
        }
        REQUIRE(ahead < got.size());
        CHECK(got[ahead].address == cands[i]);
      }
    }
  }

  TEST_CASE("rigid motions leave the ranking unchanged") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const auto who = gen::addresses(15, 100 + static_cast<std::uint64_t>(trial));
      const auto f = random_features(rng, who, 2);
      const double theta = rng.uniform() * 6.283185307179586;
      const double dx = rng.uniform() * 10, dy = rng.uniform() * 10;
      FeatureMap moved;
      for (const auto& [a, v] : f) {
        moved[a] = {std::cos(theta) * v[0] - std::sin(theta) * v[1] + dx, std::sin(theta) * v[0] + std::cos(theta) * v[1] + dy};
      }
      const std::vector<Address> cands(who.begin() + 1, who.end());
      for (const auto& truth : cands) {
        CHECK(rank_candidates(f, who[0], cands, truth).rank == rank_candidates(moved, who[0], cands, truth).rank);
      }
    }
  }

  TEST_CASE("bad ranking inputs") {
    const auto who = gen::addresses(3, 11);
    FeatureMap f = {{who[0], {0, 0}}, {who[1], {1, 0}}};
    const std::vector<Address> with_missing = {who[1], who[2]};
    CHECK_THROWS_AS(rank_candidates(f, who[0], with_missing, who[1]), MissingFeatures);
    f[who[2]] = {1, 2, 3};
    CHECK_THROWS_AS(rank_candidates(f, who[0], with_missing, who[1]), DimensionMismatch);
    const std::vector<Address> self = {who[0], who[1]};
    f[who[2]] = {1, 1};
    CHECK_THROWS_AS(rank_candidates(f, who[0], self, who[1]), InvalidArgument);
    const std::vector<Address> one = {who[1]};
    CHECK_THROWS_AS(rank_candidates(f, who[0], one, who[2]), InvalidArgument);
  }

  TEST_CASE("pairs are ranked both ways among all featured addresses") {
    const auto who = gen::addresses(4, 12);
    const FeatureMap f = {{who[0], {0}}, {who[1], {0.1}}, {who[2], {5}}, {who[3], {9}}};
    const std::vector<ingest::GroundTruthPair> pairs = {
        ingest::GroundTruthPair::make(who[0], who[1], ingest::PairOrigin::ens, ""),
        ingest::GroundTruthPair::make(who[0], gen::addresses(1, 13)[0], ingest::PairOrigin::ens, "")};
    const auto results = rank_pairs(f, pairs);
    REQUIRE(results.size() == 2);
    for (const auto& r : results) {
      CHECK(r.n == 3);
      CHECK(r.rank == 1);
    }
  }

  TEST_CASE("average rank") {
    const std::vector<RankedResult> a = {result(5, 1), result(5, 2), result(5, 3)};
    CHECK(average_rank(a) == 2.0);
    const std::vector<RankedResult> b = {result(5, 1), result(9, 1)};
    CHECK(average_rank(b) == 1.0);
    CHECK_THROWS_AS(average_rank(std::vector<RankedResult>{}), EmptyResults);
  }

  TEST_CASE("a random ranker averages (n + 1) / 2") {
    Rng rng(4);
    for (std::size_t n : {2u, 10u, 57u, 400u}) {
      std::vector<RankedResult> rs;
      for (int i = 0; i < 10'000; ++i) rs.push_back(result(n, rng.index(n) + 1));
      const double expect = (static_cast<double>(n) + 1) / 2;
      CHECK(std::abs(average_rank(rs) - expect) <= 0.03 * expect);
    }
  }

  TEST_CASE("auc formulas on fixed cases") {
    const std::vector<RankedResult> one = {result(4, 2)};
    CHECK(auc(one).lemma == 0.5);
    const std::vector<RankedResult> perfect = {result(10, 1)};
    CHECK(auc(perfect).lemma == doctest::Approx(0.1));
    CHECK(*auc(perfect).standard == 1.0);
    const std::vector<RankedResult> single = {result(1, 1)};
    CHECK_FALSE(auc(single).standard);
    CHECK(auc(single).lemma == 1.0);
    const std::vector<RankedResult> bad = {result(3, 4)};
    CHECK_THROWS_AS(auc(bad), InvalidArgument);
  }

  TEST_CASE("standard auc equals the pairwise comparison count") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<RankedResult> rs;
      double pairwise = 0, lemma = 0;
      const auto count = 1 + rng.index(8);
      for (std::size_t t = 0; t < count; ++t) {
        const auto n = 2 + rng.index(49);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        gen::shuffle(rng, order);
        const auto truth_pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), 0) - order.begin());
        std::size_t wins = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (order[j] != 0 && j > truth_pos) ++wins;
        }
        pairwise += static_cast<double>(wins) / static_cast<double>(n - 1);
        lemma += static_cast<double>(truth_pos + 1) / static_cast<double>(n);
        rs.push_back(result(n, truth_pos + 1));
      }
      const auto a = auc(rs);
      CHECK(std::abs(*a.standard - pairwise / static_cast<double>(count)) <= 1e-12);
      CHECK(std::abs(a.lemma - lemma / static_cast<double>(count)) <= 1e-12);
    }
  }

  TEST_CASE("a perfect ranker over eight candidates gains three bits") {
    const std::vector<RankedResult> rs(50, result(8, 1));
    const auto e = entropy_gain(rs, 8);
    CHECK(std::abs(e.gain_bits - 3.0) < 1e-9);
    CHECK(e.density[0] == 1.0);
    CHECK(default_resolution(rs) == 8);
  }

  TEST_CASE("a uniform ranker gains nearly nothing") {
    Rng rng(6);
    std::vector<RankedResult> rs;
    for (int i = 0; i < 10'000; ++i) rs.push_back(result(100, rng.index(100) + 1));
    CHECK(entropy_gain(rs, 100).gain_bits <= 0.1);
    CHECK(entropy_gain(rs, 100).gain_bits >= 0.0);
  }

  TEST_CASE("entropy gain matches a floating overlap oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<RankedResult> rs;
      const auto count = 1 + rng.index(30);
      for (std::size_t i = 0; i < count; ++i) {
        const auto n = 1 + rng.index(40);
        rs.push_back(result(n, rng.index(n) + 1));
      }
      const auto m = 1 + rng.index(60);
      const auto e = entropy_gain(rs, m);
      CHECK(e.gain_bits == doctest::Approx(entropy_oracle(rs, m)).epsilon(1e-9));
      CHECK(std::accumulate(e.density.begin(), e.density.end(), 0.0) == doctest::Approx(1.0));
      CHECK(e.gain_bits >= -1e-12);
      CHECK(e.gain_bits <= std::log2(static_cast<double>(m)) + 1e-12);
    }
  }

  TEST_CASE("doubling the resolution barely moves a smooth distribution") {
    Rng rng(8);
    for (std::size_t n : {200u, 500u, 1000u}) {
      const auto rs = monotone_sample(rng, 20'000, n);
      for (std::size_t m : {50u, 100u, 250u}) {
        CHECK(std::abs(entropy_gain(rs, m).gain_bits - entropy_gain(rs, 2 * m).gain_bits) < 0.05);
      }
    }
  }

  TEST_CASE("entropy gain ignores result order") {
    Rng rng(9);
    auto rs = monotone_sample(rng, 500, 37);
    const auto before = entropy_gain(rs, 37).gain_bits;
    gen::shuffle(rng, rs);
    CHECK(entropy_gain(rs, 37).gain_bits == doctest::Approx(before).epsilon(1e-12));
    CHECK_THROWS_AS(entropy_gain(rs, 0), InvalidArgument);
    CHECK_THROWS_AS(entropy_gain(std::vector<RankedResult>{}, 4), EmptyResults);
  }

  TEST_CASE("default resolution is capped") {
    const std::vector<RankedResult> rs = {result(5000, 3), result(10, 1)};
    CHECK(default_resolution(rs) == 1000);
  }

  TEST_CASE("rank correction") {
    CHECK(rank_correction(400, 80, 0.2) == 32.0);
    CHECK(rank_correction(400, 80, 0.0) == 0.0);
    CHECK(rank_correction(400, 80, 1.0) == 160.0);
    CHECK(std::abs(rank_correction(400, 40, 0.35) - 63.0) < 1e-12);
    CHECK_THROWS_AS(rank_correction(10, 20, 0.5), InvalidArgument);
    CHECK_THROWS_AS(rank_correction(10, 5, 1.5), InvalidArgument);
  }

  TEST_CASE("fusing two rankings by harmonic mean") {
    const auto who = gen::addresses(4, 14);
    const FeatureMap fa = {{who[0], {0}}, {who[1], {1}}, {who[2], {2}}, {who[3], {3}}};
    const FeatureMap fb = {{who[0], {0}}, {who[1], {3}}, {who[2], {1}}, {who[3], {2}}};
    const std::vector<Address> cands = {who[1], who[2], who[3]};
    const std::vector<RankedResult> a = {rank_candidates(fa, who[0], cands, who[2])};
    const std::vector<RankedResult> b = {rank_candidates(fb, who[0], cands, who[2])};
    const auto fused = fuse_results(a, b);
    REQUIRE(fused.size() == 1);
    // who[2]: ranks 2 and 1, harmonic mean 4/3, best of the three
    CHECK(fused[0].rank == 1);
    CHECK(fused[0].n == 3);
    const std::vector<RankedResult> other = {rank_candidates(fb, who[0], cands, who[1])};
    CHECK_THROWS_AS(fuse_results(a, other), MismatchedCandidates);
  }

  TEST_CASE("summary and report output") {
    const std::vector<RankedResult> rs = {result(4, 1), result(4, 3)};
    const auto m = summarize("x", rs);
    CHECK(m.average_rank == 2.0);
    CHECK(m.auc_lemma == 0.5);
    CHECK(*m.auc_standard == doctest::Approx(2.0 / 3.0));
    CHECK(m.resolution == 4);
    CHECK(m.count == 2);
    EvaluationReport report{{m, summarize("empty", std::vector<RankedResult>{})}};
    std::ostringstream csv;
    report.write_csv(csv);
    CHECK(csv.str().rfind("method,avg_rank,auc_lemma,auc_standard,entropy_gain_bits,count\n", 0) == 0);
  }
}
