#include "chainprofiler/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "chainprofiler/csv.hpp"
#include "chainprofiler/errors.hpp"

namespace chainprofiler::eval {
namespace {

void require_nonempty(std::span<const RankedResult> results) {
  if (results.empty()) throw EmptyResults("no ranked results");
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

FeatureMap make_feature_map(std::span<const profiles::FeatureVector> features) {
  FeatureMap out;
  if (features.empty()) return out;
  const auto kind = features.front().kind;
  const auto len = features.front().values.size();
  for (const auto& fv : features) {
    if (fv.kind != kind) throw DimensionMismatch("mixed feature kinds for " + fv.address.str());
    if (fv.values.size() != len) throw DimensionMismatch("feature length differs for " + fv.address.str());
    out[fv.address] = fv.values;
  }
  return out;
}

FeatureMap make_feature_map(const embeddings::EmbeddingTable& table) {
  FeatureMap out;
  for (const auto& [a, v] : table.vectors) {
    if (v.size() != static_cast<std::size_t>(table.dim)) throw DimensionMismatch("embedding length differs for " + a.str());
    out[a] = v;
  }
  return out;
}

std::vector<RankedCandidate> order_candidates(const FeatureMap& features, const Address& target,
                                              std::span<const Address> candidates) {
  auto t = features.find(target);
  if (t == features.end()) throw MissingFeatures(target.str());
  const auto& tv = t->second;
  std::vector<RankedCandidate> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c == target) throw InvalidArgument("target " + target.str() + " is among its own candidates");
    auto it = features.find(c);
    if (it == features.end()) throw MissingFeatures(c.str());
    const auto& cv = it->second;
    if (cv.size() != tv.size()) throw DimensionMismatch("feature length differs for " + c.str());
    double ss = 0;
    for (std::size_t k = 0; k < tv.size(); ++k) ss += (tv[k] - cv[k]) * (tv[k] - cv[k]);
    out.push_back({c, std::sqrt(ss)});
  }
  std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.address < b.address;
  });
  return out;
}

RankedResult rank_candidates(const FeatureMap& features, const Address& target, std::span<const Address> candidates,
                             const Address& truth) {
  RankedResult r;
  r.target = target;
  r.truth = truth;
  r.candidates = order_candidates(features, target, candidates);
  r.n = r.candidates.size();
  for (std::size_t i = 0; i < r.n; ++i) {
    if (r.candidates[i].address == truth) {
      r.rank = i + 1;
      break;
    }
  }
  if (r.rank == 0) throw InvalidArgument("truth " + truth.str() + " is not a candidate of " + target.str());
  return r;
}

std::vector<RankedResult> rank_pairs(const FeatureMap& features, std::span<const ingest::GroundTruthPair> pairs) {
  std::vector<Address> universe;
  universe.reserve(features.size());
  for (const auto& [a, _] : features) universe.push_back(a);
  std::vector<RankedResult> out;
  std::vector<Address> candidates;
  for (const auto& p : pairs) {
    if (!features.count(p.id_a) || !features.count(p.id_b)) continue;
    for (const auto& [target, truth] : {std::pair{p.id_a, p.id_b}, std::pair{p.id_b, p.id_a}}) {
      candidates.clear();
      for (const auto& a : universe) {
        if (a != target) candidates.push_back(a);
      }
      out.push_back(rank_candidates(features, target, candidates, truth));
    }
  }
  return out;
}

embeddings::RankMap to_rank_map(std::span<const RankedResult> results) {
  embeddings::RankMap out;
  for (const auto& r : results) {
    auto& m = out[r.target];
    for (std::size_t i = 0; i < r.candidates.size(); ++i) m[r.candidates[i].address] = i + 1;
  }
  return out;
}

std::vector<RankedResult> fuse_results(std::span<const RankedResult> a, std::span<const RankedResult> b) {
  if (a.size() != b.size()) throw MismatchedCandidates("result lists differ in length");
  std::vector<RankedResult> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].target != b[i].target || a[i].truth != b[i].truth) {
      throw MismatchedCandidates("result " + std::to_string(i) + " refers to different pairs");
    }
    const auto fused = embeddings::fuse_rankings(to_rank_map(a.subspan(i, 1)), to_rank_map(b.subspan(i, 1)));
    const auto& list = fused.begin()->second;
    RankedResult r;
    r.target = a[i].target;
    r.truth = a[i].truth;
    r.n = list.size();
    for (std::size_t k = 0; k < list.size(); ++k) {
      r.candidates.push_back({list[k].candidate, list[k].score});
      if (list[k].candidate == r.truth) r.rank = k + 1;
    }
    out.push_back(std::move(r));
  }
  return out;
}

double average_rank(std::span<const RankedResult> results) {
  require_nonempty(results);
  double sum = 0;
  for (const auto& r : results) sum += static_cast<double>(r.rank);
  return sum / static_cast<double>(results.size());
}

AucReport auc(std::span<const RankedResult> results) {
  require_nonempty(results);
  AucReport out;
  double lemma = 0, standard = 0;
  std::size_t standard_count = 0;
  for (const auto& r : results) {
    if (r.n < 1 || r.rank < 1 || r.rank > r.n) throw InvalidArgument("rank outside [1, n]");
    lemma += static_cast<double>(r.rank) / static_cast<double>(r.n);
    if (r.n > 1) {
      standard += static_cast<double>(r.n - r.rank) / static_cast<double>(r.n - 1);
      ++standard_count;
    }
  }
  out.lemma = lemma / static_cast<double>(results.size());
  if (standard_count > 0) out.standard = standard / static_cast<double>(standard_count);
  return out;
}

std::size_t default_resolution(std::span<const RankedResult> results) {
  std::size_t m = 1;
  for (const auto& r : results) m = std::max(m, r.n);
  return std::min<std::size_t>(m, 1000);
}

EntropyEstimate entropy_gain(std::span<const RankedResult> results, std::size_t resolution) {
  require_nonempty(results);
  if (resolution < 1) throw InvalidArgument("resolution must be at least 1");
  const auto M = resolution;
  std::vector<double> mass(M, 0.0);
  for (const auto& r : results) {
    if (r.n < 1 || r.rank < 1 || r.rank > r.n) throw InvalidArgument("rank outside [1, n]");
    // Work in units of 1/(n*M): the result covers [(r-1)M, rM], bin i covers [(i-1)n, in].
    const auto n = r.n;
    const auto lo = (r.rank - 1) * M;
    const auto hi = r.rank * M;
    for (auto i = lo / n; i < M && i * n < hi; ++i) {
      const auto bin_lo = i * n;
      const auto bin_hi = (i + 1) * n;
      const auto top = std::min(hi, bin_hi);
      const auto bottom = std::max(lo, bin_lo);
      if (top > bottom) mass[i] += static_cast<double>(top - bottom) / static_cast<double>(M);
    }
  }
  EntropyEstimate est;
  est.resolution = M;
  est.density.resize(M);
  double plogp = 0;
  for (std::size_t i = 0; i < M; ++i) {
    const double q = mass[i] / static_cast<double>(results.size());
    est.density[i] = q;
    if (q > 0) plogp += q * std::log2(q);
  }
  est.gain_bits = std::log2(static_cast<double>(M)) + plogp;
  return est;
}

double rank_correction(std::size_t total_set, std::size_t candidate_set, double miss_fraction) {
  if (candidate_set > total_set) throw InvalidArgument("candidate set larger than total set");
  if (!(miss_fraction >= 0 && miss_fraction <= 1)) throw InvalidArgument("miss fraction must be in [0, 1]");
  return miss_fraction * static_cast<double>(total_set - candidate_set) / 2.0;
}

MethodMetrics summarize(const std::string& method, std::span<const RankedResult> results,
                        std::optional<std::size_t> resolution) {
  MethodMetrics m;
  m.method = method;
  m.count = results.size();
  if (results.empty()) return m;
  m.average_rank = average_rank(results);
  const auto a = auc(results);
  m.auc_lemma = a.lemma;
  m.auc_standard = a.standard;
  m.resolution = resolution.value_or(default_resolution(results));
  m.entropy_gain_bits = entropy_gain(results, m.resolution).gain_bits;
  return m;
}

nlohmann::json EvaluationReport::to_json() const {
  nlohmann::json methods_json = nlohmann::json::array();
  for (const auto& m : methods) {
    nlohmann::json j = {{"method", m.method},
                        {"count", m.count},
                        {"avg_rank", m.count ? nlohmann::json(m.average_rank) : nlohmann::json(nullptr)},
                        {"auc_lemma", m.count ? nlohmann::json(m.auc_lemma) : nlohmann::json(nullptr)},
                        {"auc_standard", m.auc_standard ? nlohmann::json(*m.auc_standard) : nlohmann::json(nullptr)},
                        {"entropy_gain_bits", m.count ? nlohmann::json(m.entropy_gain_bits) : nlohmann::json(nullptr)},
                        {"resolution", m.resolution}};
    if (m.rank_correction) j["rank_correction"] = *m.rank_correction;
    methods_json.push_back(std::move(j));
  }
  return {{"methods", methods_json}};
}

void EvaluationReport::write_csv(std::ostream& out) const {
  csv::write_row(out, {"method", "avg_rank", "auc_lemma", "auc_standard", "entropy_gain_bits", "count"});
  for (const auto& m : methods) {
    csv::write_row(out, {m.method, m.count ? format_metric(m.average_rank) : "",
                         m.count ? format_metric(m.auc_lemma) : "",
                         m.auc_standard ? format_metric(*m.auc_standard) : "",
                         m.count ? format_metric(m.entropy_gain_bits) : "", std::to_string(m.count)});
  }
}

}  // namespace chainprofiler::eval
