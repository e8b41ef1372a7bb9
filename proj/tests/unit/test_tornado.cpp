#include <chainprofiler/errors.hpp>
#include <chainprofiler/tornado.hpp>
#include <doctest.h>

#include <sstream>

#include "generators.hpp"
#include "oracles.hpp"

using namespace chainprofiler;
using namespace chainprofiler::tornado;

namespace {

const auto kPool = gen::addresses(6, 55);
const Address& kA = kPool[0];
const Address& kB = kPool[1];
const Address& kC = kPool[2];

TornadoEvent event(Mixer m, EventKind k, const Address& a, std::int64_t t, Wei gas = Wei(20) * kGwei) {
  static std::uint64_t id = 500;
  TornadoEvent e;
  e.mixer = m;
  e.kind = k;
  e.address = a;
  e.timestamp = synthetic::kGenesis + t;
  e.gas_price = gas;
  e.tx_hash = synthetic::make_hash(id++);
  return e;
}

TornadoEvent dep(const Address& a, std::int64_t t, Wei gas = Wei(20) * kGwei, Mixer m = Mixer::eth0_1) {
  return event(m, EventKind::deposit, a, t, gas);
}

TornadoEvent wd(const Address& a, std::int64_t t, Wei gas = Wei(20) * kGwei, Mixer m = Mixer::eth0_1) {
  return event(m, EventKind::withdraw, a, t, gas);
}

Transaction transfer(const Address& from, const Address& to) {
  static std::uint64_t id = 900;
  Transaction tx;
  tx.tx_hash = synthetic::make_hash(id++);
  tx.from_address = from;
  tx.to_address = to;
  tx.value = Wei(5) * Wei("10000000000000000");
  return tx;
}

Link link(const TornadoEvent& d, const TornadoEvent& w, int h) { return {d, w, h}; }

}  // namespace

TEST_SUITE("tornado") {
  TEST_CASE("heuristic 1 links reuse within one pool only") {
    const std::vector<TornadoEvent> same = {dep(kA, 0), wd(kA, 100)};
    CHECK(heuristic1(same).size() == 1);
    const std::vector<TornadoEvent> cross = {dep(kA, 0), wd(kA, 100, Wei(20) * kGwei, Mixer::eth1)};
    CHECK(heuristic1(cross).empty());
    const std::vector<TornadoEvent> twice = {dep(kA, 0), dep(kA, 10), wd(kA, 100)};
    CHECK(heuristic1(twice).size() == 2);
  }

  TEST_CASE("heuristic 2 needs a unique manual price and ordering") {
    const Wei manual("5130909091");
    const std::vector<TornadoEvent> linked = {dep(kA, 0, manual), wd(kB, 140, manual), dep(kC, 50)};
    const auto h = heuristic2(linked);
    REQUIRE(h.size() == 1);
    CHECK(h[0].deposit.address == kA);
    CHECK(h[0].withdraw.address == kB);
    CHECK(h[0].heuristic == 2);

    const std::vector<TornadoEvent> whole = {dep(kA, 0), wd(kB, 140)};
    CHECK(heuristic2(whole).empty());
    const std::vector<TornadoEvent> shared = {dep(kA, 0, manual), dep(kC, 5, manual), wd(kB, 140, manual)};
    CHECK(heuristic2(shared).empty());
    const std::vector<TornadoEvent> backwards = {dep(kA, 200, manual), wd(kB, 140, manual)};
    CHECK(heuristic2(backwards).empty());
    CHECK(is_manual_gas_price(manual));
    CHECK_FALSE(is_manual_gas_price(Wei(20) * kGwei));
  }

  TEST_CASE("global gas scope counts a price across pools") {
    const Wei manual("7000000001");
    const std::vector<TornadoEvent> events = {dep(kA, 0, manual), wd(kB, 10, manual),
                                              dep(kC, 5, manual, Mixer::eth10)};
    CHECK(heuristic2(events, GasScope::per_pool).size() == 1);
    CHECK(heuristic2(events, GasScope::global).empty());
  }

  TEST_CASE("heuristic 3 needs a direct transfer") {
    const std::vector<TornadoEvent> events = {dep(kA, 0), wd(kB, 100)};
    const std::vector<Transaction> direct = {transfer(kA, kB)};
    CHECK(heuristic3(events, direct).size() == 1);
    const std::vector<Transaction> reverse = {transfer(kB, kA)};
    CHECK(heuristic3(events, reverse).size() == 1);
    const std::vector<Transaction> common = {transfer(kA, kC), transfer(kC, kB)};
    CHECK(heuristic3(events, common).empty());
  }

  TEST_CASE("heuristics agree with an exhaustive predicate scan") {
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
      const auto log = gen::mixer_log(rng, 200);
      const auto links = all_heuristics(log.events, log.corpus);
      CHECK(oracle::link_keys(links) == oracle::heuristic_scan(log.events, log.corpus));
    }
  }

  TEST_CASE("heuristic 2 ignores event order") {
    Rng rng(62);
    for (int trial = 0; trial < 50; ++trial) {
      auto log = gen::mixer_log(rng, 60);
      const auto before = oracle::link_keys(heuristic2(log.events));
      gen::shuffle(rng, log.events);
      CHECK(oracle::link_keys(heuristic2(log.events)) == before);
    }
  }

  TEST_CASE("ground truth windows") {
    const auto d1 = dep(kA, 0), w1 = wd(kB, 2 * 3600);
    const auto d2 = dep(kC, 0), w2 = wd(kPool[3], 3 * 86'400);
    const std::vector<Link> links = {link(d1, w1, 3), link(d2, w2, 2), link(d1, wd(kA, 50), 1)};
    CHECK(build_ground_truth(links, Window::day).size() == 1);
    CHECK(build_ground_truth(links, Window::week).size() == 2);
    CHECK(build_ground_truth(links, Window::past).size() == 2);

    const std::vector<Link> twice = {link(d1, w1, 2), link(d1, w1, 3)};
    CHECK(build_ground_truth(twice, Window::past).size() == 1);
    const std::vector<Link> negative = {link(dep(kA, 100), wd(kB, 0), 3)};
    CHECK(build_ground_truth(negative, Window::past).empty());
  }

  TEST_CASE("windows are nested") {
    Rng rng(63);
    for (int trial = 0; trial < 50; ++trial) {
      const auto log = gen::mixer_log(rng, 120);
      const auto links = all_heuristics(log.events, log.corpus);
      auto as_set = [&](Window w) {
        std::set<std::pair<Address, Address>> s;
        for (const auto& p : build_ground_truth(links, w)) s.emplace(p.id_a, p.id_b);
        return s;
      };
      const auto day = as_set(Window::day), week = as_set(Window::week), past = as_set(Window::past);
      CHECK(std::includes(week.begin(), week.end(), day.begin(), day.end()));
      CHECK(std::includes(past.begin(), past.end(), week.begin(), week.end()));

      std::size_t sum = 0;
      for (const auto& [_, c] : linked_withdraw_counts(log.events, links)) {
        CHECK(c.total <= c.by_heuristic[0] + c.by_heuristic[1] + c.by_heuristic[2]);
        CHECK(c.total <= c.withdraws);
        sum += c.withdraws;
      }
      CHECK(sum <= log.events.size());
    }
  }

  TEST_CASE("anonymity series counts deposits and subtracts linked ones") {
    const auto d1 = dep(kA, 0), d2 = dep(kB, 10), d3 = dep(kC, 20);
    const std::vector<TornadoEvent> events = {d3, d1, d2};
    const auto plain = anonymity_series(events, {});
    REQUIRE(plain.size() == 3);
    CHECK(plain.back().cumulative_deposits == 3);
    CHECK(plain.back().reduced == 3);

    const auto w = wd(kPool[3], 15);
    const std::vector<TornadoEvent> with_wd = {d1, d2, d3, w};
    const std::vector<Link> links = {link(d1, w, 3)};
    const auto series = anonymity_series(with_wd, links);
    CHECK(series.back().cumulative_deposits == 3);
    CHECK(series.back().reduced == 2);
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (series[i].mixer == series[i - 1].mixer) {
        CHECK(series[i].cumulative_deposits >= series[i - 1].cumulative_deposits);
        CHECK(series[i].timestamp >= series[i - 1].timestamp);
      }
    }
  }

  TEST_CASE("reuse histogram and mixing delays") {
    const std::vector<TornadoEvent> events = {wd(kA, 0), wd(kB, 1), wd(kC, 2), wd(kC, 3), dep(kA, 4)};
    CHECK(reuse_histogram(events) == std::map<std::size_t, std::size_t>{{1, 2}, {2, 1}});
    CHECK(reuse_histogram(std::vector<TornadoEvent>{}).empty());

    const auto d = dep(kA, 0);
    const std::vector<Link> links = {link(d, wd(kB, 4 * 3600), 3), link(d, wd(kC, 30 * 3600), 3)};
    CHECK(mixing_delay_distribution(links) == std::map<std::int64_t, std::size_t>{{0, 1}, {1, 1}});
  }

  TEST_CASE("candidate deposits respect pool, order and window") {
    const std::vector<TornadoEvent> events = {dep(kA, 0), dep(kB, 3 * 86'400), dep(kC, 4 * 86'400, Wei(1), Mixer::eth1),
                                              dep(kPool[3], 9 * 86'400)};
    const auto w = wd(kPool[4], 3 * 86'400 + 100);
    CHECK(candidate_deposits(events, w, Window::day) == std::vector<Address>{kB});
    CHECK(candidate_deposits(events, w, Window::week).size() == 2);
    CHECK(candidate_deposits(events, w, Window::past).size() == 2);
  }

  TEST_CASE("heuristic 3 edges") {
    const std::vector<Link> links = {link(dep(kA, 0), wd(kB, 5), 3), link(dep(kC, 0), wd(kC, 5), 1)};
    CHECK(heuristic3_edges(links) == std::set<txgraph::AddressPair>{txgraph::make_pair(kA, kB)});
  }

  TEST_CASE("events round-trip through csv") {
    Rng rng(64);
    const auto log = gen::mixer_log(rng, 40);
    std::ostringstream out;
    write_events_csv(out, log.events);
    std::istringstream in(out.str());
    auto back = parse_events_csv(in);
    auto expect = log.events;
    const auto by_hash = [](const TornadoEvent& a, const TornadoEvent& b) { return a.tx_hash < b.tx_hash; };
    std::sort(back.begin(), back.end(), by_hash);
    std::sort(expect.begin(), expect.end(), by_hash);
    CHECK(back == expect);

    std::istringstream bad("mixer,kind,address,timestamp,gas_price_wei,tx_hash\n0.5,deposit,0x00,1,1,0x01\n");
    CHECK_THROWS_AS(parse_events_csv(bad), MalformedRow);
  }

  TEST_CASE("mixer and window names") {
    for (auto m : kMixers) CHECK(parse_mixer(to_string(m)) == m);
    CHECK_FALSE(parse_mixer("5"));
    for (auto w : {Window::day, Window::week, Window::past}) CHECK(parse_window(to_string(w)) == w);
    CHECK(window_seconds(Window::day) == 86'400);
    CHECK(window_seconds(Window::week) == 604'800);
    CHECK_FALSE(window_seconds(Window::past));
  }
}
