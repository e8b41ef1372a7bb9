#include "chainprofiler/tornado.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <tuple>

#include "chainprofiler/csv.hpp"
#include "chainprofiler/errors.hpp"

namespace chainprofiler::tornado {
namespace {

const std::vector<std::string> kEventColumns = {"mixer", "kind", "address", "timestamp", "gas_price_wei", "tx_hash"};

bool event_less(const TornadoEvent& a, const TornadoEvent& b) {
  return std::tie(a.timestamp, a.mixer, a.kind, a.tx_hash, a.address) <
         std::tie(b.timestamp, b.mixer, b.kind, b.tx_hash, b.address);
}

template <typename Pred>
std::vector<const TornadoEvent*> select(std::span<const TornadoEvent> events, Pred pred) {
  std::vector<const TornadoEvent*> out;
  for (const auto& e : events) {
    if (pred(e)) out.push_back(&e);
  }
  return out;
}

std::string kind_string(EventKind k) { return k == EventKind::deposit ? "deposit" : "withdraw"; }

}  // namespace

std::string to_string(Mixer m) {
  switch (m) {
    case Mixer::eth0_1: return "0.1";
    case Mixer::eth1: return "1";
    case Mixer::eth10: return "10";
    case Mixer::eth100: return "100";
  }
  return "?";
}

std::optional<Mixer> parse_mixer(std::string_view text) {
  for (auto m : kMixers) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

std::vector<TornadoEvent> parse_events_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  csv::expect_header(reader, kEventColumns, source);
  std::vector<TornadoEvent> out;
  std::set<std::tuple<EventKind, Address, std::string>> seen;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const auto line = reader.line();
    if (f.size() != kEventColumns.size()) throw MalformedRow(line, "expected " + std::to_string(kEventColumns.size()) + " fields");
    TornadoEvent e;
    auto mixer = parse_mixer(f[0]);
    if (!mixer) throw MalformedRow(line, "mixer must be one of 0.1, 1, 10, 100");
    e.mixer = *mixer;
    if (f[1] == "deposit") {
      e.kind = EventKind::deposit;
    } else if (f[1] == "withdraw") {
      e.kind = EventKind::withdraw;
    } else {
      throw MalformedRow(line, "kind must be deposit or withdraw");
    }
    auto a = Address::parse(f[2]);
    if (!a) throw MalformedRow(line, "address is not 0x + 40 hex digits");
    e.address = *a;
    std::int64_t ts = 0;
    auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), ts);
    if (ec != std::errc{} || ptr != f[3].data() + f[3].size() || ts <= 0) {
      throw MalformedRow(line, "timestamp must be a positive integer");
    }
    e.timestamp = ts;
    auto gp = parse_wei(f[4]);
    if (!gp) throw MalformedRow(line, "gas_price_wei is not a 256-bit decimal integer");
    e.gas_price = *gp;
    auto hash = parse_tx_hash(f[5]);
    if (!hash) throw MalformedRow(line, "tx_hash is not 0x + 64 hex digits");
    e.tx_hash = *hash;
    if (!seen.emplace(e.kind, e.address, e.tx_hash).second) throw DuplicateTxHash(e.tx_hash);
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), event_less);
  return out;
}

std::vector<TornadoEvent> load_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_events_csv(in, path.string());
}

void write_events_csv(std::ostream& out, std::span<const TornadoEvent> events) {
  csv::write_row(out, kEventColumns);
  for (const auto& e : events) {
    csv::write_row(out, {to_string(e.mixer), kind_string(e.kind), e.address.str(), std::to_string(e.timestamp),
                         chainprofiler::to_string(e.gas_price), e.tx_hash});
  }
}

std::vector<Link> heuristic1(std::span<const TornadoEvent> events) {
  std::map<std::pair<Mixer, Address>, std::vector<const TornadoEvent*>> deposits;
  for (const auto& e : events) {
    if (e.kind == EventKind::deposit) deposits[{e.mixer, e.address}].push_back(&e);
  }
  std::vector<Link> out;
  for (const auto& w : events) {
    if (w.kind != EventKind::withdraw) continue;
    auto it = deposits.find({w.mixer, w.address});
    if (it == deposits.end()) continue;
    for (const auto* d : it->second) out.push_back({*d, w, 1});
  }
  return out;
}

bool is_manual_gas_price(const Wei& gas_price) { return gas_price % kGwei != 0; }

std::vector<Link> heuristic2(std::span<const TornadoEvent> events, GasScope scope) {
  // (pool or "all", price) -> deposits / withdraws carrying it
  using Key = std::pair<int, Wei>;
  std::map<Key, std::pair<std::vector<const TornadoEvent*>, std::vector<const TornadoEvent*>>> by_price;
  for (const auto& e : events) {
    if (!is_manual_gas_price(e.gas_price)) continue;
    const int pool = scope == GasScope::per_pool ? static_cast<int>(e.mixer) : -1;
    auto& [deps, wds] = by_price[{pool, e.gas_price}];
    (e.kind == EventKind::deposit ? deps : wds).push_back(&e);
  }
  std::vector<Link> out;
  for (const auto& [key, group] : by_price) {
    const auto& [deps, wds] = group;
    if (deps.size() != 1 || wds.size() != 1) continue;
    const auto& d = *deps.front();
    const auto& w = *wds.front();
    if (d.mixer != w.mixer || !(d.timestamp < w.timestamp)) continue;
    out.push_back({d, w, 2});
  }
  std::sort(out.begin(), out.end(), [](const Link& a, const Link& b) { return event_less(a.withdraw, b.withdraw); });
  return out;
}

std::vector<Link> heuristic3(std::span<const TornadoEvent> events, std::span<const Transaction> corpus) {
  std::set<txgraph::AddressPair> direct;
  for (const auto& tx : corpus) {
    if (tx.to_address && *tx.to_address != tx.from_address) direct.insert(txgraph::make_pair(tx.from_address, *tx.to_address));
  }
  const auto deposits = select(events, [](const TornadoEvent& e) { return e.kind == EventKind::deposit; });
  std::vector<Link> out;
  for (const auto& w : events) {
    if (w.kind != EventKind::withdraw) continue;
    for (const auto* d : deposits) {
      if (d->mixer != w.mixer || d->address == w.address) continue;
      if (direct.count(txgraph::make_pair(d->address, w.address))) out.push_back({*d, w, 3});
    }
  }
  return out;
}

std::vector<Link> all_heuristics(std::span<const TornadoEvent> events, std::span<const Transaction> corpus,
                                 GasScope scope) {
  auto out = heuristic1(events);
  auto h2 = heuristic2(events, scope);
  auto h3 = heuristic3(events, corpus);
  out.insert(out.end(), h2.begin(), h2.end());
  out.insert(out.end(), h3.begin(), h3.end());
  return out;
}

std::string to_string(Window w) {
  switch (w) {
    case Window::day: return "day";
    case Window::week: return "week";
    case Window::past: return "past";
  }
  return "past";
}

std::optional<Window> parse_window(std::string_view text) {
  if (text == "day") return Window::day;
  if (text == "week") return Window::week;
  if (text == "past") return Window::past;
  return std::nullopt;
}

std::optional<std::int64_t> window_seconds(Window w) {
  switch (w) {
    case Window::day: return kSecondsPerDay;
    case Window::week: return 7 * kSecondsPerDay;
    case Window::past: return std::nullopt;
  }
  return std::nullopt;
}

std::vector<Link> windowed_links(std::span<const Link> links, Window window) {
  const auto limit = window_seconds(window);
  std::set<std::tuple<Mixer, Address, Address>> seen;
  std::vector<Link> out;
  for (const auto& l : links) {
    if (l.heuristic == 1 || l.deposit.address == l.withdraw.address) continue;
    const auto dt = l.elapsed();
    if (dt < 0 || (limit && dt > *limit)) continue;
    if (seen.emplace(l.deposit.mixer, l.deposit.address, l.withdraw.address).second) out.push_back(l);
  }
  return out;
}

std::vector<ingest::GroundTruthPair> build_ground_truth(std::span<const Link> links, Window window) {
  std::vector<ingest::GroundTruthPair> out;
  std::set<txgraph::AddressPair> seen;
  for (const auto& l : windowed_links(links, window)) {
    if (!seen.insert(txgraph::make_pair(l.deposit.address, l.withdraw.address)).second) continue;
    out.push_back(ingest::GroundTruthPair::make(l.deposit.address, l.withdraw.address,
                                                ingest::PairOrigin::tornado_heuristic, to_string(l.deposit.mixer)));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.id_a, a.id_b) < std::tie(b.id_a, b.id_b);
  });
  return out;
}

std::vector<SeriesPoint> anonymity_series(std::span<const TornadoEvent> events, std::span<const Link> links) {
  // deposit tx -> time its first link becomes observable
  std::map<std::string, std::int64_t> linked_at;
  for (const auto& l : links) {
    const auto t = std::max(l.deposit.timestamp, l.withdraw.timestamp);
    auto [it, inserted] = linked_at.emplace(l.deposit.tx_hash, t);
    if (!inserted) it->second = std::min(it->second, t);
  }
  std::vector<SeriesPoint> out;
  for (auto mixer : kMixers) {
    auto pool = select(events, [&](const TornadoEvent& e) { return e.mixer == mixer; });
    std::sort(pool.begin(), pool.end(), [](const auto* a, const auto* b) { return event_less(*a, *b); });
    std::vector<std::int64_t> link_times;
    for (const auto* e : pool) {
      if (e->kind != EventKind::deposit) continue;
      if (auto it = linked_at.find(e->tx_hash); it != linked_at.end()) link_times.push_back(it->second);
    }
    std::sort(link_times.begin(), link_times.end());
    std::size_t deposits = 0;
    for (const auto* e : pool) {
      if (e->kind == EventKind::deposit) ++deposits;
      const auto linked = static_cast<std::size_t>(
          std::upper_bound(link_times.begin(), link_times.end(), e->timestamp) - link_times.begin());
      out.push_back({mixer, e->timestamp, deposits, deposits - std::min(deposits, linked)});
    }
  }
  return out;
}

std::map<std::size_t, std::size_t> reuse_histogram(std::span<const TornadoEvent> events) {
  std::map<std::pair<Mixer, Address>, std::size_t> per_address;
  for (const auto& e : events) {
    if (e.kind == EventKind::withdraw) ++per_address[{e.mixer, e.address}];
  }
  std::map<std::size_t, std::size_t> hist;
  for (const auto& [_, n] : per_address) ++hist[n];
  return hist;
}

std::map<std::int64_t, std::size_t> mixing_delay_distribution(std::span<const Link> links) {
  std::map<std::int64_t, std::size_t> hist;
  for (const auto& l : links) {
    if (l.elapsed() < 0) continue;
    ++hist[l.elapsed() / kSecondsPerDay];
  }
  return hist;
}

std::map<Mixer, PoolCounts> linked_withdraw_counts(std::span<const TornadoEvent> events, std::span<const Link> links) {
  std::map<Mixer, PoolCounts> out;
  for (auto m : kMixers) out[m];
  for (const auto& e : events) {
    if (e.kind == EventKind::withdraw) ++out[e.mixer].withdraws;
  }
  std::map<Mixer, std::array<std::set<std::string>, 3>> per_heuristic;
  std::map<Mixer, std::set<std::string>> any;
  for (const auto& l : links) {
    if (l.heuristic < 1 || l.heuristic > 3) throw InvalidArgument("unknown heuristic id");
    per_heuristic[l.withdraw.mixer][static_cast<std::size_t>(l.heuristic - 1)].insert(l.withdraw.tx_hash);
    any[l.withdraw.mixer].insert(l.withdraw.tx_hash);
  }
  for (auto& [m, counts] : out) {
    for (std::size_t h = 0; h < 3; ++h) counts.by_heuristic[h] = per_heuristic[m][h].size();
    counts.total = any[m].size();
  }
  return out;
}

std::vector<Address> candidate_deposits(std::span<const TornadoEvent> events, const TornadoEvent& withdraw,
                                        Window window) {
  const auto limit = window_seconds(window);
  std::set<Address> out;
  for (const auto& e : events) {
    if (e.kind != EventKind::deposit || e.mixer != withdraw.mixer) continue;
    const auto dt = withdraw.timestamp - e.timestamp;
    if (dt < 0 || (limit && dt > *limit)) continue;
    out.insert(e.address);
  }
  return {out.begin(), out.end()};
}

std::set<txgraph::AddressPair> heuristic3_edges(std::span<const Link> links) {
  std::set<txgraph::AddressPair> out;
  for (const auto& l : links) {
    if (l.heuristic == 3) out.insert(txgraph::make_pair(l.deposit.address, l.withdraw.address));
  }
  return out;
}

void write_links_csv(std::ostream& out, std::span<const Link> links) {
  csv::write_row(out, {"mixer", "heuristic", "deposit_tx", "withdraw_tx", "deposit_addr", "withdraw_addr",
                       "elapsed_seconds"});
  for (const auto& l : links) {
    csv::write_row(out, {to_string(l.deposit.mixer), std::to_string(l.heuristic), l.deposit.tx_hash,
                         l.withdraw.tx_hash, l.deposit.address.str(), l.withdraw.address.str(),
                         std::to_string(l.elapsed())});
  }
}

void write_series_csv(std::ostream& out, std::span<const SeriesPoint> series) {
  csv::write_row(out, {"mixer", "timestamp", "cumulative_deposits", "reduced"});
  for (const auto& p : series) {
    csv::write_row(out, {to_string(p.mixer), std::to_string(p.timestamp), std::to_string(p.cumulative_deposits),
                         std::to_string(p.reduced)});
  }
}

}  // namespace chainprofiler::tornado
