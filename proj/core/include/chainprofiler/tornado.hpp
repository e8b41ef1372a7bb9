#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "chainprofiler/chain.hpp"
#include "chainprofiler/ingest.hpp"
#include "chainprofiler/txgraph.hpp"

namespace chainprofiler::tornado {

/// Fixed-denomination mixer pools.
enum class Mixer { eth0_1, eth1, eth10, eth100 };
inline constexpr std::array<Mixer, 4> kMixers = {Mixer::eth0_1, Mixer::eth1, Mixer::eth10, Mixer::eth100};

std::string to_string(Mixer m);  // "0.1", "1", "10", "100"
std::optional<Mixer> parse_mixer(std::string_view text);

enum class EventKind { deposit, withdraw };

/// A withdraw is attributed to its recipient address; relayers never appear.
struct TornadoEvent {
  Mixer mixer = Mixer::eth0_1;
  EventKind kind = EventKind::deposit;
  Address address;
  std::int64_t timestamp = 0;
  Wei gas_price = 0;
  std::string tx_hash;

  friend bool operator==(const TornadoEvent&, const TornadoEvent&) = default;
};

struct Link {
  TornadoEvent deposit;
  TornadoEvent withdraw;
  int heuristic = 0;  // 1, 2 or 3

  /// withdraw.timestamp - deposit.timestamp
  std::int64_t elapsed() const { return withdraw.timestamp - deposit.timestamp; }
};

// tornado_events.csv: mixer,kind,address,timestamp,gas_price_wei,tx_hash
std::vector<TornadoEvent> parse_events_csv(std::istream& in, const std::string& source = "<stream>");
std::vector<TornadoEvent> load_events(const std::filesystem::path& path);
void write_events_csv(std::ostream& out, std::span<const TornadoEvent> events);

/// Same address deposited and withdrew in one pool: every such
/// (deposit, withdraw) pair is linked once.
std::vector<Link> heuristic1(std::span<const TornadoEvent> events);

/// A gas price is manual when it is not a whole number of gwei.
bool is_manual_gas_price(const Wei& gas_price);

enum class GasScope { per_pool, global };

/// Links a deposit and a later withdraw of the same pool whose manual gas
/// price occurs on exactly one deposit and exactly one withdraw. Uniqueness
/// is counted within the pool, or across all pools for GasScope::global.
std::vector<Link> heuristic2(std::span<const TornadoEvent> events, GasScope scope = GasScope::per_pool);

/// Links a deposit and a withdraw of the same pool whose (distinct)
/// addresses transacted directly in either direction.
std::vector<Link> heuristic3(std::span<const TornadoEvent> events, std::span<const Transaction> corpus);

/// All three heuristics, concatenated in heuristic order.
std::vector<Link> all_heuristics(std::span<const TornadoEvent> events, std::span<const Transaction> corpus,
                                 GasScope scope = GasScope::per_pool);

enum class Window { day, week, past };
std::string to_string(Window w);
std::optional<Window> parse_window(std::string_view text);
/// Seconds, or nullopt for `past`.
std::optional<std::int64_t> window_seconds(Window w);

/// Heuristic 2 and 3 links between distinct addresses whose deposit precedes the withdraw by at most the
/// window, one per (pool, deposit address, withdraw address).
std::vector<Link> windowed_links(std::span<const Link> links, Window window);

/// Address pairs of windowed_links, deduplicated across pools.
std::vector<ingest::GroundTruthPair> build_ground_truth(std::span<const Link> links, Window window);

struct SeriesPoint {
  Mixer mixer;
  std::int64_t timestamp = 0;
  std::size_t cumulative_deposits = 0;
  std::size_t reduced = 0;  // minus deposits already linked by time t
};

/// One point per event of each pool, in time order. A link becomes known at
/// the later of its two event times.
std::vector<SeriesPoint> anonymity_series(std::span<const TornadoEvent> events, std::span<const Link> links);

/// withdraw count -> number of (pool, address) keys with that many withdraws.
std::map<std::size_t, std::size_t> reuse_histogram(std::span<const TornadoEvent> events);

/// whole elapsed days -> number of links; links with negative elapsed time are skipped.
std::map<std::int64_t, std::size_t> mixing_delay_distribution(std::span<const Link> links);

struct PoolCounts {
  std::array<std::size_t, 3> by_heuristic{};  // distinct withdraws linked by H1, H2, H3
  std::size_t total = 0;                      // distinct withdraws linked by any
  std::size_t withdraws = 0;                  // all withdraws in the pool
};

/// Deanonymized withdraw counts per pool.
std::map<Mixer, PoolCounts> linked_withdraw_counts(std::span<const TornadoEvent> events, std::span<const Link> links);

/// Distinct deposit addresses of the withdraw's pool deposited no later than
/// the withdraw and within the window.
std::vector<Address> candidate_deposits(std::span<const TornadoEvent> events, const TornadoEvent& withdraw,
                                        Window window);

/// Address pairs used by heuristic 3 links; removed from the graph before
/// embedding-based mixer evaluation.
std::set<txgraph::AddressPair> heuristic3_edges(std::span<const Link> links);

// links.csv: mixer,heuristic,deposit_tx,withdraw_tx,deposit_addr,withdraw_addr,elapsed_seconds
void write_links_csv(std::ostream& out, std::span<const Link> links);
// anonymity_series.csv: mixer,timestamp,cumulative_deposits,reduced
void write_series_csv(std::ostream& out, std::span<const SeriesPoint> series);

}  // namespace chainprofiler::tornado
