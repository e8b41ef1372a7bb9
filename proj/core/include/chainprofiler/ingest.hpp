#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "chainprofiler/chain.hpp"

namespace chainprofiler::ingest {

inline const std::vector<std::string> kTransactionColumns = {
    "tx_hash", "block_number", "timestamp", "from_address", "to_address",
    "value_wei", "gas_price_wei", "gas_used", "is_internal"};

enum class Source { twitter, tornado, humanitydao, other };

std::string to_string(Source s);
std::optional<Source> parse_source(std::string_view text);

/// Lexicographically ordered set of unique addresses, each tagged with the
/// data source it came from (the first tag wins on re-insertion).
class AddressSet {
 public:
  AddressSet() = default;

  bool insert(const Address& a, Source source = Source::other);
  bool contains(const Address& a) const { return tags_.count(a) != 0; }
  std::optional<Source> source(const Address& a) const;
  std::size_t size() const noexcept { return tags_.size(); }
  bool empty() const noexcept { return tags_.empty(); }

  /// Addresses in lexicographic order.
  std::vector<Address> addresses() const;

  auto begin() const { return tags_.begin(); }
  auto end() const { return tags_.end(); }

 private:
  std::map<Address, Source> tags_;
};

enum class PairOrigin { ens, tornado_heuristic };

/// Unordered same-owner address pair, stored with id_a < id_b.
struct GroundTruthPair {
  Address id_a;
  Address id_b;
  PairOrigin origin = PairOrigin::ens;
  std::optional<std::string> label;

  /// Throws InvalidArgument when a == b.
  static GroundTruthPair make(const Address& a, const Address& b, PairOrigin origin,
                              std::optional<std::string> label = std::nullopt);

  friend bool operator==(const GroundTruthPair&, const GroundTruthPair&) = default;
};

struct ServiceLabel {
  std::string service_name;
  std::string category;
};

struct ServiceLabelMap {
  std::map<Address, ServiceLabel> labels;
  std::set<std::string> categories;

  void add(const Address& a, ServiceLabel label);
};

// --- transactions -----------------------------------------------------------

/// Parses the canonical CSV form. Rows are validated individually; the first
/// invalid row raises MalformedRow. Output is in canonical order.
std::vector<Transaction> parse_transactions_csv(std::istream& in, const std::string& source = "<stream>");
/// JSON-lines variant: one object per line with the CSV column names as keys.
std::vector<Transaction> parse_transactions_jsonl(std::istream& in, const std::string& source = "<stream>");

/// Loads a transactions file; ".jsonl"/".ndjson" selects JSON lines, anything else CSV.
std::vector<Transaction> load_transactions(const std::filesystem::path& path);

void write_transactions_csv(std::ostream& out, std::span<const Transaction> txs);

/// Sorts into canonical order and rejects duplicates. A non-internal hash may
/// appear once; internal traces under one hash must differ in some field.
void canonicalize(std::vector<Transaction>& txs);
/// Drops rows that are exact copies of another row, then canonicalizes.
void merge_duplicates(std::vector<Transaction>& txs);

// --- other inputs -----------------------------------------------------------

/// ens_pairs.csv (ens_name,address). Keeps names with exactly two distinct
/// addresses and drops addresses claimed by more than one name.
std::vector<GroundTruthPair> load_ens_pairs(const std::filesystem::path& path);
std::vector<GroundTruthPair> parse_ens_pairs(std::istream& in, const std::string& source = "<stream>");

/// labels.csv (address,service_name,category).
// pairs.csv: id_a,id_b,origin,label
void write_pairs_csv(std::ostream& out, std::span<const GroundTruthPair> pairs);
std::vector<GroundTruthPair> parse_pairs_csv(std::istream& in, const std::string& source = "<stream>");
/// Reads an ENS name file or a pairs.csv file, chosen by the header line.
std::vector<GroundTruthPair> load_pairs(const std::filesystem::path& path);
std::string to_string(PairOrigin origin);

ServiceLabelMap load_service_labels(const std::filesystem::path& path);
ServiceLabelMap parse_service_labels(std::istream& in, const std::string& source = "<stream>");

/// addresses.csv (address,source).
AddressSet load_address_set(const std::filesystem::path& path);

// --- analyses ---------------------------------------------------------------

/// Addresses that sent at least `min_sent` non-internal transactions.
AddressSet filter_active_addresses(std::span<const Transaction> txs, std::size_t min_sent);

/// Non-internal sent-transaction count per sender.
std::map<Address, std::size_t> sent_counts(std::span<const Transaction> txs);

/// For each declared category, the fraction of `addresses` with at least one
/// transaction (either direction) whose counterparty carries that category.
std::map<std::string, double> service_exposure(const AddressSet& addresses, const ServiceLabelMap& labels,
                                               std::span<const Transaction> txs);

}  // namespace chainprofiler::ingest
