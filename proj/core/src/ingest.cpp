#include "chainprofiler/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>

#include "chainprofiler/csv.hpp"
#include "chainprofiler/errors.hpp"

namespace chainprofiler::ingest {
namespace {

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int v{};
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "true" || lower == "1") return true;
  if (lower == "false" || lower == "0") return false;
  return std::nullopt;
}

Transaction parse_fields(const std::vector<std::string>& f, std::size_t line) {
  if (f.size() != kTransactionColumns.size()) {
    throw MalformedRow(line, "expected " + std::to_string(kTransactionColumns.size()) + " fields, got " +
                                 std::to_string(f.size()));
  }
  Transaction tx;
  auto hash = parse_tx_hash(f[0]);
  if (!hash) throw MalformedRow(line, "tx_hash is not 0x + 64 hex digits");
  tx.tx_hash = *hash;

  auto block = parse_int<std::uint64_t>(f[1]);
  if (!block) throw MalformedRow(line, "block_number is not a non-negative integer");
  tx.block_number = *block;

  auto ts = parse_int<std::int64_t>(f[2]);
  if (!ts || *ts <= 0) throw MalformedRow(line, "timestamp must be a positive integer");
  tx.timestamp = *ts;

  auto from = Address::parse(f[3]);
  if (!from) throw MalformedRow(line, "from_address is not 0x + 40 hex digits");
  tx.from_address = *from;

  if (!f[4].empty()) {
    auto to = Address::parse(f[4]);
    if (!to) throw MalformedRow(line, "to_address is not 0x + 40 hex digits");
    tx.to_address = *to;
  }

  auto value = parse_wei(f[5]);
  if (!value) throw MalformedRow(line, "value_wei is not a 256-bit decimal integer");
  tx.value = *value;

  auto gas_price = parse_wei(f[6]);
  if (!gas_price) throw MalformedRow(line, "gas_price_wei is not a 256-bit decimal integer");
  tx.gas_price = *gas_price;

  auto gas_used = parse_int<std::uint64_t>(f[7]);
  if (!gas_used) throw MalformedRow(line, "gas_used is not a non-negative integer");
  tx.gas_used = *gas_used;

  auto internal = parse_bool(f[8]);
  if (!internal) throw MalformedRow(line, "is_internal must be true/false");
  tx.is_internal = *internal;
  return tx;
}

std::string json_field(const nlohmann::json& obj, const std::string& key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MalformedRow(line, "missing field " + key);
  if (it->is_null()) return "";
  if (it->is_string()) return it->get<std::string>();
  if (it->is_boolean()) return it->get<bool>() ? "true" : "false";
  if (it->is_number_unsigned()) return std::to_string(it->get<std::uint64_t>());
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  throw MalformedRow(line, "field " + key + " has unsupported type");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string to_string(Source s) {
  switch (s) {
    case Source::twitter: return "twitter";
    case Source::tornado: return "tornado";
    case Source::humanitydao: return "humanitydao";
    case Source::other: return "other";
  }
  return "other";
}

std::optional<Source> parse_source(std::string_view text) {
  if (text == "twitter") return Source::twitter;
  if (text == "tornado") return Source::tornado;
  if (text == "humanitydao") return Source::humanitydao;
  if (text == "other") return Source::other;
  return std::nullopt;
}

bool AddressSet::insert(const Address& a, Source source) { return tags_.emplace(a, source).second; }

std::optional<Source> AddressSet::source(const Address& a) const {
  auto it = tags_.find(a);
  if (it == tags_.end()) return std::nullopt;
  return it->second;
}

std::vector<Address> AddressSet::addresses() const {
  std::vector<Address> out;
  out.reserve(tags_.size());
  for (const auto& [a, _] : tags_) out.push_back(a);
  return out;
}

GroundTruthPair GroundTruthPair::make(const Address& a, const Address& b, PairOrigin origin,
                                      std::optional<std::string> label) {
  if (a == b) throw InvalidArgument("ground-truth pair needs two distinct addresses: " + a.str());
  GroundTruthPair p;
  p.id_a = std::min(a, b);
  p.id_b = std::max(a, b);
  p.origin = origin;
  p.label = std::move(label);
  return p;
}

void ServiceLabelMap::add(const Address& a, ServiceLabel label) {
  categories.insert(label.category);
  labels[a] = std::move(label);
}

void canonicalize(std::vector<Transaction>& txs) {
  std::sort(txs.begin(), txs.end(), canonical_less);
  std::set<std::string> seen_external;
  for (std::size_t i = 0; i < txs.size(); ++i) {
    if (!txs[i].is_internal) {
      if (!seen_external.insert(txs[i].tx_hash).second) throw DuplicateTxHash(txs[i].tx_hash);
    } else if (i > 0 && txs[i - 1] == txs[i]) {
      throw DuplicateTxHash(txs[i].tx_hash);
    }
  }
}

void merge_duplicates(std::vector<Transaction>& txs) {
  std::sort(txs.begin(), txs.end(), canonical_less);
  txs.erase(std::unique(txs.begin(), txs.end()), txs.end());
  canonicalize(txs);
}

std::vector<Transaction> parse_transactions_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  csv::expect_header(reader, kTransactionColumns, source);
  std::vector<Transaction> txs;
  std::vector<std::string> fields;
  while (reader.next(fields)) txs.push_back(parse_fields(fields, reader.line()));
  canonicalize(txs);
  return txs;
}

std::vector<Transaction> parse_transactions_jsonl(std::istream& in, const std::string& source) {
  std::vector<Transaction> txs;
  std::string line;
  std::size_t lineno = 0;
  bool any_line = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    any_line = true;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedRow(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw MalformedRow(lineno, "expected a JSON object");
    std::vector<std::string> fields;
    for (const auto& col : kTransactionColumns) fields.push_back(json_field(obj, col, lineno));
    txs.push_back(parse_fields(fields, lineno));
  }
  if (!any_line) throw EmptyFile(source);
  canonicalize(txs);
  return txs;
}

std::vector<Transaction> load_transactions(const std::filesystem::path& path) {
  auto in = open_input(path);
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson") return parse_transactions_jsonl(in, path.string());
  return parse_transactions_csv(in, path.string());
}

void write_transactions_csv(std::ostream& out, std::span<const Transaction> txs) {
  csv::write_row(out, kTransactionColumns);
  for (const auto& tx : txs) {
    csv::write_row(out, {tx.tx_hash, std::to_string(tx.block_number), std::to_string(tx.timestamp),
                         tx.from_address.str(), tx.to_address ? tx.to_address->str() : "", chainprofiler::to_string(tx.value),
                         chainprofiler::to_string(tx.gas_price), std::to_string(tx.gas_used), tx.is_internal ? "true" : "false"});
  }
}

std::vector<GroundTruthPair> parse_ens_pairs(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  csv::expect_header(reader, {"ens_name", "address"}, source);
  std::map<std::string, std::set<Address>> by_name;
  std::map<Address, std::set<std::string>> names_of;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 2 || f[0].empty()) throw MalformedRow(reader.line(), "expected ens_name,address");
    auto a = Address::parse(f[1]);
    if (!a) throw MalformedRow(reader.line(), "address is not 0x + 40 hex digits");
    by_name[f[0]].insert(*a);
    names_of[*a].insert(f[0]);
  }
  std::vector<GroundTruthPair> pairs;
  for (const auto& [name, addrs] : by_name) {
    if (addrs.size() != 2) continue;
    const bool shared = std::any_of(addrs.begin(), addrs.end(), [&](const Address& a) { return names_of[a].size() > 1; });
    if (shared) continue;
    pairs.push_back(GroundTruthPair::make(*addrs.begin(), *addrs.rbegin(), PairOrigin::ens, name));
  }
  return pairs;
}

std::vector<GroundTruthPair> load_ens_pairs(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_ens_pairs(in, path.string());
}

std::string to_string(PairOrigin origin) { return origin == PairOrigin::ens ? "ens" : "tornado"; }

void write_pairs_csv(std::ostream& out, std::span<const GroundTruthPair> pairs) {
  csv::write_row(out, {"id_a", "id_b", "origin", "label"});
  for (const auto& p : pairs) csv::write_row(out, {p.id_a.str(), p.id_b.str(), to_string(p.origin), p.label.value_or("")});
}

std::vector<GroundTruthPair> parse_pairs_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  csv::expect_header(reader, {"id_a", "id_b", "origin", "label"}, source);
  std::vector<GroundTruthPair> pairs;
  std::set<std::pair<Address, Address>> seen;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 4) throw MalformedRow(reader.line(), "expected id_a,id_b,origin,label");
    auto a = Address::parse(f[0]);
    auto b = Address::parse(f[1]);
    if (!a || !b) throw MalformedRow(reader.line(), "address is not 0x + 40 hex digits");
    if (*a == *b) throw MalformedRow(reader.line(), "pair of identical addresses");
    PairOrigin origin;
    if (f[2] == "ens") origin = PairOrigin::ens;
    else if (f[2] == "tornado") origin = PairOrigin::tornado_heuristic;
    else throw MalformedRow(reader.line(), "unknown origin '" + f[2] + "'");
    auto p = GroundTruthPair::make(*a, *b, origin, f[3].empty() ? std::nullopt : std::optional<std::string>(f[3]));
    if (!seen.emplace(p.id_a, p.id_b).second) throw MalformedRow(reader.line(), "duplicate pair");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<GroundTruthPair> load_pairs(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string first;
  std::getline(in, first);
  in.clear();
  in.seekg(0);
  if (first.rfind("id_a", 0) == 0) return parse_pairs_csv(in, path.string());
  return parse_ens_pairs(in, path.string());
}

ServiceLabelMap parse_service_labels(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  csv::expect_header(reader, {"address", "service_name", "category"}, source);
  ServiceLabelMap out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 3 || f[2].empty()) throw MalformedRow(reader.line(), "expected address,service_name,category");
    auto a = Address::parse(f[0]);
    if (!a) throw MalformedRow(reader.line(), "address is not 0x + 40 hex digits");
    out.add(*a, {f[1], f[2]});
  }
  return out;
}

ServiceLabelMap load_service_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_service_labels(in, path.string());
}

AddressSet load_address_set(const std::filesystem::path& path) {
  auto in = open_input(path);
  csv::Reader reader(in);
  csv::expect_header(reader, {"address", "source"}, path.string());
  AddressSet out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 2) throw MalformedRow(reader.line(), "expected address,source");
    auto a = Address::parse(f[0]);
    auto s = parse_source(f[1]);
    if (!a) throw MalformedRow(reader.line(), "address is not 0x + 40 hex digits");
    if (!s) throw MalformedRow(reader.line(), "unknown source '" + f[1] + "'");
    out.insert(*a, *s);
  }
  return out;
}

std::map<Address, std::size_t> sent_counts(std::span<const Transaction> txs) {
  std::map<Address, std::size_t> counts;
  for (const auto& tx : txs) {
    if (!tx.is_internal) ++counts[tx.from_address];
  }
  return counts;
}

AddressSet filter_active_addresses(std::span<const Transaction> txs, std::size_t min_sent) {
  if (min_sent < 1) throw InvalidArgument("min_sent must be at least 1");
  AddressSet out;
  for (const auto& [a, n] : sent_counts(txs)) {
    if (n >= min_sent) out.insert(a);
  }
  return out;
}

std::map<std::string, double> service_exposure(const AddressSet& addresses, const ServiceLabelMap& labels,
                                               std::span<const Transaction> txs) {
  if (labels.labels.empty()) throw InvalidArgument("service label map is empty");
  std::map<std::string, std::set<Address>> touched;
  auto visit = [&](const Address& self, const std::optional<Address>& other) {
    if (!other || !addresses.contains(self)) return;
    auto it = labels.labels.find(*other);
    if (it != labels.labels.end()) touched[it->second.category].insert(self);
  };
  for (const auto& tx : txs) {
    visit(tx.from_address, tx.to_address);
    if (tx.to_address) visit(*tx.to_address, tx.from_address);
  }
  std::map<std::string, double> out;
  for (const auto& cat : labels.categories) {
    const auto n = touched.count(cat) ? touched[cat].size() : 0;
    out[cat] = addresses.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(addresses.size());
  }
  return out;
}

}  // namespace chainprofiler::ingest
