#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "chainprofiler/api_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "chainprofiler/csv.hpp"
#include "chainprofiler/errors.hpp"
#include "chainprofiler/ingest.hpp"

namespace chainprofiler::ingest {
namespace {

using nlohmann::json;

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

std::string str_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return "";
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

json to_json(const Transaction& tx) {
  return json{{"tx_hash", tx.tx_hash},
              {"block_number", tx.block_number},
              {"timestamp", tx.timestamp},
              {"from_address", tx.from_address.str()},
              {"to_address", tx.to_address ? tx.to_address->str() : ""},
              {"value_wei", chainprofiler::to_string(tx.value)},
              {"gas_price_wei", chainprofiler::to_string(tx.gas_price)},
              {"gas_used", tx.gas_used},
              {"is_internal", tx.is_internal}};
}

}  // namespace

struct ApiClient::Page {
  json rows = json::array();
};

ApiConfig ApiConfig::from_env() {
  ApiConfig c;
  c.base_url = env_or_empty("CHAINPROFILER_API_URL");
  c.api_key = env_or_empty("CHAINPROFILER_API_KEY");
  auto cache = env_or_empty("CHAINPROFILER_CACHE_DIR");
  c.cache_dir = cache.empty() ? std::filesystem::path(".chainprofiler-cache") : std::filesystem::path(cache);
  if (c.base_url.empty()) throw InvalidArgument("CHAINPROFILER_API_URL is not set");
  if (c.api_key.empty()) throw InvalidArgument("CHAINPROFILER_API_KEY is not set");
  return c;
}

ApiClient::ApiClient(ApiConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw InvalidArgument("API base URL is empty");
  if (config_.api_key.empty()) throw InvalidArgument("API key is empty");
  if (config_.page_size == 0) throw InvalidArgument("API page size must be positive");
  const auto scheme_end = config_.base_url.find("://");
  const auto host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_begin = config_.base_url.find('/', host_begin);
  host_ = config_.base_url.substr(0, path_begin);
  path_prefix_ = path_begin == std::string::npos ? "/" : config_.base_url.substr(path_begin);
}

std::size_t ApiClient::http_requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::filesystem::path ApiClient::cache_path(const Address& address) const {
  return config_.cache_dir / (address.str() + ".json");
}

ApiClient::Page ApiClient::get_page(const std::string& action, const Address& address, std::size_t page) {
  const httplib::Params params = {{"module", "account"},      {"action", action},
                                  {"address", address.str()}, {"page", std::to_string(page)},
                                  {"offset", std::to_string(config_.page_size)},
                                  {"startblock", "0"},       {"sort", "asc"},
                                  {"apikey", config_.api_key}};
  auto backoff = config_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    int status = 0;
    std::string body;
    {
      std::lock_guard lock(mutex_);
      const auto ready = last_request_ + config_.min_interval;
      const auto now = std::chrono::steady_clock::now();
      if (now < ready) std::this_thread::sleep_for(ready - now);
      httplib::Client client(host_);
      client.set_connection_timeout(10);
      client.set_read_timeout(30);
      auto res = client.Get(path_prefix_, params, httplib::Headers{});
      last_request_ = std::chrono::steady_clock::now();
      ++requests_;
      if (!res) throw ApiError("request to " + host_ + " failed: " + httplib::to_string(res.error()));
      status = res->status;
      body = res->body;
    }

    bool limited = status == 429;
    if (!limited && status != 200) throw HttpError(status);
    json doc;
    if (!limited) {
      try {
        doc = json::parse(body);
      } catch (const json::parse_error& e) {
        throw ApiError(std::string("unparseable response: ") + e.what());
      }
      const auto message = str_field(doc, "message");
      const auto result = doc.contains("result") && doc["result"].is_string() ? doc["result"].get<std::string>() : "";
      if (str_field(doc, "status") != "1") {
        if (message.find("No transactions found") != std::string::npos) return {};
        if (result.find("rate limit") != std::string::npos || message.find("rate limit") != std::string::npos) {
          limited = true;
        } else {
          throw ApiError(result.empty() ? message : result);
        }
      }
    }
    if (limited) {
      if (attempt >= config_.max_retries) throw RateLimited("rate limited after " + std::to_string(attempt + 1) + " attempts");
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
      continue;
    }
    if (!doc["result"].is_array()) throw ApiError("result is not an array");
    Page p;
    p.rows = std::move(doc["result"]);
    return p;
  }
}

std::vector<Transaction> ApiClient::fetch_remote(const Address& address) {
  // key: (hash, trace id) with "" for the outer transaction
  std::map<std::pair<std::string, std::string>, Transaction> unique;
  std::map<std::string, Wei> outer_gas_price;

  auto convert = [&](const json& row, bool internal) -> std::optional<std::pair<std::string, Transaction>> {
    Transaction tx;
    auto hash = parse_tx_hash(str_field(row, "hash"));
    auto from = Address::parse(str_field(row, "from"));
    if (!hash || !from) throw ApiError("malformed transaction record from API");
    tx.tx_hash = *hash;
    tx.from_address = *from;
    const auto to = str_field(row, "to");
    if (!to.empty()) tx.to_address = Address::from_string(to);
    auto block = parse_wei(str_field(row, "blockNumber"));
    auto ts = parse_wei(str_field(row, "timeStamp"));
    auto value = parse_wei(str_field(row, "value"));
    if (!block || !ts || !value || *ts == 0) throw ApiError("malformed numeric field from API");
    tx.block_number = block->convert_to<std::uint64_t>();
    tx.timestamp = ts->convert_to<std::int64_t>();
    tx.value = *value;
    tx.is_internal = internal;
    if (!internal) {
      auto gp = parse_wei(str_field(row, "gasPrice"));
      auto used = parse_wei(str_field(row, "gasUsed"));
      tx.gas_price = gp ? *gp : Wei(0);
      tx.gas_used = used ? used->convert_to<std::uint64_t>() : 0;
      outer_gas_price[tx.tx_hash] = tx.gas_price;
    }
    return std::make_pair(internal ? str_field(row, "traceId") : std::string(), std::move(tx));
  };

  for (const std::string action : {"txlist", "txlistinternal"}) {
    const bool internal = action == "txlistinternal";
    for (std::size_t page = 1;; ++page) {
      auto p = get_page(action, address, page);
      for (const auto& row : p.rows) {
        auto converted = convert(row, internal);
        if (!converted) continue;
        auto& [trace, tx] = *converted;
        unique.emplace(std::make_pair(tx.tx_hash, internal ? "i:" + trace : std::string()), std::move(tx));
      }
      if (p.rows.size() < config_.page_size) break;
    }
  }

  std::vector<Transaction> out;
  out.reserve(unique.size());
  for (auto& [key, tx] : unique) {
    if (tx.is_internal) {
      auto it = outer_gas_price.find(tx.tx_hash);
      if (it != outer_gas_price.end()) tx.gas_price = it->second;
    }
    out.push_back(std::move(tx));
  }
  std::sort(out.begin(), out.end(), canonical_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Transaction> ApiClient::fetch_address_history(const Address& address) {
  const auto path = cache_path(address);
  if (std::filesystem::exists(path)) {
    const json doc = json::parse(csv::read_file(path));
    if (doc.empty()) return {};
    std::stringstream jsonl;
    for (const auto& row : doc) jsonl << row.dump() << '\n';
    return parse_transactions_jsonl(jsonl, path.string());
  }
  auto txs = fetch_remote(address);
  json doc = json::array();
  for (const auto& tx : txs) doc.push_back(to_json(tx));
  csv::write_file_atomic(path, doc.dump());
  return txs;
}

}  // namespace chainprofiler::ingest
