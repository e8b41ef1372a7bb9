#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "chainprofiler/chain.hpp"

namespace chainprofiler::ingest {

/// Connection settings for an Etherscan-compatible account API.
struct ApiConfig {
  std::string base_url;  // scheme://host[:port][/path]
  std::string api_key;
  std::filesystem::path cache_dir;
  std::size_t page_size = 1000;
  std::chrono::milliseconds min_interval{200};  // 5 requests per second
  std::chrono::milliseconds initial_backoff{500};
  int max_retries = 5;

  /// Reads CHAINPROFILER_API_URL, CHAINPROFILER_API_KEY and CHAINPROFILER_CACHE_DIR.
  /// Throws InvalidArgument when the URL or key is unset.
  static ApiConfig from_env();
};

/// Fetches normal and internal transaction history per address. Requests are
/// serialized and spaced by min_interval; HTTP 429 and explicit rate-limit
/// replies are retried with exponential backoff. Results are cached as one
/// JSON file per address, so a repeated call performs no HTTP request.
class ApiClient {
 public:
  explicit ApiClient(ApiConfig config);

  std::vector<Transaction> fetch_address_history(const Address& address);

  std::size_t http_requests() const;
  std::filesystem::path cache_path(const Address& address) const;

 private:
  struct Page;
  Page get_page(const std::string& action, const Address& address, std::size_t page);
  std::vector<Transaction> fetch_remote(const Address& address);

  ApiConfig config_;
  std::string host_;
  std::string path_prefix_;
  mutable std::mutex mutex_;
  std::chrono::steady_clock::time_point last_request_{};
  std::size_t requests_ = 0;
};

}  // namespace chainprofiler::ingest
