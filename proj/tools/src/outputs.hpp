#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace chainprofiler::cli {

/// Every file a subcommand writes. Each output gets a `<file>.meta.json`
/// sidecar; rollback() deletes everything written so far.
class OutputSet {
 public:
  OutputSet(std::string command, std::optional<std::uint64_t> seed, int workers);

  void add_input(const std::filesystem::path& path);
  /// `details`, when not null, is stored under "details" in the sidecar.
  void write(const std::filesystem::path& path, const std::string& contents,
             const nlohmann::json& details = nullptr);
  void rollback() noexcept;
  const std::vector<std::filesystem::path>& written() const noexcept { return written_; }

 private:
  std::string command_;
  std::optional<std::uint64_t> seed_;
  int workers_;
  std::map<std::string, std::string> inputs_;  // path -> sha256
  std::vector<std::filesystem::path> written_;
};

}  // namespace chainprofiler::cli
