#include "outputs.hpp"

#include <chainprofiler/cli.hpp>
#include <chainprofiler/csv.hpp>
#include <chainprofiler/digest.hpp>
#include <chainprofiler/errors.hpp>
#include <nlohmann/json.hpp>

#include "config.hpp"

namespace fs = std::filesystem;

namespace chainprofiler::cli {

OutputSet::OutputSet(std::string command, std::optional<std::uint64_t> seed, int workers)
    : command_(std::move(command)), seed_(seed), workers_(workers) {}

void OutputSet::add_input(const fs::path& path) {
  const auto key = path.lexically_normal().string();
  if (!inputs_.count(key)) inputs_.emplace(key, sha256_file(path));
}

void OutputSet::write(const fs::path& path, const std::string& contents, const nlohmann::json& details) {
  std::error_code ec;
  for (const auto& [input, _] : inputs_) {
    if (fs::exists(path, ec) && fs::equivalent(path, input, ec)) {
      throw ConfigInvalid("output " + path.string() + " would overwrite an input");
    }
  }
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  nlohmann::ordered_json meta;
  meta["tool"] = "chainprofiler";
  meta["version"] = version();
  meta["command"] = command_;
  meta["seed"] = seed_ ? nlohmann::ordered_json(*seed_) : nlohmann::ordered_json(nullptr);
  meta["workers"] = workers_;
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& [p, digest] : inputs_) inputs.push_back({{"path", p}, {"sha256", digest}});
  meta["inputs"] = std::move(inputs);
  meta["sha256"] = sha256_hex(contents);
  if (!details.is_null()) meta["details"] = nlohmann::ordered_json::parse(details.dump());

  written_.push_back(path);
  csv::write_file_atomic(path, contents);
  auto sidecar = path;
  sidecar += ".meta.json";
  written_.push_back(sidecar);
  csv::write_file_atomic(sidecar, meta.dump(2) + "\n");
}

void OutputSet::rollback() noexcept {
  for (const auto& p : written_) {
    std::error_code ec;
    fs::remove(p, ec);
  }
  written_.clear();
}

}  // namespace chainprofiler::cli
