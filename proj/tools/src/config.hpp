#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace chainprofiler::cli {

class ConfigInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value file. Blank lines and lines starting with '#' are ignored;
/// keys are normalized to dashes, so `min_sent` and `min-sent` are the same key.
std::map<std::string, std::string> read_config(const std::filesystem::path& path);

/// Appends `--key value` for every config entry whose flag was not given on
/// the command line. Throws ConfigInvalid for keys the subcommand does not know.
void merge_config(const CLI::App& sub, const std::map<std::string, std::string>& config,
                  std::vector<std::string>& args);

}  // namespace chainprofiler::cli
