#include "config.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>

namespace chainprofiler::cli {
namespace {

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

}  // namespace

std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("--config: cannot read " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalid("--config: " + path.string() + ":" + std::to_string(n) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ConfigInvalid("--config: " + path.string() + ":" + std::to_string(n) + ": empty key");
    if (key == "config") throw ConfigInvalid("--config: nested config files are not supported");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigInvalid("--config: " + path.string() + ":" + std::to_string(n) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

void merge_config(const CLI::App& sub, const std::map<std::string, std::string>& config,
                  std::vector<std::string>& args) {
  for (const auto& [key, value] : config) {
    const auto flag = "--" + key;
    const CLI::Option* opt = sub.get_option_no_throw(flag);
    if (opt == nullptr) throw ConfigInvalid("--config: unknown key '" + key + "' for " + sub.get_name());
    if (given(args, flag)) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes") {
        args.push_back(flag);
      } else if (value != "false" && value != "0" && value != "no") {
        throw ConfigInvalid("--config: key '" + key + "' expects true or false");
      }
      continue;
    }
    args.push_back(flag);
    args.push_back(value);
  }
}

}  // namespace chainprofiler::cli
