#pragma once

#include <chainprofiler/embeddings.hpp>
#include <chainprofiler/profiles.hpp>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "outputs.hpp"

namespace chainprofiler::cli {

namespace fs = std::filesystem;

struct Context {
  OutputSet& outputs;
  std::ostream& log;
};

struct IngestOptions {
  std::optional<fs::path> transactions;
  std::optional<fs::path> addresses;
  std::optional<fs::path> labels;
  bool fetch = false;
  std::size_t min_sent = 5;
  fs::path out;
};

struct FeatureOptions {
  fs::path transactions;
  std::optional<fs::path> addresses;
  std::optional<fs::path> daily_gas;
  std::optional<fs::path> daily_gas_out;
  std::string kind = "all";
  std::size_t min_sent = 5;
  profiles::FeatureConfig config;
  fs::path out;
};

struct GraphOptions {
  fs::path transactions;
  std::optional<fs::path> exclude;
  std::optional<fs::path> removed_out;
  bool raw = false;
  fs::path out;
};

struct EmbedOptions {
  std::optional<fs::path> transactions;
  std::optional<fs::path> graph;
  std::string method;
  bool complete = false;
  std::size_t min_sent = 5;
  embeddings::WalkParams params;
  fs::path out;
};

struct RankOptions {
  fs::path features;
  std::string target;
  std::optional<std::string> method;
  std::optional<fs::path> candidates;
  std::size_t top = 0;
  fs::path out;
};

struct EvaluateOptions {
  std::vector<fs::path> features;
  fs::path pairs;
  std::vector<std::string> fuse;
  std::optional<std::size_t> resolution;
  std::optional<fs::path> csv_out;
  fs::path out;
};

struct TornadoOptions {
  fs::path events;
  fs::path transactions;
  std::string gas_scope = "per_pool";
  std::vector<fs::path> features;
  std::vector<std::string> fuse;
  std::optional<std::size_t> resolution;
  fs::path out;
};

struct FingerprintOptions {
  fs::path transactions;
  int digits = 9;
  std::vector<std::string> cutoffs = {"50", "100", "500", "all"};
  std::optional<double> exponent;
  std::size_t bins = 256;
  std::optional<fs::path> histogram_out;
  fs::path out;
};

struct PipelineOptions {
  fs::path transactions;
  std::optional<fs::path> pairs;
  std::optional<fs::path> events;
  std::optional<fs::path> labels;
  std::optional<fs::path> daily_gas;
  std::size_t min_sent = 5;
  profiles::FeatureConfig config;
  embeddings::WalkParams params;
  std::optional<std::size_t> resolution;
  std::string gas_scope = "per_pool";
  int digits = 9;
  std::vector<std::string> cutoffs = {"50", "100", "500", "all"};
  std::optional<double> exponent;
  std::size_t bins = 256;
  fs::path out;
};

void run_ingest(const IngestOptions& o, Context& ctx);
void run_features(const FeatureOptions& o, Context& ctx);
void run_graph(const GraphOptions& o, Context& ctx);
void run_embed(const EmbedOptions& o, Context& ctx);
void run_rank(const RankOptions& o, Context& ctx);
void run_evaluate(const EvaluateOptions& o, Context& ctx);
void run_tornado(const TornadoOptions& o, Context& ctx);
void run_fingerprint(const FingerprintOptions& o, Context& ctx);
void run_pipeline(const PipelineOptions& o, Context& ctx);

}  // namespace chainprofiler::cli
