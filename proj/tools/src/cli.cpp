#include <chainprofiler/cli.hpp>
#include <chainprofiler/errors.hpp>

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <ostream>
#include <random>

#include "commands.hpp"
#include "config.hpp"

#ifndef CHAINPROFILER_VERSION
#define CHAINPROFILER_VERSION "0.0.0"
#endif

namespace chainprofiler::cli {
namespace {

const std::vector<std::string> kSubcommands = {"ingest",   "features", "graph",       "embed",   "rank",
                                               "evaluate", "tornado",  "fingerprint", "pipeline"};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key=value configuration file; flags win");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--workers", c.workers, "worker threads; 1 is deterministic")->check(CLI::PositiveNumber);
}

void add_feature_config(CLI::App* sub, profiles::FeatureConfig& f) {
  sub->add_option("--b-hour", f.b_hour, "time-of-day histogram bins");
  sub->add_option("--b-gas", f.b_gas, "gas price histogram bins");
  sub->add_option("--gas-clip", f.gas_clip, "upper bound of the gas price ratio");
}

void add_walk_params(CLI::App* sub, embeddings::WalkParams& w) {
  sub->add_option("--dim", w.dim, "embedding dimension");
  sub->add_option("--walks-per-node", w.walks_per_node, "walks started at each node");
  sub->add_option("--cover-size", w.cover_size, "nodes per diffusion tree");
  sub->add_option("--walk-length", w.walk_length, "steps per role walk");
  sub->add_option("--window", w.window, "skip-gram window");
  sub->add_option("--negatives", w.negatives, "negative samples per pair");
  sub->add_option("--epochs", w.epochs, "training epochs");
  sub->add_option("--learning-rate", w.learning_rate, "initial learning rate");
}

void add_fingerprint(CLI::App* sub, int& digits, std::vector<std::string>& cutoffs, std::optional<double>& exponent,
                     std::size_t& bins) {
  sub->add_option("--digits", digits, "fingerprint digits");
  sub->add_option("--cutoffs", cutoffs, "sent-count cutoffs, comma separated; 'all' for no cutoff")->delimiter(',');
  sub->add_option("--exponent", exponent, "power-law exponent; fitted from sent counts when absent");
  sub->add_option("--bins", bins, "entropy histogram bins");
}

CLI::Option* input(CLI::App* sub, const std::string& name, fs::path& p, const std::string& desc) {
  return sub->add_option(name, p, desc)->check(CLI::ExistingFile);
}

CLI::Option* input(CLI::App* sub, const std::string& name, std::optional<fs::path>& p, const std::string& desc) {
  return sub->add_option(name, p, desc)->check(CLI::ExistingFile);
}

int fail(std::ostream& err, const std::string& sub, const std::string& msg, int code) {
  err << "chainprofiler" << (sub.empty() ? "" : " " + sub) << ": " << one_line(msg) << "\n";
  return code;
}

}  // namespace

const char* version() { return CHAINPROFILER_VERSION; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Profiles Ethereum addresses and measures how well they can be linked.", "chainprofiler"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  Common common;
  IngestOptions ingest_o;
  FeatureOptions features_o;
  GraphOptions graph_o;
  EmbedOptions embed_o;
  RankOptions rank_o;
  EvaluateOptions evaluate_o;
  TornadoOptions tornado_o;
  FingerprintOptions fingerprint_o;
  PipelineOptions pipeline_o;

  auto* ingest = app.add_subcommand("ingest", "Canonicalize transactions and select active addresses");
  input(ingest, "--transactions", ingest_o.transactions, "transactions .csv or .jsonl");
  input(ingest, "--addresses", ingest_o.addresses, "address,source list");
  input(ingest, "--labels", ingest_o.labels, "address,service_name,category list");
  ingest->add_flag("--fetch", ingest_o.fetch, "fetch histories of --addresses from the explorer API");
  ingest->add_option("--min-sent", ingest_o.min_sent, "minimum sent transactions of an active address");
  ingest->add_option("--out", ingest_o.out, "output directory")->required();

  auto* features = app.add_subcommand("features", "Time-of-day and gas price profiles");
  input(features, "--transactions", features_o.transactions, "transactions .csv or .jsonl")->required();
  input(features, "--addresses", features_o.addresses, "restrict to this address,source list");
  input(features, "--daily-gas", features_o.daily_gas, "daily average gas prices");
  features->add_option("--daily-gas-out", features_o.daily_gas_out, "write the daily averages used");
  features->add_option("--kind", features_o.kind, "all, timeofday, gasprice or concat");
  features->add_option("--min-sent", features_o.min_sent, "minimum sent transactions of a profiled address");
  add_feature_config(features, features_o.config);
  features->add_option("--out", features_o.out, "features.csv")->required();

  auto* graph = app.add_subcommand("graph", "Build and preprocess the transaction graph");
  input(graph, "--transactions", graph_o.transactions, "transactions .csv or .jsonl")->required();
  input(graph, "--exclude", graph_o.exclude, "pairs whose edges are left out");
  graph->add_flag("--raw", graph_o.raw, "skip component and leaf pruning");
  graph->add_option("--removed-out", graph_o.removed_out, "write pruned addresses");
  graph->add_option("--out", graph_o.out, "graph.csv")->required();

  auto* embed = app.add_subcommand("embed", "Train graph embeddings");
  input(embed, "--transactions", embed_o.transactions, "build the graph from transactions");
  input(embed, "--graph", embed_o.graph, "graph.csv");
  embed->add_option("--method", embed_o.method, "diff2vec or role2vec")->required();
  embed->add_flag("--complete", embed_o.complete, "give active addresses off the graph the mean vector");
  embed->add_option("--min-sent", embed_o.min_sent, "active address threshold for --complete");
  add_walk_params(embed, embed_o.params);
  embed->add_option("--out", embed_o.out, "embeddings.csv")->required();

  auto* rank = app.add_subcommand("rank", "Rank candidates by feature distance to a target");
  input(rank, "--features", rank_o.features, "features.csv or embeddings.csv")->required();
  rank->add_option("--target", rank_o.target, "target address")->required();
  rank->add_option("--method", rank_o.method, "feature kind to use");
  input(rank, "--candidates", rank_o.candidates, "address,source list");
  rank->add_option("--top", rank_o.top, "keep the first N candidates; 0 keeps all");
  rank->add_option("--out", rank_o.out, "ranking.csv")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Average rank, AUC and entropy gain on known pairs");
  evaluate->add_option("--features", evaluate_o.features, "features.csv or embeddings.csv; repeatable")
      ->required()
      ->check(CLI::ExistingFile)
      ->delimiter(',');
  input(evaluate, "--pairs", evaluate_o.pairs, "ENS names or pairs.csv")->required();
  evaluate->add_option("--fuse", evaluate_o.fuse, "two methods to combine by harmonic rank")->delimiter(',');
  evaluate->add_option("--resolution", evaluate_o.resolution, "entropy histogram bins");
  evaluate->add_option("--csv-out", evaluate_o.csv_out, "metrics csv; defaults to --out with a .csv extension");
  evaluate->add_option("--out", evaluate_o.out, "metrics.json")->required();

  auto* tornado = app.add_subcommand("tornado", "Link mixer deposits and withdraws");
  input(tornado, "--events", tornado_o.events, "mixer events csv")->required();
  input(tornado, "--transactions", tornado_o.transactions, "transactions .csv or .jsonl")->required();
  tornado->add_option("--gas-scope", tornado_o.gas_scope, "per_pool or global gas price uniqueness");
  tornado->add_option("--features", tornado_o.features, "rank linked withdraws with these features")
      ->check(CLI::ExistingFile)
      ->delimiter(',');
  tornado->add_option("--fuse", tornado_o.fuse, "two methods to combine by harmonic rank")->delimiter(',');
  tornado->add_option("--resolution", tornado_o.resolution, "entropy histogram bins");
  tornado->add_option("--out", tornado_o.out, "output directory")->required();

  auto* fingerprint = app.add_subcommand("fingerprint", "Balance fingerprint change rates and survival");
  input(fingerprint, "--transactions", fingerprint_o.transactions, "transactions .csv or .jsonl")->required();
  add_fingerprint(fingerprint, fingerprint_o.digits, fingerprint_o.cutoffs, fingerprint_o.exponent,
                  fingerprint_o.bins);
  fingerprint->add_option("--histogram-out", fingerprint_o.histogram_out, "fingerprint histogram csv");
  fingerprint->add_option("--out", fingerprint_o.out, "fingerprint_report.json")->required();

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage");
  input(pipeline, "--transactions", pipeline_o.transactions, "transactions .csv or .jsonl")->required();
  input(pipeline, "--pairs", pipeline_o.pairs, "ENS names or pairs.csv");
  input(pipeline, "--events", pipeline_o.events, "mixer events csv");
  input(pipeline, "--labels", pipeline_o.labels, "address,service_name,category list");
  input(pipeline, "--daily-gas", pipeline_o.daily_gas, "daily average gas prices");
  pipeline->add_option("--min-sent", pipeline_o.min_sent, "minimum sent transactions of an active address");
  add_feature_config(pipeline, pipeline_o.config);
  add_walk_params(pipeline, pipeline_o.params);
  pipeline->add_option("--resolution", pipeline_o.resolution, "entropy histogram bins");
  pipeline->add_option("--gas-scope", pipeline_o.gas_scope, "per_pool or global gas price uniqueness");
  add_fingerprint(pipeline, pipeline_o.digits, pipeline_o.cutoffs, pipeline_o.exponent, pipeline_o.bins);
  pipeline->add_option("--out", pipeline_o.out, "output directory")->required();

  for (auto* sub : {ingest, features, graph, embed, rank, evaluate, tornado, fingerprint, pipeline}) {
    add_common(sub, common);
  }
  app.get_subcommand("pipeline")->get_option("--seed")->required();

  std::string name;
  std::vector<std::string> argv = args;
  if (!argv.empty() && !argv.front().empty() && argv.front().front() != '-') {
    name = argv.front();
    if (std::find(kSubcommands.begin(), kSubcommands.end(), name) == kSubcommands.end()) {
      return fail(err, "", "unknown subcommand '" + name + "'", 2);
    }
  }

  try {
    if (!name.empty()) {
      auto it = std::find(argv.begin(), argv.end(), "--config");
      std::optional<std::string> cfg;
      if (it != argv.end() && std::next(it) != argv.end()) cfg = *std::next(it);
      for (const auto& a : argv) {
        if (a.rfind("--config=", 0) == 0) cfg = a.substr(9);
      }
      if (cfg) merge_config(*app.get_subcommand(name), read_config(*cfg), argv);
    }
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (name.empty() ? app.help() : app.get_subcommand(name)->help());
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(err, name, e.what(), 2);
  } catch (const ConfigInvalid& e) {
    return fail(err, name, e.what(), 2);
  }

  const bool randomized = name == "embed" || name == "pipeline";
  if (randomized && !common.seed) {
    common.seed = std::random_device{}();
    out << "seed: " << *common.seed << "\n";
  }
  embed_o.params.seed = pipeline_o.params.seed = common.seed.value_or(0);
  embed_o.params.workers = pipeline_o.params.workers = common.workers;

  OutputSet outputs(name, randomized ? common.seed : std::nullopt, common.workers);
  Context ctx{outputs, out};
  try {
    if (name == "ingest") run_ingest(ingest_o, ctx);
    else if (name == "features") run_features(features_o, ctx);
    else if (name == "graph") run_graph(graph_o, ctx);
    else if (name == "embed") run_embed(embed_o, ctx);
    else if (name == "rank") run_rank(rank_o, ctx);
    else if (name == "evaluate") run_evaluate(evaluate_o, ctx);
    else if (name == "tornado") run_tornado(tornado_o, ctx);
    else if (name == "fingerprint") run_fingerprint(fingerprint_o, ctx);
    else run_pipeline(pipeline_o, ctx);
    return 0;
  } catch (const ConfigInvalid& e) {
    outputs.rollback();
    return fail(err, name, e.what(), 2);
  } catch (const InvalidArgument& e) {
    outputs.rollback();
    return fail(err, name, e.what(), 2);
  } catch (const MalformedRow& e) {
    outputs.rollback();
    return fail(err, name, e.what(), 2);
  } catch (const DuplicateTxHash& e) {
    outputs.rollback();
    return fail(err, name, e.what(), 2);
  } catch (const EmptyFile& e) {
    outputs.rollback();
    return fail(err, name, e.what(), 2);
  } catch (const std::exception& e) {
    outputs.rollback();
    return fail(err, name, e.what(), 1);
  }
}

}  // namespace chainprofiler::cli
