#include "commands.hpp"

#include <chainprofiler/api_client.hpp>
#include <chainprofiler/csv.hpp>
#include <chainprofiler/errors.hpp>
#include <chainprofiler/eval.hpp>
#include <chainprofiler/fingerprint.hpp>
#include <chainprofiler/ingest.hpp>
#include <chainprofiler/tornado.hpp>
#include <chainprofiler/txgraph.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "config.hpp"

namespace chainprofiler::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

void emit(Context& ctx, const fs::path& path, const std::string& contents, const nlohmann::json& details = nullptr) {
  ctx.outputs.write(path, contents, details);
  ctx.log << "wrote " << path.string() << "\n";
}

void emit_json(Context& ctx, const fs::path& path, const Json& j) { emit(ctx, path, j.dump(2) + "\n"); }

std::vector<Transaction> load_corpus(const fs::path& path, Context& ctx) {
  ctx.outputs.add_input(path);
  return ingest::load_transactions(path);
}

Address parse_address_arg(const std::string& flag, const std::string& text) {
  auto a = Address::parse(text);
  if (!a) throw ConfigInvalid(flag + ": '" + text + "' is not an address");
  return *a;
}

std::vector<Address> active_addresses(std::span<const Transaction> corpus, const std::optional<fs::path>& restrict_to,
                                      std::size_t min_sent, Context& ctx) {
  auto active = ingest::filter_active_addresses(corpus, min_sent);
  if (!restrict_to) return active.addresses();
  ctx.outputs.add_input(*restrict_to);
  const auto wanted = ingest::load_address_set(*restrict_to);
  std::vector<Address> out;
  for (const auto& a : active.addresses()) {
    if (wanted.contains(a)) out.push_back(a);
  }
  return out;
}

std::optional<std::size_t> parse_cutoff(const std::string& text) {
  if (text == "all") return std::nullopt;
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v == 0) {
    throw ConfigInvalid("--cutoffs: '" + text + "' is neither a positive integer nor 'all'");
  }
  return v;
}

tornado::GasScope parse_gas_scope(const std::string& text) {
  if (text == "per_pool" || text == "per-pool") return tornado::GasScope::per_pool;
  if (text == "global") return tornado::GasScope::global;
  throw ConfigInvalid("--gas-scope: expected per_pool or global, got '" + text + "'");
}

embeddings::Method parse_method(const std::string& text) {
  if (text == "diff2vec") return embeddings::Method::diff2vec;
  if (text == "role2vec") return embeddings::Method::role2vec;
  throw ConfigInvalid("--method: expected diff2vec or role2vec, got '" + text + "'");
}

// --- features --------------------------------------------------------------

struct Profiles {
  std::vector<profiles::FeatureVector> timeofday;
  std::vector<profiles::FeatureVector> gasprice;
  profiles::DailyGasSeries series;
};

Profiles build_feature_sets(std::span<const Transaction> corpus, std::span<const Address> addresses,
                            const profiles::FeatureConfig& cfg, const std::optional<fs::path>& daily_gas,
                            Context& ctx) {
  Profiles p;
  if (daily_gas) {
    ctx.outputs.add_input(*daily_gas);
    std::ifstream in(*daily_gas, std::ios::binary);
    if (!in) throw IoError("cannot open " + daily_gas->string());
    p.series = profiles::read_daily_gas_csv(in, daily_gas->string());
  } else {
    p.series = profiles::daily_average_gas_price(corpus);
  }
  p.timeofday = profiles::build_profiles(corpus, addresses, profiles::FeatureKind::timeofday, cfg);
  p.gasprice = profiles::build_profiles(corpus, addresses, profiles::FeatureKind::gasprice, cfg, &p.series);
  return p;
}

// --- feature files ---------------------------------------------------------

struct NamedFeatures {
  std::string method;
  eval::FeatureMap features;
};

std::vector<NamedFeatures> load_feature_file(const fs::path& path, Context& ctx) {
  ctx.outputs.add_input(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  in.clear();
  in.seekg(0);
  std::vector<NamedFeatures> out;
  if (header.rfind("address,kind", 0) == 0) {
    std::map<std::string, std::vector<profiles::FeatureVector>> by_kind;
    for (auto& f : profiles::read_features_csv(in, path.string())) by_kind[profiles::to_string(f.kind)].push_back(f);
    for (auto& [kind, rows] : by_kind) out.push_back({kind, eval::make_feature_map(rows)});
    return out;
  }
  auto table = embeddings::read_embeddings_csv(in, path.string());
  auto name = path.stem().string();
  if (name.rfind("embeddings_", 0) == 0) name = name.substr(11);
  out.push_back({name, eval::make_feature_map(table)});
  return out;
}

std::vector<NamedFeatures> load_feature_files(const std::vector<fs::path>& paths, Context& ctx) {
  std::vector<NamedFeatures> all;
  for (const auto& p : paths) {
    for (auto& nf : load_feature_file(p, ctx)) {
      auto clash = std::find_if(all.begin(), all.end(), [&](const NamedFeatures& x) { return x.method == nf.method; });
      if (clash != all.end()) throw ConfigInvalid("--features: method '" + nf.method + "' appears twice");
      all.push_back(std::move(nf));
    }
  }
  return all;
}

eval::FeatureMap restrict_to(const eval::FeatureMap& m, const eval::FeatureMap& other) {
  eval::FeatureMap out;
  for (const auto& [a, v] : m) {
    if (other.count(a)) out.emplace(a, v);
  }
  return out;
}

bool same_universe(const eval::FeatureMap& a, const eval::FeatureMap& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) { return x.first == y.first; });
}

const NamedFeatures& find_method(const std::vector<NamedFeatures>& sets, const std::string& name) {
  for (const auto& s : sets) {
    if (s.method == name) return s;
  }
  throw ConfigInvalid("--fuse: no features for method '" + name + "'");
}

void check_fuse(const std::vector<std::string>& fuse) {
  if (!fuse.empty() && (fuse.size() != 2 || fuse[0] == fuse[1])) {
    throw ConfigInvalid("--fuse: expected two distinct method names");
  }
}

// --- ENS-style evaluation --------------------------------------------------

eval::EvaluationReport evaluate_pairs(const std::vector<NamedFeatures>& sets,
                                      std::span<const ingest::GroundTruthPair> pairs,
                                      const std::vector<std::string>& fuse, std::optional<std::size_t> resolution) {
  eval::EvaluationReport report;
  std::map<std::string, std::vector<eval::RankedResult>> results;
  for (const auto& s : sets) {
    auto r = eval::rank_pairs(s.features, pairs);
    report.methods.push_back(eval::summarize(s.method, r, resolution));
    results.emplace(s.method, std::move(r));
  }
  if (!fuse.empty()) {
    const auto& a = find_method(sets, fuse[0]);
    const auto& b = find_method(sets, fuse[1]);
    std::vector<eval::RankedResult> fused;
    if (same_universe(a.features, b.features)) {
      fused = eval::fuse_results(results.at(a.method), results.at(b.method));
    } else {
      const auto ra = eval::rank_pairs(restrict_to(a.features, b.features), pairs);
      const auto rb = eval::rank_pairs(restrict_to(b.features, a.features), pairs);
      fused = eval::fuse_results(ra, rb);
    }
    report.methods.push_back(eval::summarize(a.method + "+" + b.method, fused, resolution));
  }
  return report;
}

// --- mixer evaluation ------------------------------------------------------

std::vector<eval::RankedResult> rank_mixer_links(const eval::FeatureMap& features,
                                                 std::span<const tornado::TornadoEvent> events,
                                                 std::span<const tornado::Link> links, tornado::Window window) {
  std::vector<eval::RankedResult> out;
  std::vector<Address> candidates;
  for (const auto& l : links) {
    const auto& target = l.withdraw.address;
    const auto& truth = l.deposit.address;
    if (target == truth || !features.count(target) || !features.count(truth)) continue;
    candidates.clear();
    for (const auto& c : tornado::candidate_deposits(events, l.withdraw, window)) {
      if (c != target && features.count(c)) candidates.push_back(c);
    }
    if (std::find(candidates.begin(), candidates.end(), truth) == candidates.end()) continue;
    out.push_back(eval::rank_candidates(features, target, candidates, truth));
  }
  return out;
}

double mean_candidate_count(std::span<const tornado::TornadoEvent> events, std::span<const tornado::Link> links,
                            tornado::Window window) {
  if (links.empty()) return 0;
  double sum = 0;
  for (const auto& l : links) sum += static_cast<double>(tornado::candidate_deposits(events, l.withdraw, window).size());
  return sum / static_cast<double>(links.size());
}

Json evaluate_mixer(const std::vector<NamedFeatures>& sets, std::span<const tornado::TornadoEvent> events,
                    std::span<const tornado::Link> links, const std::vector<std::string>& fuse,
                    std::optional<std::size_t> resolution) {
  const auto past = tornado::windowed_links(links, tornado::Window::past);
  const double past_candidates = mean_candidate_count(events, past, tornado::Window::past);
  Json windows = Json::array();
  for (auto w : {tornado::Window::day, tornado::Window::week, tornado::Window::past}) {
    const auto in_window = tornado::windowed_links(links, w);
    std::optional<double> correction;
    const double window_candidates = mean_candidate_count(events, in_window, w);
    if (w != tornado::Window::past && !past.empty()) {
      const double miss = 1.0 - static_cast<double>(in_window.size()) / static_cast<double>(past.size());
      correction = eval::rank_correction(static_cast<std::size_t>(std::llround(past_candidates)),
                                         static_cast<std::size_t>(std::llround(window_candidates)), miss);
    }
    eval::EvaluationReport report;
    std::map<std::string, std::vector<eval::RankedResult>> results;
    for (const auto& s : sets) {
      auto r = rank_mixer_links(s.features, events, in_window, w);
      auto m = eval::summarize(s.method, r, resolution);
      m.rank_correction = correction;
      report.methods.push_back(std::move(m));
      results.emplace(s.method, std::move(r));
    }
    if (!fuse.empty()) {
      const auto& a = find_method(sets, fuse[0]);
      const auto& b = find_method(sets, fuse[1]);
      const auto fa = restrict_to(a.features, b.features);
      const auto fb = restrict_to(b.features, a.features);
      auto fused = eval::fuse_results(rank_mixer_links(fa, events, in_window, w),
                                      rank_mixer_links(fb, events, in_window, w));
      auto m = eval::summarize(a.method + "+" + b.method, fused, resolution);
      m.rank_correction = correction;
      report.methods.push_back(std::move(m));
    }
    Json entry;
    entry["window"] = tornado::to_string(w);
    entry["links"] = in_window.size();
    entry["mean_candidates"] = window_candidates;
    entry["methods"] = Json::parse(report.to_json()["methods"].dump());
    windows.push_back(std::move(entry));
  }
  return windows;
}

// --- tornado outputs -------------------------------------------------------

struct MixerAnalysis {
  std::vector<tornado::TornadoEvent> events;
  std::vector<tornado::Link> links;
};

void write_mixer_outputs(const MixerAnalysis& m, const fs::path& dir, Context& ctx) {
  emit(ctx, dir / "links.csv", render([&](std::ostream& s) { tornado::write_links_csv(s, m.links); }));
  const auto series = tornado::anonymity_series(m.events, m.links);
  emit(ctx, dir / "anonymity_series.csv", render([&](std::ostream& s) { tornado::write_series_csv(s, series); }));
  emit(ctx, dir / "reuse_histogram.csv", render([&](std::ostream& s) {
         csv::write_row(s, {"withdraws", "addresses"});
         for (const auto& [k, v] : tornado::reuse_histogram(m.events)) {
           csv::write_row(s, {std::to_string(k), std::to_string(v)});
         }
       }));
  emit(ctx, dir / "mixing_delays.csv", render([&](std::ostream& s) {
         csv::write_row(s, {"days", "links"});
         for (const auto& [k, v] : tornado::mixing_delay_distribution(m.links)) {
           csv::write_row(s, {std::to_string(k), std::to_string(v)});
         }
       }));
  emit(ctx, dir / "heuristic_counts.csv", render([&](std::ostream& s) {
         csv::write_row(s, {"mixer", "h1", "h2", "h3", "linked", "withdraws"});
         for (const auto& [mixer, c] : tornado::linked_withdraw_counts(m.events, m.links)) {
           csv::write_row(s, {tornado::to_string(mixer), std::to_string(c.by_heuristic[0]),
                              std::to_string(c.by_heuristic[1]), std::to_string(c.by_heuristic[2]),
                              std::to_string(c.total), std::to_string(c.withdraws)});
         }
       }));
  for (auto w : {tornado::Window::day, tornado::Window::week, tornado::Window::past}) {
    const auto truth = tornado::build_ground_truth(m.links, w);
    emit(ctx, dir / ("ground_truth_" + tornado::to_string(w) + ".csv"),
         render([&](std::ostream& s) { ingest::write_pairs_csv(s, truth); }));
  }
  std::vector<ingest::GroundTruthPair> excluded;
  for (const auto& [a, b] : tornado::heuristic3_edges(m.links)) {
    excluded.push_back(ingest::GroundTruthPair::make(a, b, ingest::PairOrigin::tornado_heuristic, "h3"));
  }
  emit(ctx, dir / "excluded_edges.csv", render([&](std::ostream& s) { ingest::write_pairs_csv(s, excluded); }));
}

MixerAnalysis analyze_mixer(const fs::path& events_path, std::span<const Transaction> corpus,
                            const std::string& gas_scope, Context& ctx) {
  ctx.outputs.add_input(events_path);
  MixerAnalysis m;
  m.events = tornado::load_events(events_path);
  m.links = tornado::all_heuristics(m.events, corpus, parse_gas_scope(gas_scope));
  return m;
}

// --- fingerprint -----------------------------------------------------------

Json fingerprint_report(std::span<const Transaction> corpus, int digits, const std::vector<std::string>& cutoff_text,
                        std::optional<double> exponent, std::size_t bins,
                        std::vector<std::size_t>* histogram = nullptr) {
  if (digits < 1 || digits > 18) throw ConfigInvalid("--digits: must be in [1, 18]");
  if (bins == 0) throw ConfigInvalid("--bins: must be positive");
  if (exponent && *exponent <= 1) throw ConfigInvalid("--exponent: must exceed 1");
  std::vector<std::optional<std::size_t>> cutoffs;
  for (const auto& c : cutoff_text) cutoffs.push_back(parse_cutoff(c));

  const auto ledger = fingerprint::replay_balances(corpus);
  Json report;
  report["digits"] = digits;
  std::optional<double> k = exponent;
  std::string k_source = exponent ? "given" : "none";
  if (!k) {
    std::vector<double> counts;
    for (const auto& [_, n] : ingest::sent_counts(corpus)) counts.push_back(static_cast<double>(n));
    try {
      k = fingerprint::fit_power_law(counts);
      k_source = "fitted";
    } catch (const DegenerateSample&) {
    }
  }
  if (k && *k <= 1) k.reset();
  report["exponent"] = k ? Json(*k) : Json(nullptr);
  report["exponent_source"] = k ? k_source : "none";
  report["ledger_approximate"] = ledger.approximate;
  const auto rows = fingerprint::cutoff_report(ledger, digits, cutoffs, k);
  report["cutoffs"] = Json::parse(fingerprint::to_json(rows).dump());

  std::vector<Wei> balances;
  for (const auto& [_, b] : ledger.consistent_balances()) balances.push_back(b);
  Json entropy;
  entropy["balances"] = balances.size();
  entropy["bins"] = bins;
  if (!balances.empty()) {
    const auto e = fingerprint::fingerprint_entropy(balances, digits, bins);
    entropy["entropy_bits"] = e.entropy_bits;
    entropy["gain_bits"] = e.gain_bits;
    if (histogram) *histogram = e.histogram;
  } else {
    entropy["entropy_bits"] = nullptr;
    entropy["gain_bits"] = nullptr;
  }
  report["entropy"] = std::move(entropy);
  return report;
}

std::string histogram_csv(const std::vector<std::size_t>& h) {
  return render([&](std::ostream& s) {
    csv::write_row(s, {"bin", "balances"});
    for (std::size_t i = 0; i < h.size(); ++i) csv::write_row(s, {std::to_string(i), std::to_string(h[i])});
  });
}

std::string address_set_csv(std::span<const Address> addresses, const ingest::AddressSet* tags) {
  return render([&](std::ostream& s) {
    csv::write_row(s, {"address", "source"});
    for (const auto& a : addresses) {
      const auto src = tags ? tags->source(a) : std::nullopt;
      csv::write_row(s, {a.str(), ingest::to_string(src.value_or(ingest::Source::other))});
    }
  });
}

std::string exposure_csv(const std::map<std::string, double>& exposure) {
  return render([&](std::ostream& s) {
    csv::write_row(s, {"category", "share"});
    for (const auto& [cat, share] : exposure) csv::write_row(s, {cat, number(share)});
  });
}

txgraph::Preprocessed graph_of(std::span<const Transaction> corpus, const std::set<txgraph::AddressPair>& exclude) {
  return txgraph::preprocess(txgraph::build_graph(corpus, exclude));
}

}  // namespace

void run_ingest(const IngestOptions& o, Context& ctx) {
  if (!o.transactions && !o.fetch) throw ConfigInvalid("--transactions: required unless --fetch is given");
  if (o.fetch && !o.addresses) throw ConfigInvalid("--addresses: required with --fetch");
  if (o.min_sent == 0) throw ConfigInvalid("--min-sent: must be at least 1");

  std::vector<Transaction> corpus;
  if (o.transactions) corpus = load_corpus(*o.transactions, ctx);
  std::optional<ingest::AddressSet> tags;
  if (o.addresses) {
    ctx.outputs.add_input(*o.addresses);
    tags = ingest::load_address_set(*o.addresses);
  }
  if (o.fetch) {
    ingest::ApiClient client(ingest::ApiConfig::from_env());
    for (const auto& [a, _] : *tags) {
      auto history = client.fetch_address_history(a);
      corpus.insert(corpus.end(), history.begin(), history.end());
    }
    ctx.log << "api requests: " << client.http_requests() << "\n";
    ingest::merge_duplicates(corpus);
  }

  auto active = ingest::filter_active_addresses(corpus, o.min_sent).addresses();
  if (tags) std::erase_if(active, [&](const Address& a) { return !tags->contains(a); });

  emit(ctx, o.out / "transactions.csv", render([&](std::ostream& s) { ingest::write_transactions_csv(s, corpus); }));
  emit(ctx, o.out / "active_addresses.csv", address_set_csv(active, tags ? &*tags : nullptr));
  const auto series = profiles::daily_average_gas_price(corpus);
  emit(ctx, o.out / "daily_gas.csv", render([&](std::ostream& s) { profiles::write_daily_gas_csv(s, series); }));
  if (o.labels) {
    ctx.outputs.add_input(*o.labels);
    const auto labels = ingest::load_service_labels(*o.labels);
    ingest::AddressSet set;
    for (const auto& a : active) set.insert(a);
    emit(ctx, o.out / "service_exposure.csv", exposure_csv(ingest::service_exposure(set, labels, corpus)));
  }
}

void run_features(const FeatureOptions& o, Context& ctx) {
  o.config.validate();
  if (o.min_sent == 0) throw ConfigInvalid("--min-sent: must be at least 1");
  if (o.kind != "all" && o.kind != "timeofday" && o.kind != "gasprice" && o.kind != "concat") {
    throw ConfigInvalid("--kind: expected all, timeofday, gasprice or concat");
  }
  const auto corpus = load_corpus(o.transactions, ctx);
  const auto addresses = active_addresses(corpus, o.addresses, o.min_sent, ctx);
  auto p = build_feature_sets(corpus, addresses, o.config, o.daily_gas, ctx);
  std::vector<profiles::FeatureVector> rows;
  if (o.kind == "all" || o.kind == "timeofday") rows.insert(rows.end(), p.timeofday.begin(), p.timeofday.end());
  if (o.kind == "all" || o.kind == "gasprice") rows.insert(rows.end(), p.gasprice.begin(), p.gasprice.end());
  if (o.kind == "concat") {
    const std::vector<std::vector<profiles::FeatureVector>> parts = {p.timeofday, p.gasprice};
    rows = profiles::concat_features(parts);
  }
  emit(ctx, o.out, render([&](std::ostream& s) { profiles::write_features_csv(s, rows); }));
  if (o.daily_gas_out) {
    emit(ctx, *o.daily_gas_out, render([&](std::ostream& s) { profiles::write_daily_gas_csv(s, p.series); }));
  }
}

void run_graph(const GraphOptions& o, Context& ctx) {
  const auto corpus = load_corpus(o.transactions, ctx);
  std::set<txgraph::AddressPair> exclude;
  if (o.exclude) {
    ctx.outputs.add_input(*o.exclude);
    for (const auto& p : ingest::load_pairs(*o.exclude)) exclude.insert(txgraph::make_pair(p.id_a, p.id_b));
  }
  auto g = txgraph::build_graph(corpus, exclude);
  std::vector<Address> removed;
  if (!o.raw) {
    auto pre = txgraph::preprocess(g);
    g = std::move(pre.graph);
    removed = std::move(pre.removed);
  }
  ctx.log << "graph: " << g.node_count() << " nodes, " << g.edge_count() << " edges\n";
  emit(ctx, o.out, render([&](std::ostream& s) { txgraph::write_edges_csv(s, g); }));
  if (o.removed_out) emit(ctx, *o.removed_out, address_set_csv(removed, nullptr));
}

void run_embed(const EmbedOptions& o, Context& ctx) {
  o.params.validate();
  const auto method = parse_method(o.method);
  if (o.transactions.has_value() == o.graph.has_value()) {
    throw ConfigInvalid("--graph: give exactly one of --graph and --transactions");
  }
  if (o.complete && !o.transactions) throw ConfigInvalid("--complete: requires --transactions");
  std::vector<Transaction> corpus;
  txgraph::TransactionGraph g;
  if (o.transactions) {
    corpus = load_corpus(*o.transactions, ctx);
    g = graph_of(corpus, {}).graph;
  } else {
    ctx.outputs.add_input(*o.graph);
    std::ifstream in(*o.graph, std::ios::binary);
    if (!in) throw IoError("cannot open " + o.graph->string());
    g = txgraph::read_edges_csv(in, o.graph->string());
  }
  auto table = embeddings::embed_graph(g, method, o.params);
  if (o.complete) {
    const auto active = ingest::filter_active_addresses(corpus, o.min_sent).addresses();
    table = embeddings::complete_embeddings(std::move(table), active);
  }
  emit(ctx, o.out, render([&](std::ostream& s) { embeddings::write_embeddings_csv(s, table); }), table.metadata());
}

void run_rank(const RankOptions& o, Context& ctx) {
  const auto target = parse_address_arg("--target", o.target);
  const auto sets = load_feature_file(o.features, ctx);
  const NamedFeatures* chosen = nullptr;
  if (o.method) {
    for (const auto& s : sets) {
      if (s.method == *o.method) chosen = &s;
    }
    if (!chosen) throw ConfigInvalid("--method: no features for '" + *o.method + "' in " + o.features.string());
  } else if (sets.size() == 1) {
    chosen = &sets.front();
  } else {
    throw ConfigInvalid("--method: " + o.features.string() + " holds several kinds; pick one");
  }
  std::vector<Address> candidates;
  if (o.candidates) {
    ctx.outputs.add_input(*o.candidates);
    for (const auto& a : ingest::load_address_set(*o.candidates).addresses()) {
      if (a != target) candidates.push_back(a);
    }
  } else {
    for (const auto& [a, _] : chosen->features) {
      if (a != target) candidates.push_back(a);
    }
  }
  auto ranked = eval::order_candidates(chosen->features, target, candidates);
  if (o.top && ranked.size() > o.top) ranked.resize(o.top);
  emit(ctx, o.out, render([&](std::ostream& s) {
         csv::write_row(s, {"rank", "address", "distance"});
         for (std::size_t i = 0; i < ranked.size(); ++i) {
           csv::write_row(s, {std::to_string(i + 1), ranked[i].address.str(), number(ranked[i].distance)});
         }
       }));
}

void run_evaluate(const EvaluateOptions& o, Context& ctx) {
  check_fuse(o.fuse);
  const auto sets = load_feature_files(o.features, ctx);
  ctx.outputs.add_input(o.pairs);
  const auto pairs = ingest::load_pairs(o.pairs);
  const auto report = evaluate_pairs(sets, pairs, o.fuse, o.resolution);
  emit(ctx, o.out, Json::parse(report.to_json().dump()).dump(2) + "\n");
  auto csv_path = o.csv_out.value_or(fs::path(o.out).replace_extension(".csv"));
  emit(ctx, csv_path, render([&](std::ostream& s) { report.write_csv(s); }));
}

void run_tornado(const TornadoOptions& o, Context& ctx) {
  check_fuse(o.fuse);
  const auto corpus = load_corpus(o.transactions, ctx);
  const auto m = analyze_mixer(o.events, corpus, o.gas_scope, ctx);
  const auto sets = load_feature_files(o.features, ctx);
  write_mixer_outputs(m, o.out, ctx);
  if (!sets.empty()) {
    Json j;
    j["windows"] = evaluate_mixer(sets, m.events, m.links, o.fuse, o.resolution);
    emit_json(ctx, o.out / "tornado_metrics.json", j);
  }
}

void run_fingerprint(const FingerprintOptions& o, Context& ctx) {
  const auto corpus = load_corpus(o.transactions, ctx);
  std::vector<std::size_t> histogram;
  const auto report = fingerprint_report(corpus, o.digits, o.cutoffs, o.exponent, o.bins, &histogram);
  emit_json(ctx, o.out, report);
  if (o.histogram_out) emit(ctx, *o.histogram_out, histogram_csv(histogram));
}

void run_pipeline(const PipelineOptions& o, Context& ctx) {
  o.config.validate();
  o.params.validate();
  if (o.min_sent == 0) throw ConfigInvalid("--min-sent: must be at least 1");

  const auto corpus = load_corpus(o.transactions, ctx);
  const auto active = ingest::filter_active_addresses(corpus, o.min_sent).addresses();
  if (active.empty()) throw EmptyInput("no address sends at least " + std::to_string(o.min_sent) + " transactions");
  const auto dir = o.out;
  emit(ctx, dir / "active_addresses.csv", address_set_csv(active, nullptr));

  auto p = build_feature_sets(corpus, active, o.config, o.daily_gas, ctx);
  emit(ctx, dir / "daily_gas.csv", render([&](std::ostream& s) { profiles::write_daily_gas_csv(s, p.series); }));
  const std::vector<std::vector<profiles::FeatureVector>> parts = {p.timeofday, p.gasprice};
  const auto both = profiles::concat_features(parts);
  emit(ctx, dir / "features.csv", render([&](std::ostream& s) {
         std::vector<profiles::FeatureVector> rows = p.timeofday;
         rows.insert(rows.end(), p.gasprice.begin(), p.gasprice.end());
         profiles::write_features_csv(s, rows);
       }));

  const auto pre = graph_of(corpus, {});
  emit(ctx, dir / "graph.csv", render([&](std::ostream& s) { txgraph::write_edges_csv(s, pre.graph); }));

  auto embed = [&](const txgraph::TransactionGraph& g, embeddings::Method method) {
    return embeddings::complete_embeddings(embeddings::embed_graph(g, method, o.params), active);
  };
  const auto d2v = embed(pre.graph, embeddings::Method::diff2vec);
  const auto r2v = embed(pre.graph, embeddings::Method::role2vec);
  emit(ctx, dir / "embeddings_diff2vec.csv", render([&](std::ostream& s) { embeddings::write_embeddings_csv(s, d2v); }),
       d2v.metadata());
  emit(ctx, dir / "embeddings_role2vec.csv", render([&](std::ostream& s) { embeddings::write_embeddings_csv(s, r2v); }),
       r2v.metadata());

  auto feature_sets = [&](const embeddings::EmbeddingTable& a, const embeddings::EmbeddingTable& b) {
    std::vector<NamedFeatures> sets = {{"timeofday", eval::make_feature_map(p.timeofday)},
                                       {"gasprice", eval::make_feature_map(p.gasprice)},
                                       {"timeofday+gasprice", eval::make_feature_map(both)},
                                       {"diff2vec", eval::make_feature_map(a)},
                                       {"role2vec", eval::make_feature_map(b)}};
    auto common = sets.front().features;
    for (const auto& s : sets) common = restrict_to(common, s.features);
    for (auto& s : sets) s.features = restrict_to(s.features, common);
    return sets;
  };
  const std::vector<std::string> fuse = {"diff2vec", "role2vec"};

  Json metrics;
  Json dataset;
  dataset["transactions"] = corpus.size();
  dataset["active_addresses"] = active.size();
  dataset["graph_nodes"] = pre.graph.node_count();
  dataset["graph_edges"] = pre.graph.edge_count();
  dataset["pruned_nodes"] = pre.removed.size();
  const auto sets = feature_sets(d2v, r2v);
  dataset["evaluated_addresses"] = sets.front().features.size();

  if (o.pairs) {
    ctx.outputs.add_input(*o.pairs);
    const auto pairs = ingest::load_pairs(*o.pairs);
    dataset["pairs"] = pairs.size();
    const auto report = evaluate_pairs(sets, pairs, fuse, o.resolution);
    metrics["methods"] = Json::parse(report.to_json()["methods"].dump());
    emit(ctx, dir / "metrics.csv", render([&](std::ostream& s) { report.write_csv(s); }));
  } else {
    metrics["methods"] = Json::array();
  }
  metrics["dataset"] = std::move(dataset);

  if (o.labels) {
    ctx.outputs.add_input(*o.labels);
    const auto labels = ingest::load_service_labels(*o.labels);
    ingest::AddressSet set;
    for (const auto& a : active) set.insert(a);
    const auto exposure = ingest::service_exposure(set, labels, corpus);
    emit(ctx, dir / "service_exposure.csv", exposure_csv(exposure));
    Json e;
    for (const auto& [cat, share] : exposure) e[cat] = share;
    metrics["service_exposure"] = std::move(e);
  }

  if (o.events) {
    const auto m = analyze_mixer(*o.events, corpus, o.gas_scope, ctx);
    write_mixer_outputs(m, dir / "tornado", ctx);
    const auto excluded = tornado::heuristic3_edges(m.links);
    std::vector<NamedFeatures> mixer_sets;
    if (excluded.empty()) {
      mixer_sets = sets;
    } else {
      const auto g = graph_of(corpus, excluded);
      mixer_sets = feature_sets(embed(g.graph, embeddings::Method::diff2vec), embed(g.graph, embeddings::Method::role2vec));
    }
    Json t;
    t["links"] = m.links.size();
    t["excluded_edges"] = excluded.size();
    t["windows"] = evaluate_mixer(mixer_sets, m.events, m.links, fuse, o.resolution);
    metrics["tornado"] = std::move(t);
  }
  emit_json(ctx, dir / "metrics.json", metrics);

  std::vector<std::size_t> histogram;
  const auto report = fingerprint_report(corpus, o.digits, o.cutoffs, o.exponent, o.bins, &histogram);
  emit_json(ctx, dir / "fingerprint_report.json", report);
  emit(ctx, dir / "fingerprint_histogram.csv", histogram_csv(histogram));
}

}  // namespace chainprofiler::cli
