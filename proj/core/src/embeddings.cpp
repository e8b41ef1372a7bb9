#include "chainprofiler/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <thread>

#include <nlohmann/json.hpp>

#include "chainprofiler/csv.hpp"
#include "chainprofiler/errors.hpp"
#include "chainprofiler/rng.hpp"

namespace chainprofiler::embeddings {
namespace {

// RNG stream identifiers for derive_seed.
constexpr std::uint64_t kDiffusionStream = 1;
constexpr std::uint64_t kRoleStream = 2;
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kTrainStream = 4;

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<NodeId> euler_tour(NodeId root, const std::vector<std::pair<NodeId, NodeId>>& tree_edges) {
  // children in insertion order
  std::map<NodeId, std::vector<NodeId>> children;
  for (const auto& [parent, child] : tree_edges) children[parent].push_back(child);
  std::vector<NodeId> tour{root};
  struct Frame {
    NodeId node;
    std::size_t next_child;
  };
  std::vector<Frame> stack{{root, 0}};
  while (!stack.empty()) {
    auto& top = stack.back();
    auto it = children.find(top.node);
    if (it != children.end() && top.next_child < it->second.size()) {
      const NodeId child = it->second[top.next_child++];
      tour.push_back(child);
      stack.push_back({child, 0});
    } else {
      stack.pop_back();
      if (!stack.empty()) tour.push_back(stack.back().node);
    }
  }
  return tour;
}

struct PlainAccess {
  static float load(const float& x) { return x; }
  static void store(float& x, float v) { x = v; }
};

// Hogwild-style sharing: element-wise relaxed atomics, no locking.
struct RelaxedAccess {
  static float load(const float& x) {
    return std::atomic_ref<float>(const_cast<float&>(x)).load(std::memory_order_relaxed);
  }
  static void store(float& x, float v) { std::atomic_ref<float>(x).store(v, std::memory_order_relaxed); }
};

struct Model {
  int dim;
  std::vector<float> input;   // center_vocabulary x dim
  std::vector<float> output;  // context_vocabulary x dim
};

template <typename Access>
void train_pair(Model& m, std::uint32_t center, std::uint32_t context, const AliasTable& noise, Rng& rng,
                int negatives, float alpha, std::vector<float>& in_copy, std::vector<float>& grad) {
  const auto dim = static_cast<std::size_t>(m.dim);
  float* in = m.input.data() + static_cast<std::size_t>(center) * dim;
  for (std::size_t k = 0; k < dim; ++k) in_copy[k] = Access::load(in[k]);
  std::fill(grad.begin(), grad.end(), 0.0f);
  for (int d = 0; d <= negatives; ++d) {
    std::uint32_t target = context;
    float label = 1.0f;
    if (d > 0) {
      target = static_cast<std::uint32_t>(noise.sample(rng));
      if (target == context) continue;
      label = 0.0f;
    }
    float* out = m.output.data() + static_cast<std::size_t>(target) * dim;
    float dot = 0.0f;
    for (std::size_t k = 0; k < dim; ++k) dot += in_copy[k] * Access::load(out[k]);
    const float clipped = std::clamp(dot, -30.0f, 30.0f);
    const float g = (label - 1.0f / (1.0f + std::exp(-clipped))) * alpha;
    for (std::size_t k = 0; k < dim; ++k) {
      const float o = Access::load(out[k]);
      grad[k] += g * o;
      Access::store(out[k], o + g * in_copy[k]);
    }
  }
  for (std::size_t k = 0; k < dim; ++k) Access::store(in[k], Access::load(in[k]) + grad[k]);
}

template <typename Access>
void train_range(Model& m, const TrainingCorpus& corpus, const WalkParams& params, const AliasTable& noise,
                 std::uint64_t worker, int stride, std::atomic<std::uint64_t>& processed, std::uint64_t total) {
  Rng rng(derive_seed(params.seed, kTrainStream, worker, 0));
  std::vector<float> in_copy(static_cast<std::size_t>(m.dim)), grad(static_cast<std::size_t>(m.dim));
  const auto lr = static_cast<double>(params.learning_rate);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (std::size_t s = worker; s < corpus.centers.size(); s += static_cast<std::size_t>(stride)) {
      const auto& centers = corpus.centers[s];
      const auto& contexts = corpus.contexts[s];
      const auto len = static_cast<std::ptrdiff_t>(centers.size());
      for (std::ptrdiff_t i = 0; i < len; ++i) {
        const auto done = processed.fetch_add(1, std::memory_order_relaxed);
        const double progress = static_cast<double>(done) / static_cast<double>(total + 1);
        const auto alpha = static_cast<float>(lr * std::max(1.0 - progress, 1e-4));
        const auto lo = std::max<std::ptrdiff_t>(0, i - params.window);
        const auto hi = std::min<std::ptrdiff_t>(len - 1, i + params.window);
        for (auto j = lo; j <= hi; ++j) {
          if (j == i) continue;
          train_pair<Access>(m, centers[static_cast<std::size_t>(i)], contexts[static_cast<std::size_t>(j)], noise,
                             rng, params.negatives, alpha, in_copy, grad);
        }
      }
    }
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void WalkParams::validate() const {
  if (dim < 1) throw InvalidArgument("dim must be at least 1");
  if (walks_per_node < 1 || cover_size < 1 || walk_length < 1 || window < 1 || negatives < 1 || epochs < 1) {
    throw InvalidArgument("walk and training counts must be at least 1");
  }
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw InvalidArgument("learning rate must be positive");
  if (workers < 1) throw InvalidArgument("workers must be at least 1");
}

nlohmann::json WalkParams::to_json() const {
  return {{"dim", dim},         {"walks_per_node", walks_per_node}, {"cover_size", cover_size},
          {"walk_length", walk_length}, {"window", window},       {"negatives", negatives},
          {"epochs", epochs},   {"learning_rate", learning_rate},   {"seed", seed},
          {"workers", workers}};
}

DiffusionWalks generate_diffusion_sequences(const txgraph::TransactionGraph& g, const WalkParams& params) {
  params.validate();
  const auto n = g.node_count();
  std::vector<std::size_t> component_size(n, 0);
  for (const auto& comp : g.components()) {
    for (NodeId u : comp) component_size[u] = comp.size();
  }

  const auto walks = static_cast<std::size_t>(params.walks_per_node);
  DiffusionWalks out;
  out.sequences.resize(walks * n);
  for (NodeId u = 0; u < n; ++u) {
    if (component_size[u] < static_cast<std::size_t>(params.cover_size)) ++out.clamped_roots;
  }

  parallel_for(walks * n, params.workers, [&](std::size_t idx) {
    const auto walk = idx / n;
    const auto root = static_cast<NodeId>(idx % n);
    Rng rng(derive_seed(params.seed, kDiffusionStream, root, walk));
    const auto target = std::min(component_size[root], static_cast<std::size_t>(params.cover_size));
    std::vector<NodeId> members{root};
    std::vector<std::pair<NodeId, NodeId>> tree;
    while (members.size() < target) {
      const NodeId u = members[rng.index(members.size())];
      const auto nbrs = g.neighbors(u);
      const NodeId v = nbrs[rng.index(nbrs.size())];
      if (std::find(members.begin(), members.end(), v) == members.end()) {
        members.push_back(v);
        tree.emplace_back(u, v);
      }
    }
    out.sequences[idx] = euler_tour(root, tree);
  });
  return out;
}

std::uint32_t role_token(std::size_t degree) {
  if (degree == 0) return 0;
  return static_cast<std::uint32_t>(std::bit_width(degree) - 1);
}

RoleWalks generate_role_sequences(const txgraph::TransactionGraph& g, const WalkParams& params) {
  params.validate();
  const auto n = g.node_count();
  const auto walks = static_cast<std::size_t>(params.walks_per_node);
  RoleWalks out;
  out.nodes.resize(walks * n);
  out.roles.resize(walks * n);
  for (NodeId u = 0; u < n; ++u) out.role_vocabulary = std::max(out.role_vocabulary, role_token(g.degree(u)) + 1);

  parallel_for(walks * n, params.workers, [&](std::size_t idx) {
    const auto walk = idx / n;
    const auto start = static_cast<NodeId>(idx % n);
    Rng rng(derive_seed(params.seed, kRoleStream, start, walk));
    auto& seq = out.nodes[idx];
    seq.push_back(start);
    while (seq.size() < static_cast<std::size_t>(params.walk_length)) {
      const auto nbrs = g.neighbors(seq.back());
      if (nbrs.empty()) break;
      seq.push_back(nbrs[rng.index(nbrs.size())]);
    }
    auto& roles = out.roles[idx];
    roles.reserve(seq.size());
    for (NodeId u : seq) roles.push_back(role_token(g.degree(u)));
  });
  return out;
}

TrainingCorpus TrainingCorpus::from_node_walks(const std::vector<std::vector<NodeId>>& walks, std::size_t node_count) {
  TrainingCorpus c;
  c.centers.assign(walks.begin(), walks.end());
  c.contexts = c.centers;
  c.center_vocabulary = node_count;
  c.context_vocabulary = node_count;
  return c;
}

TrainingCorpus TrainingCorpus::from_role_walks(const RoleWalks& walks, std::size_t node_count) {
  TrainingCorpus c;
  c.centers.assign(walks.nodes.begin(), walks.nodes.end());
  c.contexts = walks.roles;
  c.center_vocabulary = node_count;
  c.context_vocabulary = walks.role_vocabulary;
  return c;
}

nlohmann::json EmbeddingTable::metadata() const {
  return {{"algorithm", algorithm}, {"dim", dim}, {"seed", params.seed}, {"params", params.to_json()}};
}

EmbeddingTable train_skipgram(const TrainingCorpus& corpus, const WalkParams& params,
                              std::span<const Address> labels, const std::string& algorithm) {
  params.validate();
  if (corpus.centers.size() != corpus.contexts.size()) throw InvalidArgument("center/context sequence count mismatch");
  std::uint64_t tokens = 0;
  std::vector<double> context_counts(corpus.context_vocabulary, 0.0);
  for (std::size_t s = 0; s < corpus.centers.size(); ++s) {
    if (corpus.centers[s].size() != corpus.contexts[s].size()) throw InvalidArgument("center/context length mismatch");
    tokens += corpus.centers[s].size();
    for (auto c : corpus.centers[s]) {
      if (c >= corpus.center_vocabulary) throw InvalidArgument("center token out of range");
    }
    for (auto t : corpus.contexts[s]) {
      if (t >= corpus.context_vocabulary) throw InvalidArgument("context token out of range");
      context_counts[t] += 1.0;
    }
  }
  if (tokens == 0) throw EmptySequences("no tokens to train on");
  if (labels.size() != corpus.center_vocabulary) throw InvalidArgument("one label per center token required");

  for (auto& w : context_counts) w = std::pow(w, 0.75);
  const AliasTable noise(context_counts);

  Model m{params.dim, {}, {}};
  const auto dim = static_cast<std::size_t>(params.dim);
  m.input.resize(corpus.center_vocabulary * dim);
  m.output.assign(corpus.context_vocabulary * dim, 0.0f);
  Rng init(derive_seed(params.seed, kInitStream, 0, 0));
  for (auto& x : m.input) x = static_cast<float>((init.uniform() - 0.5) / params.dim);

  const std::uint64_t total = tokens * static_cast<std::uint64_t>(params.epochs);
  std::atomic<std::uint64_t> processed{0};
  if (params.workers == 1) {
    train_range<PlainAccess>(m, corpus, params, noise, 0, 1, processed, total);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < params.workers; ++w) {
      pool.emplace_back([&, w] {
        train_range<RelaxedAccess>(m, corpus, params, noise, static_cast<std::uint64_t>(w), params.workers,
                                   processed, total);
      });
    }
    for (auto& t : pool) t.join();
  }

  EmbeddingTable table;
  table.dim = params.dim;
  table.algorithm = algorithm;
  table.params = params;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const float* row = m.input.data() + i * dim;
    table.vectors[labels[i]] = std::vector<double>(row, row + dim);
  }
  return table;
}

std::string to_string(Method m) { return m == Method::diff2vec ? "diff2vec" : "role2vec"; }

EmbeddingTable embed_graph(const txgraph::TransactionGraph& g, Method method, const WalkParams& params) {
  if (g.empty()) throw EmptyGraph("cannot embed an empty graph");
  const auto& labels = g.addresses();
  if (method == Method::diff2vec) {
    auto walks = generate_diffusion_sequences(g, params);
    return train_skipgram(TrainingCorpus::from_node_walks(walks.sequences, g.node_count()), params, labels,
                          to_string(method));
  }
  auto walks = generate_role_sequences(g, params);
  return train_skipgram(TrainingCorpus::from_role_walks(walks, g.node_count()), params, labels, to_string(method));
}

EmbeddingTable complete_embeddings(EmbeddingTable table, std::span<const Address> all_addresses) {
  if (table.vectors.empty()) throw EmptyInput("cannot complete an empty embedding table");
  std::vector<double> mean(static_cast<std::size_t>(table.dim), 0.0);
  for (const auto& [_, v] : table.vectors) {
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += v[k];
  }
  for (auto& x : mean) x /= static_cast<double>(table.vectors.size());
  for (const auto& a : all_addresses) table.vectors.try_emplace(a, mean);
  return table;
}

double harmonic_rank(double rank_a, double rank_b) { return 2.0 / (1.0 / rank_a + 1.0 / rank_b); }

std::map<Address, std::vector<FusedCandidate>> fuse_rankings(const RankMap& ranks_a, const RankMap& ranks_b) {
  if (ranks_a.size() != ranks_b.size()) throw MismatchedCandidates("rankings cover different targets");
  std::map<Address, std::vector<FusedCandidate>> out;
  for (const auto& [target, cands_a] : ranks_a) {
    auto it = ranks_b.find(target);
    if (it == ranks_b.end()) throw MismatchedCandidates("target " + target.str() + " missing from second ranking");
    const auto& cands_b = it->second;
    if (cands_a.size() != cands_b.size()) {
      throw MismatchedCandidates("candidate sets differ for target " + target.str());
    }
    std::vector<FusedCandidate> fused;
    fused.reserve(cands_a.size());
    for (const auto& [cand, ra] : cands_a) {
      auto jt = cands_b.find(cand);
      if (jt == cands_b.end()) throw MismatchedCandidates("candidate sets differ for target " + target.str());
      fused.push_back({cand, harmonic_rank(static_cast<double>(ra), static_cast<double>(jt->second))});
    }
    std::sort(fused.begin(), fused.end(), [](const FusedCandidate& x, const FusedCandidate& y) {
      if (x.score != y.score) return x.score < y.score;
      return x.candidate < y.candidate;
    });
    out.emplace(target, std::move(fused));
  }
  return out;
}

void write_embeddings_csv(std::ostream& out, const EmbeddingTable& table) {
  std::vector<std::string> header{"address"};
  for (int k = 0; k < table.dim; ++k) header.push_back("v" + std::to_string(k));
  csv::write_row(out, header);
  for (const auto& [addr, v] : table.vectors) {
    std::vector<std::string> row{addr.str()};
    for (double x : v) row.push_back(format_double(x));
    csv::write_row(out, row);
  }
}

EmbeddingTable read_embeddings_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  std::vector<std::string> f;
  if (!reader.next(f)) throw EmptyFile(source);
  if (f.empty() || f[0] != "address" || f.size() < 2) throw MalformedRow(reader.line(), "header must be address,v0,...");
  EmbeddingTable table;
  table.dim = static_cast<int>(f.size() - 1);
  table.algorithm = "imported";
  while (reader.next(f)) {
    if (f.size() != static_cast<std::size_t>(table.dim) + 1) {
      throw MalformedRow(reader.line(), "expected " + std::to_string(table.dim) + " values");
    }
    auto a = Address::parse(f[0]);
    if (!a) throw MalformedRow(reader.line(), "address is not 0x + 40 hex digits");
    std::vector<double> v;
    for (std::size_t i = 1; i < f.size(); ++i) {
      double x = 0;
      auto [ptr, ec] = std::from_chars(f[i].data(), f[i].data() + f[i].size(), x);
      if (ec != std::errc{} || ptr != f[i].data() + f[i].size() || !std::isfinite(x)) {
        throw MalformedRow(reader.line(), "value '" + f[i] + "' is not a finite number");
      }
      v.push_back(x);
    }
    table.vectors[*a] = std::move(v);
  }
  return table;
}

}  // namespace chainprofiler::embeddings
