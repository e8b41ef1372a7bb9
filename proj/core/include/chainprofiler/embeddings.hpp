#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "chainprofiler/chain.hpp"
#include "chainprofiler/txgraph.hpp"

namespace chainprofiler::embeddings {

using txgraph::NodeId;

struct WalkParams {
  int dim = 128;
  int walks_per_node = 10;
  int cover_size = 40;   // diffusion tree size
  int walk_length = 40;  // role walks
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 42;
  int workers = 1;  // 1 = deterministic training

  void validate() const;
  nlohmann::json to_json() const;
};

struct DiffusionWalks {
  std::vector<std::vector<NodeId>> sequences;
  std::size_t clamped_roots = 0;  // roots whose component was smaller than cover_size
};

/// For every node and each of walks_per_node repetitions, grows a random
/// diffusion tree of cover_size nodes from that root and emits its Euler
/// tour (each tree edge walked down and back up). Sequences are ordered by
/// (repetition, root).
DiffusionWalks generate_diffusion_sequences(const txgraph::TransactionGraph& g, const WalkParams& params);

/// Structural role of a node: floor(log2(degree)); degree 0 maps to 0.
std::uint32_t role_token(std::size_t degree);

struct RoleWalks {
  std::vector<std::vector<NodeId>> nodes;          // node visited at each step
  std::vector<std::vector<std::uint32_t>> roles;   // its role token
  std::uint32_t role_vocabulary = 0;               // max role + 1
};

/// Uniform random walks of walk_length nodes from every node, walks_per_node
/// times, tagged with role tokens.
RoleWalks generate_role_sequences(const txgraph::TransactionGraph& g, const WalkParams& params);

/// Input to the skip-gram trainer. Position i of a sequence contributes
/// center token centers[s][i] with every context token contexts[s][j] for
/// 0 < |i - j| <= window. For plain node walks both are the same sequence.
struct TrainingCorpus {
  std::vector<std::vector<std::uint32_t>> centers;
  std::vector<std::vector<std::uint32_t>> contexts;
  std::size_t center_vocabulary = 0;
  std::size_t context_vocabulary = 0;

  static TrainingCorpus from_node_walks(const std::vector<std::vector<NodeId>>& walks, std::size_t node_count);
  static TrainingCorpus from_role_walks(const RoleWalks& walks, std::size_t node_count);
};

struct EmbeddingTable {
  int dim = 0;
  std::map<Address, std::vector<double>> vectors;
  std::string algorithm;
  WalkParams params;

  nlohmann::json metadata() const;
};

/// Skip-gram with negative sampling, SGD with a learning rate decaying
/// linearly to lr * 1e-4, negatives drawn from unigram^0.75 over context
/// tokens. One worker is bit-reproducible for a fixed seed; more workers
/// update shared weights lock-free. `labels[i]` names center token i.
/// Throws EmptySequences.
EmbeddingTable train_skipgram(const TrainingCorpus& corpus, const WalkParams& params,
                              std::span<const Address> labels, const std::string& algorithm = "sgns");

enum class Method { diff2vec, role2vec };
std::string to_string(Method m);

/// Walks plus training for one method over a preprocessed graph.
EmbeddingTable embed_graph(const txgraph::TransactionGraph& g, Method method, const WalkParams& params);

/// Adds every address of `all_addresses` missing from the table with the
/// component-wise mean of the existing vectors.
EmbeddingTable complete_embeddings(EmbeddingTable table, std::span<const Address> all_addresses);

/// target -> candidate -> 1-based rank
using RankMap = std::map<Address, std::map<Address, std::size_t>>;

struct FusedCandidate {
  Address candidate;
  double score = 0;  // harmonic mean of the two ranks, lower is better
};

/// Harmonic mean of two ranks, 2 / (1/a + 1/b).
double harmonic_rank(double rank_a, double rank_b);

/// Per target, candidates ordered by ascending harmonic-mean rank with
/// lexicographic tie-break. Throws MismatchedCandidates when the two maps
/// disagree on targets or candidate sets.
std::map<Address, std::vector<FusedCandidate>> fuse_rankings(const RankMap& ranks_a, const RankMap& ranks_b);

// embeddings.csv: address,v0..v{dim-1}
void write_embeddings_csv(std::ostream& out, const EmbeddingTable& table);
EmbeddingTable read_embeddings_csv(std::istream& in, const std::string& source = "<stream>");

}  // namespace chainprofiler::embeddings
