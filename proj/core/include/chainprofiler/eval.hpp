#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "chainprofiler/chain.hpp"
#include "chainprofiler/embeddings.hpp"
#include "chainprofiler/ingest.hpp"
#include "chainprofiler/profiles.hpp"

namespace chainprofiler::eval {

/// Address -> feature values, all of one kind and one length.
using FeatureMap = std::map<Address, std::vector<double>>;

/// Throws DimensionMismatch when kinds or lengths differ.
FeatureMap make_feature_map(std::span<const profiles::FeatureVector> features);
FeatureMap make_feature_map(const embeddings::EmbeddingTable& table);

struct RankedCandidate {
  Address address;
  double distance = 0;
};

/// Outcome of ranking one target's candidates; exactly one candidate is the truth.
struct RankedResult {
  Address target;
  Address truth;
  std::size_t n = 0;     // candidate set size
  std::size_t rank = 0;  // 1-based position of truth
  std::vector<RankedCandidate> candidates;  // ascending distance, ties by address
};

/// Candidates by ascending Euclidean distance to the target, ties broken by
/// address. Throws MissingFeatures or DimensionMismatch.
std::vector<RankedCandidate> order_candidates(const FeatureMap& features, const Address& target,
                                              std::span<const Address> candidates);

/// Orders candidates by Euclidean distance to the target, ties broken by
/// address. `truth` must be one of the candidates; the target must not be.
/// Throws MissingFeatures, DimensionMismatch or InvalidArgument.
RankedResult rank_candidates(const FeatureMap& features, const Address& target, std::span<const Address> candidates,
                             const Address& truth);

/// Ranks both directions of every pair whose addresses have features, using
/// all other featured addresses as candidates.
std::vector<RankedResult> rank_pairs(const FeatureMap& features, std::span<const ingest::GroundTruthPair> pairs);

/// target -> candidate -> rank, for fuse_rankings.
embeddings::RankMap to_rank_map(std::span<const RankedResult> results);

/// Re-ranks each result by the harmonic mean of its ranks in `a` and `b`.
/// Both lists must cover the same (target, truth) pairs in the same order.
std::vector<RankedResult> fuse_results(std::span<const RankedResult> a, std::span<const RankedResult> b);

double average_rank(std::span<const RankedResult> results);

struct AucReport {
  double lemma = 0;                 // mean r/n, smaller is better
  std::optional<double> standard;   // mean (n-r)/(n-1) over n > 1, larger is better
};

AucReport auc(std::span<const RankedResult> results);

struct EntropyEstimate {
  std::size_t resolution = 0;
  std::vector<double> density;  // bin masses q_1..q_M, summing to 1
  double gain_bits = 0;
};

/// max n over results, capped at 1000.
std::size_t default_resolution(std::span<const RankedResult> results);

/// Averages the uniform densities on [(r-1)/n, r/n] over results, bins them
/// on an M-bin grid over [0, 1] with exact proportional splitting, and
/// returns log2(M) + sum q log2 q.
EntropyEstimate entropy_gain(std::span<const RankedResult> results, std::size_t resolution);

/// Expected average-rank contribution of targets whose truth lies outside a
/// filtered candidate set: miss_fraction * (total_set - candidate_set) / 2.
double rank_correction(std::size_t total_set, std::size_t candidate_set, double miss_fraction);

struct MethodMetrics {
  std::string method;
  double average_rank = 0;
  double auc_lemma = 0;
  std::optional<double> auc_standard;
  double entropy_gain_bits = 0;
  std::size_t count = 0;
  std::size_t resolution = 0;
  std::optional<double> rank_correction;
};

MethodMetrics summarize(const std::string& method, std::span<const RankedResult> results,
                        std::optional<std::size_t> resolution = std::nullopt);

struct EvaluationReport {
  std::vector<MethodMetrics> methods;

  nlohmann::json to_json() const;
  /// method,avg_rank,auc_lemma,auc_standard,entropy_gain_bits,count
  void write_csv(std::ostream& out) const;
};

}  // namespace chainprofiler::eval
