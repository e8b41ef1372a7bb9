#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "chainprofiler/chain.hpp"

namespace chainprofiler::txgraph {

using NodeId = std::uint32_t;
using AddressPair = std::pair<Address, Address>;  // first < second

/// Normalizes an unordered pair so that first < second.
AddressPair make_pair(const Address& a, const Address& b);

/// Immutable undirected simple graph over addresses. Node ids follow the
/// lexicographic order of addresses; adjacency lists are sorted.
class TransactionGraph {
 public:
  TransactionGraph() = default;

  /// Self-loops are dropped; duplicate edges collapse. Edge endpoints are
  /// added to the node set when missing.
  static TransactionGraph from_edges(std::set<Address> nodes, const std::set<AddressPair>& edges);

  std::size_t node_count() const noexcept { return addresses_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  bool empty() const noexcept { return addresses_.empty(); }

  const Address& address(NodeId id) const { return addresses_.at(id); }
  std::optional<NodeId> find(const Address& a) const;
  std::span<const NodeId> neighbors(NodeId id) const { return adjacency_.at(id); }
  std::size_t degree(NodeId id) const { return adjacency_.at(id).size(); }
  bool has_edge(NodeId a, NodeId b) const;

  const std::vector<Address>& addresses() const noexcept { return addresses_; }
  /// Edges as ordered address pairs, sorted.
  std::vector<AddressPair> edges() const;

  /// Connected components as sorted node-id lists, ordered by smallest member.
  std::vector<std::vector<NodeId>> components() const;

  /// Subgraph induced by `keep`.
  TransactionGraph induced(std::span<const NodeId> keep) const;

 private:
  std::vector<Address> addresses_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// One undirected edge per unordered (from, to) pair with at least one
/// transaction; self-transfers and contract creations add no edge. Every
/// address seen in the corpus becomes a node. Pairs in `exclude` are skipped.
TransactionGraph build_graph(std::span<const Transaction> corpus, const std::set<AddressPair>& exclude = {});

struct Preprocessed {
  TransactionGraph graph;
  std::vector<Address> removed;  // sorted
};

/// Keeps the largest connected component (ties go to the component holding
/// the smallest address), then removes every node of degree one in a single
/// pass. Throws EmptyGraph on a graph without nodes.
Preprocessed preprocess(const TransactionGraph& g);

// graph.csv: addr_a,addr_b with addr_a < addr_b
void write_edges_csv(std::ostream& out, const TransactionGraph& g);
TransactionGraph read_edges_csv(std::istream& in, const std::string& source = "<stream>");

}  // namespace chainprofiler::txgraph
