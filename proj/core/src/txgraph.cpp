#include "chainprofiler/txgraph.hpp"

#include <algorithm>
#include <deque>

#include "chainprofiler/csv.hpp"
#include "chainprofiler/errors.hpp"

namespace chainprofiler::txgraph {

AddressPair make_pair(const Address& a, const Address& b) { return a < b ? AddressPair{a, b} : AddressPair{b, a}; }

TransactionGraph TransactionGraph::from_edges(std::set<Address> nodes, const std::set<AddressPair>& edges) {
  for (const auto& [a, b] : edges) {
    nodes.insert(a);
    nodes.insert(b);
  }
  TransactionGraph g;
  g.addresses_.assign(nodes.begin(), nodes.end());
  g.adjacency_.resize(g.addresses_.size());
  for (const auto& [a, b] : edges) {
    if (a == b) continue;
    const auto ia = *g.find(a);
    const auto ib = *g.find(b);
    g.adjacency_[ia].push_back(ib);
    g.adjacency_[ib].push_back(ia);
  }
  for (auto& adj : g.adjacency_) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    g.edge_count_ += adj.size();
  }
  g.edge_count_ /= 2;
  return g;
}

std::optional<NodeId> TransactionGraph::find(const Address& a) const {
  auto it = std::lower_bound(addresses_.begin(), addresses_.end(), a);
  if (it == addresses_.end() || *it != a) return std::nullopt;
  return static_cast<NodeId>(it - addresses_.begin());
}

bool TransactionGraph::has_edge(NodeId a, NodeId b) const {
  const auto& adj = adjacency_.at(a);
  return std::binary_search(adj.begin(), adj.end(), b);
}

std::vector<AddressPair> TransactionGraph::edges() const {
  std::vector<AddressPair> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.emplace_back(addresses_[u], addresses_[v]);
    }
  }
  return out;
}

std::vector<std::vector<NodeId>> TransactionGraph::components() const {
  std::vector<bool> seen(node_count(), false);
  std::vector<std::vector<NodeId>> out;
  for (NodeId start = 0; start < node_count(); ++start) {
    if (seen[start]) continue;
    std::vector<NodeId> comp;
    std::deque<NodeId> queue{start};
    seen[start] = true;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      comp.push_back(u);
      for (NodeId v : adjacency_[u]) {
        if (!seen[v]) {
          seen[v] = true;
          queue.push_back(v);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

TransactionGraph TransactionGraph::induced(std::span<const NodeId> keep) const {
  std::vector<bool> in(node_count(), false);
  std::set<Address> nodes;
  for (NodeId u : keep) {
    in.at(u) = true;
    nodes.insert(addresses_[u]);
  }
  std::set<AddressPair> kept;
  for (NodeId u : keep) {
    for (NodeId v : adjacency_[u]) {
      if (u < v && in[v]) kept.emplace(addresses_[u], addresses_[v]);
    }
  }
  return from_edges(std::move(nodes), kept);
}

TransactionGraph build_graph(std::span<const Transaction> corpus, const std::set<AddressPair>& exclude) {
  std::set<Address> nodes;
  std::set<AddressPair> edges;
  for (const auto& tx : corpus) {
    nodes.insert(tx.from_address);
    if (!tx.to_address) continue;
    nodes.insert(*tx.to_address);
    if (*tx.to_address == tx.from_address) continue;
    auto pair = make_pair(tx.from_address, *tx.to_address);
    if (!exclude.count(pair)) edges.insert(std::move(pair));
  }
  return TransactionGraph::from_edges(std::move(nodes), edges);
}

Preprocessed preprocess(const TransactionGraph& g) {
  if (g.empty()) throw EmptyGraph("cannot preprocess an empty graph");
  auto comps = g.components();
  // components() is ordered by smallest member, so the first maximum wins ties.
  const auto largest = std::max_element(comps.begin(), comps.end(),
                                        [](const auto& a, const auto& b) { return a.size() < b.size(); });
  const auto& lcc = *largest;
  const auto lcc_graph = g.induced(lcc);

  std::vector<NodeId> keep;
  std::vector<Address> removed;
  for (NodeId u = 0; u < lcc_graph.node_count(); ++u) {
    if (lcc_graph.degree(u) == 1) {
      removed.push_back(lcc_graph.address(u));
    } else {
      keep.push_back(u);
    }
  }
  std::vector<bool> in_lcc(g.node_count(), false);
  for (NodeId u : lcc) in_lcc[u] = true;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (!in_lcc[u]) removed.push_back(g.address(u));
  }
  std::sort(removed.begin(), removed.end());
  return {lcc_graph.induced(keep), std::move(removed)};
}

void write_edges_csv(std::ostream& out, const TransactionGraph& g) {
  csv::write_row(out, {"addr_a", "addr_b"});
  for (const auto& [a, b] : g.edges()) csv::write_row(out, {a.str(), b.str()});
}

TransactionGraph read_edges_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in);
  csv::expect_header(reader, {"addr_a", "addr_b"}, source);
  std::set<AddressPair> edges;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 2) throw MalformedRow(reader.line(), "expected addr_a,addr_b");
    auto a = Address::parse(f[0]);
    auto b = Address::parse(f[1]);
    if (!a || !b) throw MalformedRow(reader.line(), "address is not 0x + 40 hex digits");
    if (*a == *b) throw MalformedRow(reader.line(), "self-loop");
    edges.insert(make_pair(*a, *b));
  }
  return TransactionGraph::from_edges({}, edges);
}

}  // namespace chainprofiler::txgraph
