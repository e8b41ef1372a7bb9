#include <chainprofiler/errors.hpp>
#include <chainprofiler/txgraph.hpp>
#include <doctest.h>

#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "generators.hpp"

using namespace chainprofiler;
using namespace chainprofiler::txgraph;

namespace {

Transaction edge_tx(const Address& a, const std::optional<Address>& b, std::uint64_t id) {
  Transaction tx;
  tx.tx_hash = synthetic::make_hash(id);
  tx.from_address = a;
  tx.to_address = b;
  return tx;
}

TransactionGraph from_pairs(const std::vector<Address>& nodes, const std::vector<std::pair<int, int>>& pairs) {
  std::set<AddressPair> e;
  for (auto [i, j] : pairs) e.insert(make_pair(nodes[static_cast<std::size_t>(i)], nodes[static_cast<std::size_t>(j)]));
  return TransactionGraph::from_edges({nodes.begin(), nodes.end()}, e);
}

bool connected(const TransactionGraph& g) { return g.node_count() == 0 || g.components().size() == 1; }

// Union-find components, largest first with ties going to the smallest address,
// then one pass removing nodes of degree one inside that component.
std::pair<std::set<Address>, std::set<AddressPair>> oracle(const std::set<Address>& nodes,
                                                            const std::set<AddressPair>& edges) {
  std::map<Address, Address> parent;
  for (const auto& n : nodes) parent[n] = n;
  std::function<Address(const Address&)> find = [&](const Address& x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (const auto& [a, b] : edges) parent[find(a)] = find(b);
  std::map<Address, std::set<Address>> comps;
  for (const auto& n : nodes) comps[find(n)].insert(n);
  const std::set<Address>* best = nullptr;
  for (const auto& [_, c] : comps) {
    if (!best || c.size() > best->size() || (c.size() == best->size() && *c.begin() < *best->begin())) best = &c;
  }
  std::map<Address, int> degree;
  for (const auto& [a, b] : edges) {
    if (best->count(a)) {
      ++degree[a];
      ++degree[b];
    }
  }
  std::set<Address> keep;
  for (const auto& n : *best) {
    if (degree[n] != 1) keep.insert(n);
  }
  std::set<AddressPair> kept_edges;
  for (const auto& e : edges) {
    if (keep.count(e.first) && keep.count(e.second)) kept_edges.insert(e);
  }
  return {keep, kept_edges};
}

}  // namespace

TEST_SUITE("txgraph") {
  TEST_CASE("parallel and self transfers collapse to one undirected edge") {
    const auto n = gen::addresses(2);
    const std::vector<Transaction> txs = {edge_tx(n[0], n[1], 1), edge_tx(n[1], n[0], 2), edge_tx(n[0], n[0], 3)};
    const auto g = build_graph(txs);
    CHECK(g.node_count() == 2);
    CHECK(g.edge_count() == 1);
    CHECK(g.edges() == std::vector<AddressPair>{make_pair(n[0], n[1])});
  }

  TEST_CASE("only self transfers leave isolated nodes and no edges") {
    const auto n = gen::addresses(2);
    const std::vector<Transaction> txs = {edge_tx(n[0], n[0], 1), edge_tx(n[1], std::nullopt, 2)};
    const auto g = build_graph(txs);
    CHECK(g.node_count() == 2);
    CHECK(g.edge_count() == 0);
  }

  TEST_CASE("excluded pairs contribute no edge") {
    const auto n = gen::addresses(3);
    const std::vector<Transaction> txs = {edge_tx(n[0], n[1], 1), edge_tx(n[1], n[2], 2)};
    const auto g = build_graph(txs, {make_pair(n[2], n[1])});
    CHECK(g.edge_count() == 1);
    CHECK(g.node_count() == 3);
  }

  TEST_CASE("a pendant node on a triangle is pruned") {
    const auto n = gen::addresses(4);
    const auto g = from_pairs(n, {{0, 1}, {1, 2}, {0, 2}, {3, 0}});
    const auto p = preprocess(g);
    CHECK(p.graph.node_count() == 3);
    CHECK(p.graph.edge_count() == 3);
    CHECK(p.removed == std::vector<Address>{n[3]});
  }

  TEST_CASE("the larger component is kept") {
    const auto n = gen::addresses(8);
    // 5-cycle and a triangle
    const auto g = from_pairs(n, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {5, 6}, {6, 7}, {7, 5}});
    const auto p = preprocess(g);
    CHECK(p.graph.node_count() == 5);
    CHECK(p.removed.size() == 3);
    CHECK_THROWS_AS(preprocess(TransactionGraph{}), EmptyGraph);
  }

  TEST_CASE("pruning is a single pass") {
    const auto n = gen::addresses(5);
    // triangle with a two-node tail: only the tail end goes
    const auto g = from_pairs(n, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}});
    const auto p = preprocess(g);
    CHECK(p.graph.node_count() == 4);
    CHECK(p.graph.find(n[3]));
    CHECK_FALSE(p.graph.find(n[4]));
  }

  TEST_CASE("preprocessing matches a union-find and degree-scan oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 60; ++trial) {
      const auto count = 2 + rng.index(40);
      const double p = 0.02 + rng.uniform() * 0.12;
      const auto nodes = gen::addresses(count, static_cast<std::uint64_t>(trial));
      const auto edges = gen::edges(rng, nodes, p);
      const std::set<Address> node_set(nodes.begin(), nodes.end());
      const auto g = TransactionGraph::from_edges(node_set, edges);
      const auto pre = preprocess(g);
      const auto [keep, kept_edges] = oracle(node_set, edges);
      CHECK(std::set<Address>(pre.graph.addresses().begin(), pre.graph.addresses().end()) == keep);
      const auto e = pre.graph.edges();
      CHECK(std::set<AddressPair>(e.begin(), e.end()) == kept_edges);
      CHECK(pre.removed.size() + keep.size() == count);
      CHECK(connected(pre.graph));
    }
  }

  TEST_CASE("graph construction ignores transaction order") {
    Rng rng(32);
    for (int trial = 0; trial < 20; ++trial) {
      const auto pool = gen::addresses(12, static_cast<std::uint64_t>(trial));
      auto txs = gen::corpus(rng, 80, pool);
      const auto a = build_graph(txs);
      gen::shuffle(rng, txs);
      const auto b = build_graph(txs);
      CHECK(a.addresses() == b.addresses());
      CHECK(a.edges() == b.edges());
    }
  }

  TEST_CASE("adjacency is symmetric and sorted") {
    Rng rng(33);
    const auto g = gen::graph(rng, 30, 0.2);
    std::size_t degree_sum = 0;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      const auto nb = g.neighbors(u);
      CHECK(std::is_sorted(nb.begin(), nb.end()));
      for (NodeId v : nb) CHECK(g.has_edge(v, u));
      degree_sum += g.degree(u);
    }
    CHECK(degree_sum == 2 * g.edge_count());
  }

  TEST_CASE("edge lists round-trip") {
    Rng rng(34);
    const auto g = preprocess(gen::graph(rng, 25, 0.2)).graph;
    std::ostringstream out;
    write_edges_csv(out, g);
    std::istringstream in(out.str());
    const auto back = read_edges_csv(in, "test");
    CHECK(back.edges() == g.edges());
    CHECK(back.node_count() == g.node_count());
  }
}
