#pragma once

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "sgm/bits.hpp"
#include "sgm/error.hpp"

namespace sgm {

// Unordered node pair, stored with the smaller index first.
struct Edge {
  int a = 0;
  int b = 0;
  Edge() = default;
  Edge(int u, int v) : a(std::min(u, v)), b(std::max(u, v)) {}
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class UndirectedGraph {
 public:
  explicit UndirectedGraph(int node_count) : d_(node_count), adj_(node_count, 0) {
    if (node_count < 1 || node_count > max_nodes)
      throw Error("node count must be in 1.." + std::to_string(max_nodes));
  }

  int node_count() const { return d_; }

  bool has_edge(int u, int v) const {
    check_node(u);
    check_node(v);
    return set_contains(adj_[u], v);
  }

  void add_edge(int u, int v) {
    check_node(u);
    check_node(v);
    if (u == v) throw Error("self-loops are not allowed");
    adj_[u] |= node_bit(v);
    adj_[v] |= node_bit(u);
  }

  void remove_edge(int u, int v) {
    check_node(u);
    check_node(v);
    adj_[u] &= ~node_bit(v);
    adj_[v] &= ~node_bit(u);
  }

  void toggle_edge(int u, int v) {
    if (has_edge(u, v))
      remove_edge(u, v);
    else
      add_edge(u, v);
  }

  NodeSet neighbors(int v) const {
    check_node(v);
    return adj_[v];
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (int u = 0; u < d_; ++u)
      for (int v : set_to_nodes(adj_[u] & ~(node_bit(u + 1) - 1)))
        out.emplace_back(u, v);
    return out;
  }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (NodeSet a : adj_) twice += set_size(a);
    return twice / 2;
  }

  bool is_complete_set(NodeSet s) const {
    for (NodeSet rest = s; rest;) {
      int v = std::countr_zero(rest);
      rest &= rest - 1;
      if ((s & ~node_bit(v)) & ~adj_[v]) return false;
    }
    return true;
  }

  friend bool operator==(const UndirectedGraph&, const UndirectedGraph&) = default;

 private:
  void check_node(int v) const {
    if (v < 0 || v >= d_) throw Error("node index out of range");
  }

  int d_;
  std::vector<NodeSet> adj_;
};

inline UndirectedGraph make_graph(int d, const std::vector<Edge>& edges) {
  UndirectedGraph g(d);
  for (const Edge& e : edges) g.add_edge(e.a, e.b);
  return g;
}

namespace detail {

// Maximum cardinality search. Returns the visit order; ties broken by the
// smallest node index so results are deterministic.
inline std::vector<int> mcs_order(const UndirectedGraph& g) {
  const int d = g.node_count();
  std::vector<int> weight(d, 0);
  std::vector<int> order;
  order.reserve(d);
  NodeSet visited = 0;
  for (int step = 0; step < d; ++step) {
    int best = -1;
    for (int v = 0; v < d; ++v)
      if (!set_contains(visited, v) && (best < 0 || weight[v] > weight[best]))
        best = v;
    order.push_back(best);
    visited |= node_bit(best);
    for (int u : set_to_nodes(g.neighbors(best) & ~visited)) ++weight[u];
  }
  return order;
}

// Predecessor sets along the MCS order: neighbors visited before each node.
inline std::vector<NodeSet> mcs_predecessors(const UndirectedGraph& g,
                                             const std::vector<int>& order) {
  std::vector<NodeSet> pred(g.node_count(), 0);
  NodeSet seen = 0;
  for (int v : order) {
    pred[v] = g.neighbors(v) & seen;
    seen |= node_bit(v);
  }
  return pred;
}

}  // namespace detail

// Chordality test: the reverse of an MCS visit order is a perfect
// elimination ordering iff the graph is chordal (Tarjan & Yannakakis).
// It suffices to check, for each node, that its predecessor set minus the
// most recently visited predecessor lies in that predecessor's neighborhood.
inline bool is_chordal(const UndirectedGraph& g) {
  const auto order = detail::mcs_order(g);
  const auto pred = detail::mcs_predecessors(g, order);
  std::vector<int> pos(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) pos[order[i]] = i;
  for (int v : order) {
    NodeSet p = pred[v];
    if (!p) continue;
    int last = -1;
    for (int u : set_to_nodes(p))
      if (last < 0 || pos[u] > pos[last]) last = u;
    if ((p & ~node_bit(last)) & ~g.neighbors(last)) return false;
  }
  return true;
}

// The maximal cliques of a chordal graph, read off a perfect elimination
// ordering. Sorted lexicographically (as sorted node lists) for determinism.
inline std::vector<NodeSet> maximal_cliques(const UndirectedGraph& g) {
  if (!is_chordal(g)) throw NotChordalError("maximal_cliques requires a chordal graph");
  const auto order = detail::mcs_order(g);
  const auto pred = detail::mcs_predecessors(g, order);
  std::vector<NodeSet> cand;
  for (int v : order) cand.push_back(pred[v] | node_bit(v));
  std::vector<NodeSet> out;
  for (NodeSet c : cand) {
    bool maximal = true;
    for (NodeSet o : cand)
      if (c != o && (c & o) == c) {
        maximal = false;
        break;
      }
    if (maximal && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](NodeSet x, NodeSet y) {
    return set_to_nodes(x) < set_to_nodes(y);
  });
  return out;
}

struct JunctionTree {
  std::vector<NodeSet> cliques;
  // Separators listed with multiplicity, one per tree edge. Tree edges that
  // join different connected components carry the empty separator, so
  // separators.size() == cliques.size() - 1 whenever cliques.size() >= 1.
  std::vector<NodeSet> separators;
  // (i, j) clique index pairs matching separators entry-by-entry.
  std::vector<std::pair<int, int>> tree_edges;
};

// Junction tree via a maximum-weight spanning tree on the clique graph
// (weight = intersection size). Ties resolved toward lexicographically
// earlier clique pairs, which makes the construction deterministic.
inline JunctionTree junction_tree(const UndirectedGraph& g) {
  JunctionTree jt;
  jt.cliques = maximal_cliques(g);
  const int k = static_cast<int>(jt.cliques.size());
  struct Cand {
    int w, i, j;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      cands.push_back({set_size(jt.cliques[i] & jt.cliques[j]), i, j});
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    if (x.w != y.w) return x.w > y.w;
    if (x.i != y.i) return x.i < y.i;
    return x.j < y.j;
  });
  std::vector<int> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Cand& c : cands) {
    int ri = find(c.i), rj = find(c.j);
    if (ri == rj) continue;
    parent[ri] = rj;
    jt.separators.push_back(jt.cliques[c.i] & jt.cliques[c.j]);
    jt.tree_edges.emplace_back(c.i, c.j);
  }
  return jt;
}

// Nodes adjacent to both endpoints of an edge (the conditioning set
// available to a stratum on that edge).
inline NodeSet common_neighbors(const UndirectedGraph& g, const Edge& e) {
  if (!g.has_edge(e.a, e.b))
    throw EdgeAbsentError("edge {" + std::to_string(e.a + 1) + "," +
                          std::to_string(e.b + 1) + "} is not in the graph");
  return g.neighbors(e.a) & g.neighbors(e.b);
}

// True iff every path between a and b meets s. BFS on the graph with s removed.
inline bool separates(const UndirectedGraph& g, NodeSet a, NodeSet b, NodeSet s) {
  if ((a & b) | (a & s) | (b & s))
    throw SetsOverlapError("separates() requires pairwise disjoint node sets");
  NodeSet reach = a;
  NodeSet frontier = a;
  const NodeSet blocked = s;
  while (frontier) {
    NodeSet next = 0;
    for (int v : set_to_nodes(frontier)) next |= g.neighbors(v);
    next &= ~reach & ~blocked & full_set(g.node_count());
    reach |= next;
    frontier = next;
  }
  return (reach & b) == 0;
}

inline int connected_components(const UndirectedGraph& g) {
  const NodeSet all = full_set(g.node_count());
  NodeSet seen = 0;
  int count = 0;
  while (seen != all) {
    NodeSet start = node_bit(std::countr_zero(~seen & all));
    NodeSet comp = start, frontier = start;
    while (frontier) {
      NodeSet next = 0;
      for (int v : set_to_nodes(frontier)) next |= g.neighbors(v);
      next &= ~comp & all;
      comp |= next;
      frontier = next;
    }
    seen |= comp;
    ++count;
  }
  return count;
}

}  // namespace sgm
