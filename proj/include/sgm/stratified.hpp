#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sgm/bits.hpp"
#include "sgm/error.hpp"
#include "sgm/graph.hpp"

namespace sgm {

// Assignment of values to the conditioning variables of one stratum entry:
// `vars` is the conditioning set (the owning edge's common neighbors) and
// `ones` marks which of them take value 1.
struct Context {
  NodeSet vars = 0;
  NodeSet ones = 0;

  friend bool operator==(const Context&, const Context&) = default;
  friend auto operator<=>(const Context&, const Context&) = default;
};

struct Stratum {
  Edge edge;
  std::vector<Context> contexts;
};

// A chordal graph together with per-edge strata: the contexts of the edge's
// common neighbors in which the edge's endpoints are independent.
struct StratifiedGraph {
  UndirectedGraph graph;
  std::vector<Stratum> strata;

  explicit StratifiedGraph(UndirectedGraph g, std::vector<Stratum> s = {})
      : graph(std::move(g)), strata(std::move(s)) {}
};

// One linear restriction sum over B of phi_B = 0 (Theorem-style form: every
// term contains the stratum's edge pair).
struct Restriction {
  Edge edge;
  Context context;
  std::vector<NodeSet> terms;
};

struct RestrictionSet {
  int d = 0;
  std::vector<NodeSet> zeroed;        // phi_A = 0 for each listed A
  std::vector<Restriction> linear;    // sum-to-zero constraints from strata
};

inline void validate(const StratifiedGraph& sg) {
  if (!is_chordal(sg.graph))
    throw NotChordalError("the underlying graph must be chordal");
  std::vector<Edge> seen;
  for (const Stratum& st : sg.strata) {
    if (std::find(seen.begin(), seen.end(), st.edge) != seen.end())
      throw Error("more than one stratum on edge {" + std::to_string(st.edge.a + 1) +
                  "," + std::to_string(st.edge.b + 1) + "}");
    seen.push_back(st.edge);
    const NodeSet l = common_neighbors(sg.graph, st.edge);  // throws EdgeAbsent
    if (st.contexts.empty())
      throw Error("stratum on edge {" + std::to_string(st.edge.a + 1) + "," +
                  std::to_string(st.edge.b + 1) + "} has no contexts");
    std::vector<Context> sorted = st.contexts;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw Error("duplicate context in stratum on edge {" +
                  std::to_string(st.edge.a + 1) + "," + std::to_string(st.edge.b + 1) +
                  "}");
    for (const Context& c : st.contexts) {
      if (c.ones & ~c.vars) throw Error("context assigns a value outside its key set");
      if (c.vars != l)
        throw ContextKeysMismatchError(
            "context on edge {" + std::to_string(st.edge.a + 1) + "," +
            std::to_string(st.edge.b + 1) + "} is keyed by " + set_to_string(c.vars) +
            " but the common neighbors are " + set_to_string(l));
      if (l == 0)
        throw EmptyConditioningSetError(
            "edge {" + std::to_string(st.edge.a + 1) + "," +
            std::to_string(st.edge.b + 1) + "} has no common neighbors to condition on");
    }
  }
}

inline bool is_valid(const StratifiedGraph& sg, std::string* why = nullptr) {
  try {
    validate(sg);
    return true;
  } catch (const Error& e) {
    if (why) *why = e.what();
    return false;
  }
}

// All (edge, context) pairs of the strata in a fixed deterministic order:
// edges lexicographically, then contexts by their assignment mask.
inline std::vector<std::pair<Edge, Context>> strata_instances(const StratifiedGraph& sg) {
  std::vector<std::pair<Edge, Context>> out;
  for (const Stratum& st : sg.strata)
    for (const Context& c : st.contexts) out.emplace_back(st.edge, c);
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
  return out;
}

inline RestrictionSet derive_restrictions(const StratifiedGraph& sg) {
  validate(sg);
  RestrictionSet rs;
  rs.d = sg.graph.node_count();
  const NodeSet all = full_set(rs.d);
  for (NodeSet a = 0; a <= all; ++a) {
    if (set_size(a) >= 2 && !sg.graph.is_complete_set(a)) rs.zeroed.push_back(a);
    if (a == all) break;
  }
  for (const auto& [edge, ctx] : strata_instances(sg)) {
    Restriction r;
    r.edge = edge;
    r.context = ctx;
    const NodeSet pair = node_bit(edge.a) | node_bit(edge.b);
    for_each_subset(ctx.ones, [&](NodeSet z) { r.terms.push_back(pair | z); });
    std::sort(r.terms.begin(), r.terms.end());
    rs.linear.push_back(std::move(r));
  }
  return rs;
}

namespace detail {

using bigint = boost::multiprecision::cpp_int;

// Exact rank by fraction-free row elimination; coefficients here are tiny,
// rows are gcd-reduced to keep the integers small.
inline int exact_rank(std::vector<std::vector<bigint>> m) {
  if (m.empty()) return 0;
  const std::size_t cols = m[0].size();
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < m.size(); ++col) {
    std::size_t piv = row;
    while (piv < m.size() && m[piv][col] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[row], m[piv]);
    for (std::size_t r = row + 1; r < m.size(); ++r) {
      if (m[r][col] == 0) continue;
      const bigint f1 = m[row][col], f2 = m[r][col];
      bigint g = 0;
      for (std::size_t c = col; c < cols; ++c) {
        m[r][c] = m[r][c] * f1 - m[row][c] * f2;
        g = boost::multiprecision::gcd(g, m[r][c]);
      }
      if (g > 1)
        for (std::size_t c = col; c < cols; ++c) m[r][c] /= g;
    }
    ++row;
  }
  return static_cast<int>(row);
}

// Non-empty subsets that are complete in the graph: the phi coordinates not
// zeroed by missing edges.
inline std::vector<NodeSet> surviving_coordinates(const UndirectedGraph& g) {
  std::vector<NodeSet> out;
  const NodeSet all = full_set(g.node_count());
  for (NodeSet a = 1; a <= all; ++a) {
    if (g.is_complete_set(a)) out.push_back(a);
    if (a == all) break;
  }
  return out;
}

// The strata restrictions as integer rows over the surviving coordinates
// (terms zeroed by the graph drop out).
inline std::vector<std::vector<bigint>> restriction_rows(
    const RestrictionSet& rs, const std::vector<NodeSet>& survivors) {
  std::vector<std::vector<bigint>> rows;
  for (const Restriction& r : rs.linear) {
    std::vector<bigint> row(survivors.size(), 0);
    bool nonzero = false;
    for (NodeSet b : r.terms) {
      const auto it = std::lower_bound(survivors.begin(), survivors.end(), b);
      if (it != survivors.end() && *it == b) {
        row[static_cast<std::size_t>(it - survivors.begin())] += 1;
        nonzero = true;
      }
    }
    if (nonzero) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// Maximum number of free parameters under the model's restrictions:
// the surviving phi coordinates minus the exact rank of the linear system
// they must satisfy. The count excludes phi_empty (fixed by normalization).
inline int dimension(const StratifiedGraph& sg) {
  const RestrictionSet rs = derive_restrictions(sg);
  const auto survivors = detail::surviving_coordinates(sg.graph);
  const auto rows = detail::restriction_rows(rs, survivors);
  return static_cast<int>(survivors.size()) - detail::exact_rank(rows);
}

// Hierarchical iff the forced-to-zero coordinate set is closed upward.
// The graph-zeroed coordinates are closed upward automatically (supersets of
// an incomplete set are incomplete), so only coordinates pinned to zero by
// the strata system need their supersets checked. A surviving coordinate is
// pinned iff appending its unit row does not raise the system's rank.
inline bool is_hierarchical(const StratifiedGraph& sg) {
  const RestrictionSet rs = derive_restrictions(sg);
  const auto survivors = detail::surviving_coordinates(sg.graph);
  const auto rows = detail::restriction_rows(rs, survivors);
  if (rows.empty()) return true;
  const int base_rank = detail::exact_rank(rows);

  std::vector<bool> in_some_row(survivors.size(), false);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      if (row[c] != 0) in_some_row[c] = true;

  auto is_pinned = [&](std::size_t coord_idx) {
    auto extended = rows;
    std::vector<detail::bigint> unit(survivors.size(), 0);
    unit[coord_idx] = 1;
    extended.push_back(std::move(unit));
    return detail::exact_rank(extended) == base_rank;
  };

  const NodeSet all = full_set(sg.graph.node_count());
  for (std::size_t i = 0; i < survivors.size(); ++i) {
    if (!in_some_row[i] || !is_pinned(i)) continue;
    const NodeSet a = survivors[i];
    bool ok = true;
    for_each_subset(all & ~a, [&](NodeSet extra) {
      if (!ok || extra == 0) return;
      const NodeSet t = a | extra;
      if (!sg.graph.is_complete_set(t)) return;  // zeroed by the graph
      const auto it = std::lower_bound(survivors.begin(), survivors.end(), t);
      const std::size_t j = static_cast<std::size_t>(it - survivors.begin());
      if (!in_some_row[j] || !is_pinned(j)) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

// Deterministic, injective text form; used as a cache / dedup key.
inline std::string canonical_key(const StratifiedGraph& sg) {
  std::string key = "d" + std::to_string(sg.graph.node_count()) + ";e";
  for (const Edge& e : sg.graph.edges())
    key += std::to_string(e.a) + "-" + std::to_string(e.b) + ",";
  key += ";s";
  for (const auto& [edge, ctx] : strata_instances(sg))
    key += std::to_string(edge.a) + "-" + std::to_string(edge.b) + ":" +
           std::to_string(ctx.vars) + "/" + std::to_string(ctx.ones) + ",";
  return key;
}

}  // namespace sgm
