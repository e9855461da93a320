#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sgm/dataset.hpp"
#include "sgm/graph.hpp"
#include "sgm/rng.hpp"
#include "sgm/scoring.hpp"
#include "sgm/stratified.hpp"

namespace sgm {

using Instance = std::pair<Edge, Context>;

// Every (edge, context) pair that could join a stratum of g: one instance
// per outcome of each edge's non-empty common-neighbor set. Deterministic
// (edge, context) order.
inline std::vector<Instance> all_instances(const UndirectedGraph& g) {
  std::vector<Instance> out;
  for (const Edge& e : g.edges()) {
    const NodeSet l = common_neighbors(g, e);
    if (!l) continue;
    for_each_subset(l, [&](NodeSet ones) { out.push_back({e, Context{l, ones}}); });
  }
  std::sort(out.begin(), out.end(), [](const Instance& x, const Instance& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
  return out;
}

inline std::vector<Stratum> instances_to_strata(std::vector<Instance> instances) {
  std::sort(instances.begin(), instances.end(), [](const Instance& x, const Instance& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
  std::vector<Stratum> out;
  for (const auto& [edge, ctx] : instances) {
    if (out.empty() || !(out.back().edge == edge)) out.push_back(Stratum{edge, {}});
    out.back().contexts.push_back(ctx);
  }
  return out;
}

// One move of the strata proposal: add or remove exactly one instance.
// With L the current set and L_A all addable instances: an empty L always
// adds, a full L always removes, otherwise a fair coin decides.
inline std::vector<Instance> propose_strata(const std::vector<Instance>& current,
                                            const UndirectedGraph& graph, Rng& rng) {
  const std::vector<Instance> la = all_instances(graph);
  if (la.empty()) throw NoStrataPossibleError("no edge of the graph can carry a stratum");
  std::vector<Instance> addable;
  for (const Instance& inst : la)
    if (std::find(current.begin(), current.end(), inst) == current.end())
      addable.push_back(inst);

  std::vector<Instance> next = current;
  const bool add = current.empty() || (!addable.empty() && rng.uniform() < 0.5);
  if (add) {
    next.push_back(addable[rng.below(addable.size())]);
  } else {
    next.erase(next.begin() + static_cast<std::ptrdiff_t>(rng.below(next.size())));
  }
  return next;
}

// One move of the graph proposal: toggle a uniformly random node pair,
// redrawing from the current graph until the result is chordal.
inline UndirectedGraph propose_graph(const UndirectedGraph& current, Rng& rng) {
  const int d = current.node_count();
  if (d < 2) return current;
  while (true) {
    UndirectedGraph cand = current;
    const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
    int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(d - 1)));
    if (j >= i) ++j;
    cand.toggle_edge(i, j);
    if (is_chordal(cand)) return cand;
  }
}

struct SearchState {
  StratifiedGraph model;
  ModelScore score;
};

struct IterationRecord {
  std::size_t iter = 0;
  std::string proposed;  // canonical key of the candidate
  bool accepted = false;
  double total = 0.0;    // candidate's total score
};

struct SearchTrace {
  std::map<std::string, SearchState> visited;  // distinct states the chain occupied
  std::optional<SearchState> best;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> events;
};

namespace detail {

inline bool mh_accept(double cand_total, double cur_total, Rng& rng) {
  if (cand_total >= cur_total) return true;
  return rng.uniform() < std::exp(cand_total - cur_total);
}

inline void trace_visit(SearchTrace& trace, const SearchState& state) {
  trace.visited.emplace(canonical_key(state.model), state);
  if (!trace.best || state.score.total > trace.best->score.total) trace.best = state;
}

// MH chain over strata sets for a fixed chordal graph, driven by an external
// generator so it can serve as the inner stage of the full search.
inline SearchTrace strata_chain(const UndirectedGraph& graph, const Dataset& data,
                                std::size_t iters, Rng& rng, ScoreCache& cache,
                                const ScoreOptions& opt,
                                std::vector<Instance> start) {
  if (!is_chordal(graph)) throw NotChordalError("strata search requires a chordal graph");
  SearchTrace trace;
  StratifiedGraph cur(graph, instances_to_strata(start));
  SearchState cur_state{cur, cache.get(data, cur, opt)};
  trace_visit(trace, cur_state);
  std::vector<Instance> cur_inst = std::move(start);

  if (all_instances(graph).empty()) return trace;  // nothing to search over

  for (std::size_t it = 1; it <= iters; ++it) {
    std::vector<Instance> cand_inst = propose_strata(cur_inst, graph, rng);
    StratifiedGraph cand(graph, instances_to_strata(cand_inst));
    SearchState cand_state{cand, cache.get(data, cand, opt)};
    const bool accepted =
        mh_accept(cand_state.score.total, cur_state.score.total, rng);
    trace.events.push_back(
        {it, canonical_key(cand), accepted, cand_state.score.total});
    if (accepted) {
      cur_state = std::move(cand_state);
      cur_inst = std::move(cand_inst);
      trace_visit(trace, cur_state);
    }
    trace.iterations = it;
  }
  return trace;
}

}  // namespace detail

inline SearchTrace strata_search(const UndirectedGraph& graph, const Dataset& data,
                                 std::size_t iters, std::uint64_t seed,
                                 ScoreCache& cache, const ScoreOptions& opt = {}) {
  Rng rng(seed);
  SearchTrace trace = detail::strata_chain(graph, data, iters, rng, cache, opt, {});
  trace.seed = seed;
  return trace;
}

inline SearchTrace strata_search(const UndirectedGraph& graph, const Dataset& data,
                                 std::size_t iters, std::uint64_t seed,
                                 const ScoreOptions& opt = {}) {
  ScoreCache cache;
  return strata_search(graph, data, iters, seed, cache, opt);
}

// Outer MH chain over chordal graphs, starting from the empty graph. Each
// proposed graph is paired with the best strata found by an inner chain;
// per-graph results are cached and the inner chain warm-starts from the
// cached best on revisits.
inline SearchTrace full_search(const Dataset& data, std::size_t outer_iters,
                               std::size_t inner_iters, std::uint64_t seed,
                               ScoreCache& cache, const ScoreOptions& opt = {}) {
  Rng rng(seed);
  SearchTrace trace;
  trace.seed = seed;

  std::unordered_map<std::string, std::vector<Instance>> strata_memo;

  auto optimize_graph = [&](const UndirectedGraph& g) -> SearchState {
    const std::string gkey = canonical_key(StratifiedGraph(g));
    auto memo = strata_memo.find(gkey);
    std::vector<Instance> start =
        memo == strata_memo.end() ? std::vector<Instance>{} : memo->second;
    SearchTrace inner =
        detail::strata_chain(g, data, inner_iters, rng, cache, opt, std::move(start));
    strata_memo[gkey] = strata_instances(inner.best->model);
    return *inner.best;
  };

  UndirectedGraph cur_graph(data.d);
  SearchState cur_state = optimize_graph(cur_graph);
  detail::trace_visit(trace, cur_state);

  for (std::size_t it = 1; it <= outer_iters; ++it) {
    UndirectedGraph cand_graph = propose_graph(cur_graph, rng);
    SearchState cand_state = optimize_graph(cand_graph);
    const bool accepted =
        detail::mh_accept(cand_state.score.total, cur_state.score.total, rng);
    trace.events.push_back(
        {it, canonical_key(cand_state.model), accepted, cand_state.score.total});
    if (accepted) {
      cur_graph = cand_graph;
      cur_state = std::move(cand_state);
      detail::trace_visit(trace, cur_state);
    }
    trace.iterations = it;
  }
  return trace;
}

inline SearchTrace full_search(const Dataset& data, std::size_t outer_iters,
                               std::size_t inner_iters, std::uint64_t seed,
                               const ScoreOptions& opt = {}) {
  ScoreCache cache;
  return full_search(data, outer_iters, inner_iters, seed, cache, opt);
}

// Exhaustive sweep over every subset of the addable instances; only viable
// when few instances exist. Used to take search noise out of small problems.
inline SearchState exhaustive_strata_search(const UndirectedGraph& graph,
                                            const Dataset& data, ScoreCache& cache,
                                            const ScoreOptions& opt = {},
                                            int max_instances = 16) {
  const std::vector<Instance> la = all_instances(graph);
  if (static_cast<int>(la.size()) > max_instances)
    throw Error("too many instances for exhaustive enumeration: " +
                std::to_string(la.size()));
  std::optional<SearchState> best;
  for (std::uint64_t sel = 0; sel < (std::uint64_t{1} << la.size()); ++sel) {
    std::vector<Instance> inst;
    for (std::size_t i = 0; i < la.size(); ++i)
      if ((sel >> i) & 1) inst.push_back(la[i]);
    StratifiedGraph sg(graph, instances_to_strata(inst));
    SearchState state{sg, cache.get(data, sg, opt)};
    if (!best || state.score.total > best->score.total) best = std::move(state);
  }
  return *best;
}

// Renormalized scores over the distinct visited states, computed with
// log-sum-exp; a consistent estimate of the posterior over those states.
inline std::map<std::string, double> posterior_estimate(const SearchTrace& trace) {
  if (trace.visited.empty()) throw Error("posterior_estimate needs a non-empty trace");
  double m = -HUGE_VAL;
  for (const auto& [key, state] : trace.visited) m = std::max(m, state.score.total);
  double z = 0.0;
  for (const auto& [key, state] : trace.visited) z += std::exp(state.score.total - m);
  std::map<std::string, double> out;
  for (const auto& [key, state] : trace.visited)
    out[key] = std::exp(state.score.total - m) / z;
  return out;
}

}  // namespace sgm
