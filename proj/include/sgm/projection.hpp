#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "sgm/bits.hpp"
#include "sgm/error.hpp"
#include "sgm/graph.hpp"
#include "sgm/loglinear.hpp"
#include "sgm/stratified.hpp"
#include "sgm/table.hpp"

namespace sgm {

// Maximum likelihood projection onto the distributions Markov to a chordal
// graph: each cell becomes the product of its clique marginals divided by
// the product of its separator marginals. Empty separators (between
// connected components) contribute the total mass, i.e. 1 for a normalized
// table, so the formula is uniform over disconnected graphs.
inline JointTable project_graph(const JointTable& p, const UndirectedGraph& g) {
  if (g.node_count() != p.d) throw Error("graph and table node counts differ");
  const JunctionTree jt = junction_tree(g);  // throws NotChordal
  std::vector<std::vector<double>> cm, sm;
  cm.reserve(jt.cliques.size());
  sm.reserve(jt.separators.size());
  for (NodeSet c : jt.cliques) cm.push_back(marginal_values(p, c));
  for (NodeSet s : jt.separators) sm.push_back(marginal_values(p, s));

  JointTable out;
  out.d = p.d;
  out.p.assign(p.size(), 1.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    double num = 1.0;
    for (std::size_t k = 0; k < jt.cliques.size(); ++k)
      num *= cm[k][compress_bits(x, jt.cliques[k])];
    double den = 1.0;
    bool den_zero = false;
    for (std::size_t k = 0; k < jt.separators.size(); ++k) {
      const double v = sm[k][compress_bits(x, jt.separators[k])];
      if (v == 0)
        den_zero = true;
      else
        den *= v;
    }
    if (den_zero) {
      if (num != 0)
        throw ZeroCellError("separator marginal vanishes on a cell with positive clique mass");
      out.p[x] = 0.0;
    } else {
      out.p[x] = num / den;
    }
  }
  return out;
}

// Maximum likelihood projection imposing a single context-specific
// independence of the edge's endpoints given context. For every slice over
// the remaining variables, the 2x2 block over the endpoints is replaced by
// the product of its row and column sums divided by the block mass. Slices
// with zero mass are left untouched (the constraint is vacuous there).
inline JointTable project_context(const JointTable& p, const Edge& edge,
                                  const Context& context) {
  const NodeSet abit = node_bit(edge.a), bbit = node_bit(edge.b);
  if (context.vars & (abit | bbit))
    throw SetsOverlapError("context must not assign the edge's own endpoints");
  if (context.ones & ~context.vars)
    throw Error("context assigns a value outside its key set");
  if (edge.a == edge.b) throw Error("degenerate edge");
  const NodeSet all = full_set(p.d);
  if ((abit | bbit | context.vars) & ~all) throw Error("node index out of range");

  JointTable out = p;
  const NodeSet omega = all & ~(context.vars | abit | bbit);
  for_each_subset(omega, [&](NodeSet w) {
    const std::size_t base = context.ones | w;
    const std::size_t i00 = base, i01 = base | bbit, i10 = base | abit,
                      i11 = base | abit | bbit;
    const double t00 = p.p[i00], t01 = p.p[i01], t10 = p.p[i10], t11 = p.p[i11];
    const double s = t00 + t01 + t10 + t11;
    if (!(s > 0)) return;
    out.p[i00] = (t00 + t01) * (t00 + t10) / s;
    out.p[i01] = (t00 + t01) * (t01 + t11) / s;
    out.p[i10] = (t10 + t11) * (t00 + t10) / s;
    out.p[i11] = (t10 + t11) * (t01 + t11) / s;
  });
  return out;
}

// The per-cycle projection order: every strata instance in deterministic
// (edge, context) order, then the graph projection.
struct ProjectionSchedule {
  UndirectedGraph graph;
  std::vector<std::pair<Edge, Context>> csi_steps;

  explicit ProjectionSchedule(const StratifiedGraph& sg)
      : graph(sg.graph), csi_steps(strata_instances(sg)) {}
};

struct ConvergenceReport {
  std::size_t cycles = 0;
  double final_change = 0.0;       // L1 change summed over the last cycle
  std::vector<double> kl_history;  // KL increment of every projection applied
  bool converged = false;
};

struct NotConvergedError : Error {
  JointTable partial;
  ConvergenceReport report;
  NotConvergedError(JointTable t, ConvergenceReport r)
      : Error("cyclical projections did not converge within the cycle limit"),
        partial(std::move(t)),
        report(std::move(r)) {}
};

inline constexpr double default_eps = 1e-9;
inline constexpr std::size_t default_max_cycles = 100000;

// Cyclical projection estimator: alternate all context projections and the
// graph projection until the L1 change over a full cycle drops below eps.
// The result is the maximum likelihood estimate under the model's
// restrictions for the observed distribution p0.
inline std::pair<JointTable, ConvergenceReport> cyclical_mle(
    const JointTable& p0, const StratifiedGraph& sg, double eps = default_eps,
    std::size_t max_cycles = default_max_cycles) {
  validate(sg);
  if (!(eps > 0)) throw Error("eps must be positive");
  if (sg.graph.node_count() != p0.d) throw Error("model and table node counts differ");
  const ProjectionSchedule schedule(sg);

  JointTable cur = p0;
  ConvergenceReport report;
  auto apply = [&](JointTable next, double& change) {
    double l1 = 0.0;
    for (std::size_t x = 0; x < cur.size(); ++x) l1 += std::abs(next.p[x] - cur.p[x]);
    change += l1;
    report.kl_history.push_back(kl_divergence(cur, next));
    cur = std::move(next);
  };

  for (std::size_t cycle = 1; cycle <= max_cycles; ++cycle) {
    double change = 0.0;
    for (const auto& [edge, ctx] : schedule.csi_steps)
      apply(project_context(cur, edge, ctx), change);
    apply(project_graph(cur, schedule.graph), change);
    report.cycles = cycle;
    report.final_change = change;
    if (change < eps) {
      report.converged = true;
      return {std::move(cur), std::move(report)};
    }
  }
  throw NotConvergedError(std::move(cur), std::move(report));
}

struct RestrictionCheck {
  double max_zeroed_violation = 0.0;
  double max_linear_violation = 0.0;
  bool pass = false;
};

// Converts to log-linear parameters and measures how far the table is from
// satisfying the restriction set.
inline RestrictionCheck check_restrictions(const JointTable& t, const RestrictionSet& rs,
                                           double tol) {
  const LogLinearParams params = theta_to_phi(t);  // throws ZeroCell
  RestrictionCheck out;
  for (NodeSet a : rs.zeroed)
    out.max_zeroed_violation = std::max(out.max_zeroed_violation, std::abs(params[a]));
  for (const Restriction& r : rs.linear) {
    double s = 0.0;
    for (NodeSet b : r.terms) s += params[b];
    out.max_linear_violation = std::max(out.max_linear_violation, std::abs(s));
  }
  out.pass = out.max_zeroed_violation < tol && out.max_linear_violation < tol;
  return out;
}

}  // namespace sgm
