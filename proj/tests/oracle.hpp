#pragma once

// Test-only oracle: a constrained KL minimizer that shares no algorithmic
// path with the cyclical projection estimator. Models are expressed from
// first principles as cross-ratio constraints on log-probabilities:
//   - pairwise Markov: for every NON-adjacent pair and every slice of the
//     remaining variables, the 2x2 cross ratio is 1;
//   - each stratum context: the same, restricted to the matching slices.
// Both are linear equalities in u = log q, so the feasible set is
// {softmax(u) : A u = 0} and minimizing KL(p0 | q) over it is convex.

#include <cmath>
#include <cstddef>
#include <vector>

#include "sgm/bits.hpp"
#include "sgm/stratified.hpp"
#include "sgm/table.hpp"

namespace sgmtest {

struct OracleModel {
  int d = 0;
  std::vector<std::vector<double>> rows;  // constraints A u = 0 over 2^d coords
};

inline void add_cross_ratio_rows(OracleModel& m, int a, int b, sgm::NodeSet fixed_vars,
                                 sgm::NodeSet fixed_ones) {
  const sgm::NodeSet abit = sgm::node_bit(a), bbit = sgm::node_bit(b);
  const sgm::NodeSet omega =
      sgm::full_set(m.d) & ~(abit | bbit | fixed_vars);
  sgm::for_each_subset(omega, [&](sgm::NodeSet w) {
    std::vector<double> row(std::size_t{1} << m.d, 0.0);
    const std::size_t base = fixed_ones | w;
    row[base] += 1;                 // (0,0)
    row[base | abit | bbit] += 1;   // (1,1)
    row[base | abit] -= 1;          // (1,0)
    row[base | bbit] -= 1;          // (0,1)
    m.rows.push_back(std::move(row));
  });
}

inline OracleModel oracle_model(const sgm::StratifiedGraph& sg) {
  OracleModel m;
  m.d = sg.graph.node_count();
  for (int a = 0; a < m.d; ++a)
    for (int b = a + 1; b < m.d; ++b)
      if (!sg.graph.has_edge(a, b)) add_cross_ratio_rows(m, a, b, 0, 0);
  for (const sgm::Stratum& st : sg.strata)
    for (const sgm::Context& c : st.contexts)
      add_cross_ratio_rows(m, st.edge.a, st.edge.b, c.vars, c.ones);
  return m;
}

namespace detail {

// Nullspace basis of A via Gaussian elimination with partial pivoting.
inline std::vector<std::vector<double>> nullspace(std::vector<std::vector<double>> a,
                                                  std::size_t cols) {
  const double tol = 1e-9;
  std::vector<int> pivot_col;
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < a.size(); ++col) {
    std::size_t piv = row;
    for (std::size_t r = row + 1; r < a.size(); ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < tol) continue;
    std::swap(a[row], a[piv]);
    const double lead = a[row][col];
    for (double& v : a[row]) v /= lead;
    for (std::size_t r = 0; r < a.size(); ++r) {
      if (r == row || a[r][col] == 0) continue;
      const double f = a[r][col];
      for (std::size_t c2 = 0; c2 < cols; ++c2) a[r][c2] -= f * a[row][c2];
    }
    pivot_col.push_back(static_cast<int>(col));
    ++row;
  }
  std::vector<bool> is_pivot(cols, false);
  for (int c : pivot_col) is_pivot[static_cast<std::size_t>(c)] = true;
  std::vector<std::vector<double>> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<double> v(cols, 0.0);
    v[free] = 1.0;
    for (std::size_t r = 0; r < pivot_col.size(); ++r)
      v[static_cast<std::size_t>(pivot_col[r])] = -a[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

inline int numeric_rank(const std::vector<std::vector<double>>& a, std::size_t cols) {
  if (a.empty()) return 0;
  return static_cast<int>(cols - nullspace(a, cols).size());
}

// Solves (H + ridge I) x = g in place; H small and symmetric.
inline std::vector<double> solve(std::vector<std::vector<double>> h,
                                 std::vector<double> g, double ridge) {
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) h[i][i] += ridge;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(h[r][col]) > std::abs(h[piv][col])) piv = r;
    std::swap(h[col], h[piv]);
    std::swap(g[col], g[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = h[r][col] / h[col][col];
      for (std::size_t c2 = col; c2 < n; ++c2) h[r][c2] -= f * h[col][c2];
      g[r] -= f * g[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = g[i];
    for (std::size_t c2 = i + 1; c2 < n; ++c2) s -= h[i][c2] * x[c2];
    x[i] = s / h[i][i];
  }
  return x;
}

}  // namespace detail

// Free parameter count of the model manifold: nullity of the constraint
// system minus one (the overall scale of u). A numeric cross-check for the
// exact dimension computation.
inline int oracle_dimension(const sgm::StratifiedGraph& sg) {
  const OracleModel m = oracle_model(sg);
  const std::size_t cells = std::size_t{1} << m.d;
  if (m.rows.empty()) return static_cast<int>(cells) - 1;
  return static_cast<int>(cells) - detail::numeric_rank(m.rows, cells) - 1;
}

// Damped Newton minimization of KL(p0 | softmax(Bc)) over the constraint
// nullspace; convex, run to a tight gradient tolerance.
inline sgm::JointTable oracle_kl_minimizer(const sgm::JointTable& p0,
                                           const OracleModel& m,
                                           double grad_tol = 1e-12,
                                           std::size_t max_iter = 500) {
  const std::size_t cells = std::size_t{1} << m.d;
  const auto basis = m.rows.empty()
                         ? std::vector<std::vector<double>>{ }
                         : detail::nullspace(m.rows, cells);
  std::vector<std::vector<double>> b = basis;
  if (m.rows.empty()) {
    b.assign(cells, std::vector<double>(cells, 0.0));
    for (std::size_t i = 0; i < cells; ++i) b[i][i] = 1.0;
  }
  const std::size_t k = b.size();

  std::vector<double> c(k, 0.0);
  std::vector<double> u(cells, 0.0), q(cells, 0.0);
  auto eval = [&](const std::vector<double>& cc, std::vector<double>& uu,
                  std::vector<double>& qq) {
    for (std::size_t x = 0; x < cells; ++x) {
      double s = 0;
      for (std::size_t j = 0; j < k; ++j) s += b[j][x] * cc[j];
      uu[x] = s;
    }
    double mx = uu[0];
    for (double v : uu) mx = std::max(mx, v);
    double z = 0;
    for (std::size_t x = 0; x < cells; ++x) z += std::exp(uu[x] - mx);
    const double lse = mx + std::log(z);
    double f = lse;
    for (std::size_t x = 0; x < cells; ++x) {
      qq[x] = std::exp(uu[x] - lse);
      f -= p0.p[x] * uu[x];
    }
    return f;
  };

  double f = eval(c, u, q);
  for (std::size_t it = 0; it < max_iter; ++it) {
    // gradient over c: B^T (q - p0)
    std::vector<double> grad(k, 0.0);
    double gmax = 0;
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0;
      for (std::size_t x = 0; x < cells; ++x) s += b[j][x] * (q[x] - p0.p[x]);
      grad[j] = s;
      gmax = std::max(gmax, std::abs(s));
    }
    if (gmax < grad_tol) break;
    // Hessian over c: B^T (diag(q) - q q^T) B
    std::vector<double> bq(k, 0.0);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t x = 0; x < cells; ++x) bq[j] += b[j][x] * q[x];
    std::vector<std::vector<double>> h(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i; j < k; ++j) {
        double s = 0;
        for (std::size_t x = 0; x < cells; ++x) s += b[i][x] * q[x] * b[j][x];
        h[i][j] = h[j][i] = s - bq[i] * bq[j];
      }
    std::vector<double> step = detail::solve(h, grad, 1e-12);
    double alpha = 1.0;
    std::vector<double> cand(k), u2(cells), q2(cells);
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < k; ++j) cand[j] = c[j] - alpha * step[j];
      const double f2 = eval(cand, u2, q2);
      if (f2 <= f) {
        c = cand;
        u = u2;
        q = q2;
        f = f2;
        break;
      }
      alpha /= 2;
    }
  }

  sgm::JointTable out;
  out.d = m.d;
  out.p = q;
  return out;
}

inline sgm::JointTable oracle_kl_minimizer(const sgm::JointTable& p0,
                                           const sgm::StratifiedGraph& sg,
                                           double grad_tol = 1e-12) {
  return oracle_kl_minimizer(p0, oracle_model(sg), grad_tol);
}

}  // namespace sgmtest
