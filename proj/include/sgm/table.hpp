#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sgm/bits.hpp"
#include "sgm/error.hpp"
#include "sgm/rng.hpp"

namespace sgm {

// Default cap on dense storage; 2^20 doubles is 8 MB. Raise explicitly for
// bigger problems.
inline constexpr int default_max_table_nodes = 20;

// Dense joint distribution (or count table) over d binary variables.
// Cell index convention: bit i of the index is the value of variable i.
// External formats label variables 1-based, so bit 0 <-> X1 ("lsb=var1").
struct JointTable {
  int d = 0;
  std::vector<double> p;

  JointTable() = default;
  explicit JointTable(int d_, double fill = 0.0, int max_d = default_max_table_nodes)
      : d(d_), p(std::size_t{1} << d_, fill) {
    if (d_ < 1 || d_ > max_d)
      throw Error("table node count must be in 1.." + std::to_string(max_d));
  }

  std::size_t size() const { return p.size(); }
  double& operator[](std::size_t i) { return p[i]; }
  double operator[](std::size_t i) const { return p[i]; }

  double sum() const {
    double s = 0;
    for (double v : p) s += v;
    return s;
  }

  bool strictly_positive() const {
    for (double v : p)
      if (!(v > 0)) return false;
    return true;
  }

  JointTable& normalize() {
    const double s = sum();
    if (!(s > 0)) throw ZeroCellError("cannot normalize a table with zero mass");
    for (double& v : p) v /= s;
    return *this;
  }
};

// Sums out every variable outside `a`; the result is reindexed over the
// kept variables in ascending node order and preserves total mass.
inline JointTable marginal(const JointTable& t, NodeSet a) {
  a &= full_set(t.d);
  JointTable out;
  out.d = set_size(a);
  out.p.assign(std::size_t{1} << out.d, 0.0);
  for (std::size_t x = 0; x < t.size(); ++x) out.p[compress_bits(x, a)] += t.p[x];
  return out;
}

// In the full index space: m[x] depends only on x & a.
inline std::vector<double> marginal_values(const JointTable& t, NodeSet a) {
  std::vector<double> m(std::size_t{1} << set_size(a), 0.0);
  for (std::size_t x = 0; x < t.size(); ++x) m[compress_bits(x, a)] += t.p[x];
  return m;
}

inline double kl_divergence(const JointTable& p, const JointTable& q) {
  if (p.d != q.d) throw SupportMismatchError("KL divergence needs equal node counts");
  double s = 0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (p.p[x] == 0) continue;
    if (!(q.p[x] > 0))
      throw SupportMismatchError("KL divergence undefined: q vanishes on the support of p");
    s += p.p[x] * std::log(p.p[x] / q.p[x]);
  }
  // Gibbs' inequality guarantees s >= 0; rounding can leave a tiny negative.
  if (s < 0 && s > -1e-12) s = 0;
  return s;
}

// n i.i.d. draws from t, as cell-index bitmasks. Inverse-CDF over the cells;
// deterministic given the seed.
inline std::vector<std::uint32_t> sample(const JointTable& t, std::size_t n,
                                         std::uint64_t seed) {
  std::vector<double> cdf(t.size());
  double acc = 0;
  for (std::size_t x = 0; x < t.size(); ++x) {
    acc += t.p[x];
    cdf[x] = acc;
  }
  Rng rng(seed);
  std::vector<std::uint32_t> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    std::size_t lo = 0, hi = t.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cdf[mid] > u)
        hi = mid;
      else
        lo = mid + 1;
    }
    rows.push_back(static_cast<std::uint32_t>(lo));
  }
  return rows;
}

}  // namespace sgm
