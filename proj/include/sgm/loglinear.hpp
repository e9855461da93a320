#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sgm/bits.hpp"
#include "sgm/error.hpp"
#include "sgm/table.hpp"

namespace sgm {

// Log-linear parameterization of a strictly positive joint table:
//   log P(x) = sum over subsets A of ones(x) of phi_A,
// using the binary convention that a term vanishes whenever one of its
// variables is 0, so each subset A carries a single number phi[A].
// phi is indexed by the subset bitmask; phi[0] is the normalizing term.
struct LogLinearParams {
  int d = 0;
  std::vector<double> phi;

  double operator[](NodeSet a) const { return phi[a]; }
};

namespace detail {

// In-place subset-sum (zeta) transform: f[S] <- sum over A subset of S of f[A].
inline void subset_zeta(std::vector<double>& f, int d) {
  for (int i = 0; i < d; ++i)
    for (std::size_t s = 0; s < f.size(); ++s)
      if (s & (std::size_t{1} << i)) f[s] += f[s ^ (std::size_t{1} << i)];
}

// Inverse (Moebius) transform.
inline void subset_moebius(std::vector<double>& f, int d) {
  for (int i = 0; i < d; ++i)
    for (std::size_t s = 0; s < f.size(); ++s)
      if (s & (std::size_t{1} << i)) f[s] -= f[s ^ (std::size_t{1} << i)];
}

}  // namespace detail

inline LogLinearParams theta_to_phi(const JointTable& t) {
  LogLinearParams out;
  out.d = t.d;
  out.phi.resize(t.size());
  for (std::size_t x = 0; x < t.size(); ++x) {
    if (!(t.p[x] > 0))
      throw ZeroCellError("theta_to_phi requires a strictly positive table");
    out.phi[x] = std::log(t.p[x]);
  }
  detail::subset_moebius(out.phi, t.d);
  return out;
}

// Any real phi yields a positive distribution; the output is normalized, so
// the value of phi[0] only shifts the normalizing constant.
inline JointTable phi_to_theta(const LogLinearParams& params) {
  std::vector<double> logp = params.phi;
  detail::subset_zeta(logp, params.d);
  const double m = *std::max_element(logp.begin(), logp.end());
  JointTable out;
  out.d = params.d;
  out.p.resize(logp.size());
  double z = 0;
  for (std::size_t x = 0; x < logp.size(); ++x) {
    out.p[x] = std::exp(logp[x] - m);
    z += out.p[x];
  }
  for (double& v : out.p) v /= z;
  return out;
}

}  // namespace sgm
