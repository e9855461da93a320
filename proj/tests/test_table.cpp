#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sgm/loglinear.hpp"
#include "sgm/table.hpp"
#include "testutil.hpp"

using namespace sgm;

TEST_CASE("theta_to_phi on the uniform distribution") {
  JointTable t(2, 0.25);
  const auto phi = theta_to_phi(t);
  CHECK(phi[0] == Catch::Approx(std::log(0.25)).margin(1e-14));
  for (NodeSet a = 1; a < 4; ++a) CHECK(phi[a] == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("independence kills the pairwise term") {
  const double p = 0.3, q = 0.8;
  JointTable t(2);
  t.p = {(1 - p) * (1 - q), p * (1 - q), (1 - p) * q, p * q};
  const auto phi = theta_to_phi(t);
  CHECK(phi[nodes_to_set({0, 1})] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("theta_to_phi requires positivity") {
  JointTable t(1);
  t.p = {1.0, 0.0};
  CHECK_THROWS_AS(theta_to_phi(t), ZeroCellError);
}

TEST_CASE("a table with independence in the X1=1 slice satisfies the sum restriction") {
  // X2 and X3 independent given X1=1: factorize that slice
  JointTable t(3);
  const double p1 = 0.4, r = 0.3, s = 0.7;
  // X1=0 slice: arbitrary positive cells summing to 1-p1
  const double rest[4] = {0.2, 0.3, 0.1, 0.4};
  for (int x2 = 0; x2 < 2; ++x2)
    for (int x3 = 0; x3 < 2; ++x3) {
      const std::size_t idx0 = (x2 << 1) | (x3 << 2);
      t.p[idx0] = (1 - p1) * rest[x2 * 2 + x3];
      const double pr2 = x2 ? r : 1 - r, pr3 = x3 ? s : 1 - s;
      t.p[idx0 | 1] = p1 * pr2 * pr3;
    }
  REQUIRE(t.sum() == Catch::Approx(1.0).margin(1e-12));
  const auto phi = theta_to_phi(t);
  CHECK(phi[nodes_to_set({1, 2})] + phi[nodes_to_set({0, 1, 2})] ==
        Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("phi_to_theta") {
  LogLinearParams params;
  params.d = 2;
  params.phi = {0, 0, 0, 0};
  const auto uniform = phi_to_theta(params);
  for (double v : uniform.p) CHECK(v == Catch::Approx(0.25).margin(1e-14));

  LogLinearParams one;
  one.d = 1;
  one.phi = {0.0, std::log(3.0)};
  const auto t = phi_to_theta(one);
  CHECK(t.p[0] == Catch::Approx(0.25).margin(1e-14));
  CHECK(t.p[1] == Catch::Approx(0.75).margin(1e-14));
}

TEST_CASE("phi/theta roundtrip") {
  for (int d : {1, 3, 6, 12}) {
    const auto t = sgmtest::random_positive_table(d, 42 + d);
    const auto back = phi_to_theta(theta_to_phi(t));
    CHECK(sgmtest::max_abs_diff(t, back) < 1e-10);
  }
}

TEST_CASE("kl divergence") {
  const auto p = sgmtest::random_positive_table(3, 1);
  CHECK(kl_divergence(p, p) == 0.0);

  JointTable point(1), half(1);
  point.p = {1.0, 0.0};
  half.p = {0.5, 0.5};
  CHECK(kl_divergence(point, half) == Catch::Approx(std::log(2.0)).margin(1e-14));

  JointTable a(1), b(1);
  a.p = {0.25, 0.75};
  b.p = {0.75, 0.25};
  CHECK(kl_divergence(a, b) == Catch::Approx(0.5 * std::log(3.0)).margin(1e-12));
  CHECK(kl_divergence(b, a) == Catch::Approx(0.5 * std::log(3.0)).margin(1e-12));

  CHECK_THROWS_AS(kl_divergence(half, point), SupportMismatchError);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto x = sgmtest::random_positive_table(4, seed * 2);
    const auto y = sgmtest::random_positive_table(4, seed * 2 + 1);
    CHECK(kl_divergence(x, y) >= 0.0);
  }
}

TEST_CASE("marginal") {
  JointTable uniform(3, 0.125);
  const auto m = marginal(uniform, nodes_to_set({0, 2}));
  REQUIRE(m.d == 2);
  for (double v : m.p) CHECK(v == Catch::Approx(0.25).margin(1e-14));

  const double p = 0.3, q = 0.8;
  JointTable prod(2);
  prod.p = {(1 - p) * (1 - q), p * (1 - q), (1 - p) * q, p * q};
  const auto mp = marginal(prod, node_bit(0));
  CHECK(mp.p[0] == Catch::Approx(1 - p).margin(1e-14));
  CHECK(mp.p[1] == Catch::Approx(p).margin(1e-14));

  const auto t = sgmtest::random_positive_table(4, 9);
  const auto full = marginal(t, full_set(4));
  CHECK(sgmtest::max_abs_diff(t, full) == 0.0);
}

TEST_CASE("marginal consistency") {
  const auto t = sgmtest::random_positive_table(5, 17);
  const NodeSet a = nodes_to_set({0, 2, 3});
  const NodeSet b = nodes_to_set({2, 3});
  // b expressed inside a's compressed coordinates
  const NodeSet b_in_a = nodes_to_set({1, 2});
  const auto two_step = marginal(marginal(t, a), b_in_a);
  const auto one_step = marginal(t, b);
  CHECK(sgmtest::max_abs_diff(two_step, one_step) < 1e-14);
  CHECK(one_step.sum() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("sampling") {
  const auto t = sgmtest::random_positive_table(3, 5);
  CHECK(sample(t, 0, 1).empty());

  JointTable degenerate(2);
  degenerate.p = {0, 0, 1.0, 0};
  for (std::uint32_t r : sample(degenerate, 50, 7)) CHECK(r == 2);

  JointTable coin(1, 0.5);
  const auto rows = sample(coin, 1000000, 123);
  double ones = 0;
  for (std::uint32_t r : rows) ones += r;
  CHECK(std::abs(ones / 1e6 - 0.5) < 0.0015);  // 3 sigma

  // deterministic given the seed
  CHECK(sample(t, 100, 99) == sample(t, 100, 99));
}
