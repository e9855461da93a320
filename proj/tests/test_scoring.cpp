#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "sgm/scoring.hpp"
#include "testutil.hpp"

using namespace sgm;

namespace {

UndirectedGraph complete_graph(int d) {
  UndirectedGraph g(d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) g.add_edge(a, b);
  return g;
}

Dataset random_dataset(int d, std::size_t n, std::uint64_t seed) {
  const auto t = sgmtest::random_positive_table(d, seed);
  return Dataset::from_rows(d, sample(t, n, seed + 1));
}

}  // namespace

TEST_CASE("log_likelihood basics") {
  Dataset single = Dataset::from_rows(2, {2});
  JointTable uniform(2, 0.25);
  CHECK(log_likelihood(single, uniform) == Catch::Approx(std::log(0.25)).margin(1e-14));

  Dataset repeated = Dataset::from_rows(2, std::vector<std::uint32_t>(7, 3));
  JointTable t(2);
  t.p = {0.2, 0.3, 0.1, 0.4};
  CHECK(log_likelihood(repeated, t) == Catch::Approx(7 * std::log(0.4)).margin(1e-12));

  JointTable zero(2);
  zero.p = {0.5, 0.2, 0.3, 0.0};
  CHECK_THROWS_AS(log_likelihood(repeated, zero), ZeroCellError);
}

TEST_CASE("saturated model score is the plug-in closed form") {
  const Dataset data = random_dataset(3, 400, 11);
  const auto score = bic_score(data, StratifiedGraph(complete_graph(3)));
  double plugin = 0;
  const double n = static_cast<double>(data.n());
  for (double c : data.counts.p)
    if (c > 0) plugin += c * std::log(c / n);
  CHECK(score.loglik == Catch::Approx(plugin).margin(1e-9));
  CHECK(score.dim == 7);
  CHECK(score.bic == Catch::Approx(plugin - 3.5 * std::log(n)).margin(1e-9));
  CHECK(score.total == Catch::Approx(score.bic + score.log_prior).margin(1e-12));
}

TEST_CASE("single-variable dataset under the empty graph") {
  Dataset data = Dataset::from_rows(1, {0, 1, 1, 1, 0, 1, 1, 0});
  const auto score = bic_score(data, StratifiedGraph(UndirectedGraph(1)));
  const double n = 8, ones = 5;
  const double loglik = ones * std::log(ones / n) + (n - ones) * std::log(1 - ones / n);
  CHECK(score.loglik == Catch::Approx(loglik).margin(1e-10));
  CHECK(score.dim == 1);
  CHECK(score.bic == Catch::Approx(loglik - 0.5 * std::log(n)).margin(1e-10));
}

TEST_CASE("graph prior") {
  const StratifiedGraph empty3(UndirectedGraph(3));
  const StratifiedGraph full3(complete_graph(3));
  CHECK(graph_prior(empty3) == Catch::Approx(-3 * std::log(2.0)).margin(1e-12));
  CHECK(graph_prior(full3) == Catch::Approx(-7 * std::log(2.0)).margin(1e-12));
  // prior ratio complete vs empty = 2^-4
  CHECK(graph_prior(full3) - graph_prior(empty3) ==
        Catch::Approx(-4 * std::log(2.0)).margin(1e-12));

  // strata variant uses the adjusted dimension
  StratifiedGraph sg(complete_graph(3),
                     {Stratum{Edge(1, 2), {Context{node_bit(0), node_bit(0)}}}});
  CHECK(graph_prior(sg, PriorVariant::graph) ==
        Catch::Approx(-7 * std::log(2.0)).margin(1e-12));
  CHECK(graph_prior(sg, PriorVariant::strata) ==
        Catch::Approx(-6 * std::log(2.0)).margin(1e-12));
}

TEST_CASE("adding a context never increases the dimension") {
  const auto g = complete_graph(3);
  const Dataset data = random_dataset(3, 300, 5);
  int prev = dimension(StratifiedGraph(g));
  std::vector<Context> ctxs;
  for (NodeSet ones : {NodeSet{0}, node_bit(0)}) {
    ctxs.push_back(Context{node_bit(0), ones});
    const StratifiedGraph sg(g, {Stratum{Edge(1, 2), ctxs}});
    const int cur = dimension(sg);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("score is invariant to row order and consistent relabeling") {
  const Dataset data = random_dataset(3, 500, 77);
  StratifiedGraph sg(complete_graph(3),
                     {Stratum{Edge(1, 2), {Context{node_bit(0), node_bit(0)}}}});
  const auto base = bic_score(data, sg);

  // shuffled rows
  std::vector<std::uint32_t> rows = data.rows;
  std::reverse(rows.begin(), rows.end());
  std::rotate(rows.begin(), rows.begin() + 100, rows.end());
  const auto shuffled = bic_score(Dataset::from_rows(3, rows), sg);
  CHECK(shuffled.bic == Catch::Approx(base.bic).margin(1e-10));

  // swap variables 1 and 2 in both data and model (relabel 0<->1)
  std::vector<std::uint32_t> relabeled;
  for (std::uint32_t r : data.rows) {
    const std::uint32_t swapped =
        (r & ~3u) | ((r & 1u) << 1) | ((r >> 1) & 1u);
    relabeled.push_back(swapped);
  }
  StratifiedGraph sg2(complete_graph(3),
                      {Stratum{Edge(0, 2), {Context{node_bit(1), node_bit(1)}}}});
  const auto relabeled_score = bic_score(Dataset::from_rows(3, relabeled), sg2);
  CHECK(relabeled_score.bic == Catch::Approx(base.bic).margin(1e-9));
  CHECK(relabeled_score.dim == base.dim);
}

TEST_CASE("smoothing handles zero cells") {
  Dataset data = Dataset::from_rows(2, {0, 0, 1, 1, 1});  // cells 2 and 3 unseen
  const StratifiedGraph saturated(complete_graph(2));
  // unsmoothed saturated fit puts zero mass on unseen cells: loglik is finite
  const auto raw = bic_score(data, saturated);
  CHECK(std::isfinite(raw.loglik));
  const ScoreOptions opt{.smoothing = 0.25};
  const auto smoothed = bic_score(data, saturated, opt);
  CHECK(smoothed.loglik < raw.loglik);  // smoothing costs likelihood
}

TEST_CASE("score cache returns identical values and deduplicates") {
  const Dataset data = random_dataset(3, 200, 9);
  StratifiedGraph sg(complete_graph(3),
                     {Stratum{Edge(1, 2), {Context{node_bit(0), 0}}}});
  ScoreCache cache;
  const auto a = cache.get(data, sg, {});
  const auto b = cache.get(data, sg, {});
  CHECK(cache.size() == 1);
  CHECK(a.total == b.total);
  CHECK(a.total == Catch::Approx(bic_score(data, sg).total).margin(1e-12));
}

TEST_CASE("bic_score rejects an empty dataset") {
  Dataset empty;
  empty.d = 2;
  empty.counts = JointTable(2);
  CHECK_THROWS_AS(bic_score(empty, StratifiedGraph(complete_graph(2))), Error);
}
