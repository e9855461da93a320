#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgm/sgm.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_not_converged = 3;
constexpr int exit_internal = 4;

struct RunConfig {
  std::string command;
  std::string data_path;
  std::string model_path;
  std::string table_path;
  double eps = sgm::default_eps;
  std::size_t max_cycles = sgm::default_max_cycles;
  std::uint64_t seed = 0;
  std::size_t outer_iters = 100;
  std::size_t inner_iters = 0;  // 0 = pick from the graph size
  double smooth = 0.0;
  std::size_t n = 0;
  std::string out_path;
  std::string prior = "graph";
  double check_tol = 1e-6;
  std::size_t top_k = 10;
};

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  if (!c.data_path.empty()) j["data"] = c.data_path;
  if (!c.model_path.empty()) j["model"] = c.model_path;
  if (!c.table_path.empty()) j["table"] = c.table_path;
  j["eps"] = c.eps;
  j["max_cycles"] = c.max_cycles;
  if (c.command == "search" || c.command == "search-strata" || c.command == "gen")
    j["seed"] = c.seed;
  if (c.command == "search") j["outer_iters"] = c.outer_iters;
  if (c.command == "search" || c.command == "search-strata")
    j["inner_iters"] = c.inner_iters;
  j["smooth"] = c.smooth;
  if (c.command == "gen") j["n"] = c.n;
  if (!c.out_path.empty()) j["out"] = c.out_path;
  j["prior"] = c.prior;
  return j;
}

sgm::ScoreOptions score_options(const RunConfig& c) {
  sgm::ScoreOptions opt;
  opt.eps = c.eps;
  opt.max_cycles = c.max_cycles;
  opt.smoothing = c.smooth;
  opt.prior = c.prior == "strata" ? sgm::PriorVariant::strata : sgm::PriorVariant::graph;
  return opt;
}

void write_or_print(const std::string& out_path, const ordered_json& j) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw sgm::Error("cannot write " + out_path);
    out << j.dump(2) << "\n";
  }
}

sgm::Dataset load_data(const RunConfig& c) {
  sgm::Dataset ds = sgm::load_csv(c.data_path);
  for (const std::string& w : ds.warnings) std::cerr << "warning: " << w << "\n";
  return ds;
}

sgm::StratifiedGraph load_model_checked(const std::string& path) {
  std::vector<std::string> warnings;
  sgm::StratifiedGraph sg = sgm::load_model(path, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  return sg;
}

ordered_json score_json(const sgm::ModelScore& s) {
  ordered_json j;
  j["loglik"] = s.loglik;
  j["dim"] = s.dim;
  j["bic"] = s.bic;
  j["log_prior"] = s.log_prior;
  j["total"] = s.total;
  return j;
}

int cmd_fit(const RunConfig& c) {
  const sgm::Dataset data = load_data(c);
  const sgm::StratifiedGraph sg = load_model_checked(c.model_path);
  sgm::validate(sg);
  const sgm::JointTable p0 = data.empirical(c.smooth);

  ordered_json out;
  out["config"] = config_json(c);
  sgm::JointTable fitted;
  try {
    auto [table, report] = sgm::cyclical_mle(p0, sg, c.eps, c.max_cycles);
    fitted = std::move(table);
    out["converged"] = true;
    out["cycles"] = report.cycles;
    out["final_change"] = report.final_change;
    double kl_sum = 0;
    for (double v : report.kl_history) kl_sum += v;
    out["kl_projections"] = report.kl_history.size();
    out["kl_sum"] = kl_sum;
  } catch (const sgm::NotConvergedError& e) {
    fitted = e.partial;
    out["converged"] = false;
    out["cycles"] = e.report.cycles;
    out["final_change"] = e.report.final_change;
    out["table"] = sgm::table_to_json(fitted);
    write_or_print(c.out_path, out);
    std::cerr << "error: " << e.what() << "\n";
    return exit_not_converged;
  }

  out["loglik"] = sgm::log_likelihood(data, fitted);
  try {
    const sgm::RestrictionCheck check =
        sgm::check_restrictions(fitted, sgm::derive_restrictions(sg), c.check_tol);
    out["restriction_check"] = {{"tol", c.check_tol},
                                {"max_zeroed_violation", check.max_zeroed_violation},
                                {"max_linear_violation", check.max_linear_violation},
                                {"pass", check.pass}};
  } catch (const sgm::ZeroCellError&) {
    out["restriction_check"] = {{"status", "skipped: fitted table has zero cells"}};
  }
  out["table"] = sgm::table_to_json(fitted);
  write_or_print(c.out_path, out);
  return exit_ok;
}

int cmd_score(const RunConfig& c) {
  const sgm::Dataset data = load_data(c);
  const sgm::StratifiedGraph sg = load_model_checked(c.model_path);
  const sgm::ModelScore s = sgm::bic_score(data, sg, score_options(c));
  ordered_json out = score_json(s);
  out["config"] = config_json(c);
  write_or_print(c.out_path, out);
  return exit_ok;
}

void write_search_outputs(const RunConfig& c, const sgm::SearchTrace& trace,
                          const std::vector<std::string>& names) {
  const auto posterior = sgm::posterior_estimate(trace);
  std::vector<std::pair<std::string, const sgm::SearchState*>> ranked;
  for (const auto& [key, state] : trace.visited) ranked.emplace_back(key, &state);
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.second->score.total != y.second->score.total)
      return x.second->score.total > y.second->score.total;
    return x.first < y.first;
  });

  ordered_json report;
  report["config"] = config_json(c);
  report["seed"] = trace.seed;
  report["iterations"] = trace.iterations;
  report["distinct_states"] = trace.visited.size();
  report["best"] = {{"model", sgm::model_to_json(trace.best->model)},
                    {"score", score_json(trace.best->score)}};
  report["top"] = ordered_json::array();
  for (std::size_t i = 0; i < ranked.size() && i < c.top_k; ++i) {
    report["top"].push_back({{"model", sgm::model_to_json(ranked[i].second->model)},
                             {"score", score_json(ranked[i].second->score)},
                             {"posterior", posterior.at(ranked[i].first)}});
  }

  if (c.out_path.empty()) {
    std::cout << report.dump(2) << "\n";
    return;
  }
  write_or_print(c.out_path + ".report.json", report);
  std::ofstream tracef(c.out_path + ".trace.jsonl");
  if (!tracef) throw sgm::Error("cannot write " + c.out_path + ".trace.jsonl");
  for (const sgm::IterationRecord& rec : trace.events) {
    ordered_json line;
    line["iter"] = rec.iter;
    line["proposed"] = rec.proposed;
    line["accepted"] = rec.accepted;
    line["total_score"] = rec.total;
    tracef << line.dump() << "\n";
  }
  sgm::save_model(c.out_path + ".model.json", trace.best->model);
  std::ofstream dotf(c.out_path + ".model.dot");
  if (!dotf) throw sgm::Error("cannot write " + c.out_path + ".model.dot");
  dotf << sgm::export_dot(trace.best->model, names);
}

int cmd_search(const RunConfig& c) {
  const sgm::Dataset data = load_data(c);
  RunConfig cfg = c;
  if (cfg.inner_iters == 0) {
    // default budget scales with the number of possible strata hosts
    cfg.inner_iters = 200 * std::max<std::size_t>(1, data.d);
  }
  sgm::ScoreCache cache;
  const sgm::SearchTrace trace = sgm::full_search(data, cfg.outer_iters, cfg.inner_iters,
                                                  cfg.seed, cache, score_options(cfg));
  write_search_outputs(cfg, trace, data.names);
  return exit_ok;
}

int cmd_search_strata(const RunConfig& c) {
  const sgm::Dataset data = load_data(c);
  const sgm::StratifiedGraph sg = load_model_checked(c.model_path);
  sgm::validate(sg);
  RunConfig cfg = c;
  if (cfg.inner_iters == 0)
    cfg.inner_iters = 200 * std::max<std::size_t>(1, sg.graph.edge_count());
  sgm::ScoreCache cache;
  const sgm::SearchTrace trace = sgm::strata_search(sg.graph, data, cfg.inner_iters,
                                                    cfg.seed, cache, score_options(cfg));
  write_search_outputs(cfg, trace, data.names);
  return exit_ok;
}

int cmd_gen(const RunConfig& c) {
  const sgm::JointTable t = sgm::load_table(c.table_path);
  if (!c.model_path.empty()) {
    const sgm::StratifiedGraph sg = load_model_checked(c.model_path);
    sgm::validate(sg);
    try {
      const sgm::RestrictionCheck check =
          sgm::check_restrictions(t, sgm::derive_restrictions(sg), c.check_tol);
      if (!check.pass)
        std::cerr << "warning: table violates the model's restrictions (max "
                  << std::max(check.max_zeroed_violation, check.max_linear_violation)
                  << ")\n";
    } catch (const sgm::ZeroCellError&) {
      std::cerr << "warning: table has zero cells; restriction check skipped\n";
    }
  }
  const auto rows = sgm::sample(t, c.n, c.seed);
  const sgm::Dataset ds = sgm::Dataset::from_rows(t.d, rows);
  if (c.out_path.empty())
    throw sgm::Error("gen requires --out for the CSV");
  sgm::save_csv(c.out_path, ds);
  return exit_ok;
}

int cmd_export_dot(const RunConfig& c) {
  const sgm::StratifiedGraph sg = load_model_checked(c.model_path);
  std::vector<std::string> names;
  if (!c.data_path.empty()) names = load_data(c).names;
  const std::string dot = sgm::export_dot(sg, names);
  if (c.out_path.empty()) {
    std::cout << dot;
  } else {
    std::ofstream out(c.out_path);
    if (!out) throw sgm::Error("cannot write " + c.out_path);
    out << dot;
  }
  return exit_ok;
}

int cmd_validate(const RunConfig& c) {
  const sgm::StratifiedGraph sg = load_model_checked(c.model_path);
  sgm::validate(sg);  // throws on invalid
  std::cout << "ok\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stratified graphical models: fit, score and search"};
  app.require_subcommand(1);
  RunConfig c;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--eps", c.eps, "cyclical projection convergence threshold")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-cycles", c.max_cycles, "projection cycle limit");
    sub->add_option("--smooth", c.smooth, "add-lambda smoothing of the empirical table")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", c.out_path, "output path (search: path prefix)");
    sub->add_option("--prior", c.prior, "structure prior dimension: graph or strata")
        ->check(CLI::IsMember({"graph", "strata"}));
  };

  CLI::App* fit = app.add_subcommand("fit", "maximum likelihood fit of a model");
  fit->add_option("--data", c.data_path)->required();
  fit->add_option("--model", c.model_path)->required();
  fit->add_option("--check-tol", c.check_tol, "restriction check tolerance");
  add_common(fit);

  CLI::App* score = app.add_subcommand("score", "BIC score of a model");
  score->add_option("--data", c.data_path)->required();
  score->add_option("--model", c.model_path)->required();
  add_common(score);

  CLI::App* search = app.add_subcommand("search", "search graphs and strata");
  search->add_option("--data", c.data_path)->required();
  search->add_option("--seed", c.seed)->required();
  search->add_option("--outer-iters", c.outer_iters);
  search->add_option("--inner-iters", c.inner_iters);
  search->add_option("--top-k", c.top_k);
  add_common(search);

  CLI::App* sstrata = app.add_subcommand("search-strata",
                                         "search strata for a fixed graph");
  sstrata->add_option("--data", c.data_path)->required();
  sstrata->add_option("--model", c.model_path, "model file providing the graph")
      ->required();
  sstrata->add_option("--seed", c.seed)->required();
  sstrata->add_option("--inner-iters", c.inner_iters, "chain length");
  sstrata->add_option("--top-k", c.top_k);
  add_common(sstrata);

  CLI::App* gen = app.add_subcommand("gen", "sample a synthetic CSV from a table");
  gen->add_option("--table", c.table_path, "JSON with probs or phi")->required();
  gen->add_option("--n", c.n, "number of rows")->required();
  gen->add_option("--seed", c.seed)->required();
  gen->add_option("--model", c.model_path, "optional model to check against");
  gen->add_option("--check-tol", c.check_tol);
  add_common(gen);

  CLI::App* dot = app.add_subcommand("export-dot", "render a model as DOT");
  dot->add_option("--model", c.model_path)->required();
  dot->add_option("--data", c.data_path, "CSV supplying variable names");
  dot->add_option("--out", c.out_path);

  CLI::App* val = app.add_subcommand("validate", "validate a model file");
  val->add_option("--model", c.model_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return c.command = "fit", cmd_fit(c);
    if (score->parsed()) return c.command = "score", cmd_score(c);
    if (search->parsed()) return c.command = "search", cmd_search(c);
    if (sstrata->parsed()) return c.command = "search-strata", cmd_search_strata(c);
    if (gen->parsed()) return c.command = "gen", cmd_gen(c);
    if (dot->parsed()) return c.command = "export-dot", cmd_export_dot(c);
    if (val->parsed()) return c.command = "validate", cmd_validate(c);
  } catch (const sgm::NotConvergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_not_converged;
  } catch (const sgm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_input;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_internal;
}
