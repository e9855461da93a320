#pragma once

#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "sgm/dataset.hpp"
#include "sgm/projection.hpp"
#include "sgm/stratified.hpp"

namespace sgm {

struct ModelScore {
  double loglik = 0.0;
  int dim = 0;
  double bic = 0.0;        // loglik - (dim/2) log n
  double log_prior = 0.0;  // unnormalized
  double total = 0.0;      // bic + log_prior
};

inline double log_likelihood(const Dataset& data, const JointTable& t) {
  if (data.d != t.d) throw Error("dataset and table node counts differ");
  double s = 0.0;
  for (std::size_t x = 0; x < t.size(); ++x) {
    const double c = data.counts.p[x];
    if (c == 0) continue;
    if (!(t.p[x] > 0))
      throw ZeroCellError("fitted distribution vanishes on an observed cell");
    s += c * std::log(t.p[x]);
  }
  return s;
}

enum class PriorVariant {
  graph,   // penalize by the underlying graph's parameter count
  strata,  // penalize by the strata-adjusted parameter count
};

// log P(G_L) up to an additive constant: -|Theta_G| log 2, where |Theta_G|
// is by default the parameter count of the underlying graph alone.
inline double graph_prior(const StratifiedGraph& sg,
                          PriorVariant variant = PriorVariant::graph) {
  validate(sg);
  const int k = variant == PriorVariant::graph
                    ? dimension(StratifiedGraph(sg.graph))
                    : dimension(sg);
  return -k * std::log(2.0);
}

struct ScoreOptions {
  double eps = default_eps;
  std::size_t max_cycles = default_max_cycles;
  double smoothing = 0.0;  // add-lambda on the empirical table
  PriorVariant prior = PriorVariant::graph;
};

inline ModelScore bic_score(const Dataset& data, const StratifiedGraph& sg,
                            const ScoreOptions& opt = {}) {
  validate(sg);
  if (data.rows.empty()) throw Error("cannot score an empty dataset");
  const auto [mle, report] = cyclical_mle(data.empirical(opt.smoothing), sg, opt.eps,
                                          opt.max_cycles);
  ModelScore score;
  score.loglik = log_likelihood(data, mle);
  score.dim = dimension(sg);
  score.bic = score.loglik - score.dim / 2.0 * std::log(static_cast<double>(data.n()));
  score.log_prior = graph_prior(sg, opt.prior);
  score.total = score.bic + score.log_prior;
  return score;
}

// Memo for search: scores are pure in (data, model, options), and the chain
// revisits states constantly. Keyed by the canonical model form; safe for
// concurrent use, and identical keys always map to identical values.
class ScoreCache {
 public:
  std::optional<ModelScore> find(const std::string& key) const {
    std::lock_guard lock(mu_);
    const auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  void store(const std::string& key, const ModelScore& score) {
    std::lock_guard lock(mu_);
    map_[key] = score;
  }

  ModelScore get(const Dataset& data, const StratifiedGraph& sg, const ScoreOptions& opt) {
    const std::string key = canonical_key(sg);
    if (auto hit = find(key)) return *hit;
    const ModelScore score = bic_score(data, sg, opt);
    store(key, score);
    return score;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return map_.size();
  }

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, ModelScore> map_;
};

}  // namespace sgm
