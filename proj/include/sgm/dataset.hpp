#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgm/error.hpp"
#include "sgm/table.hpp"

namespace sgm {

// Binary dataset: rows stored as cell-index bitmasks (bit i = variable i),
// with the contingency table of counts kept alongside.
struct Dataset {
  int d = 0;
  std::vector<std::uint32_t> rows;
  std::vector<std::string> names;     // X1..Xd unless a header renames them
  std::vector<std::string> warnings;  // non-fatal ingestion notes
  JointTable counts;                  // frequency mode: entries sum to n

  std::size_t n() const { return rows.size(); }

  static Dataset from_rows(int d, std::vector<std::uint32_t> rows,
                           std::vector<std::string> names = {}) {
    Dataset ds;
    ds.d = d;
    ds.rows = std::move(rows);
    ds.counts = JointTable(d);
    for (std::uint32_t r : ds.rows) {
      if (r >= ds.counts.size()) throw DomainError("row value out of range");
      ds.counts.p[r] += 1.0;
    }
    if (names.empty())
      for (int j = 1; j <= d; ++j) ds.names.push_back("X" + std::to_string(j));
    else
      ds.names = std::move(names);
    return ds;
  }

  // Empirical distribution, optionally add-lambda smoothed. lambda = 0 keeps
  // zero cells as zeros; callers that need strict positivity pick lambda.
  JointTable empirical(double lambda = 0.0) const {
    if (rows.empty()) throw Error("dataset is empty");
    JointTable t = counts;
    for (double& v : t.p) v += lambda;
    return t.normalize();
  }
};

}  // namespace sgm
