#pragma once

#include <vector>

namespace kanjidist {

struct LpResult {
  enum class Status { optimal, unbounded, iteration_limit } status = Status::optimal;
  double objective = 0.0;
  std::vector<double> x;
};

/// Dense tableau simplex for  min c.x  subject to  A x <= b, x >= 0, where
/// b >= 0 so the origin is feasible. `a` is row-major with `c.size()` columns.
/// Dantzig pricing, switching to Bland's rule after a run of degenerate pivots.
LpResult solve_lp_leq(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                      int max_iterations = 1000000);

}  // namespace kanjidist
