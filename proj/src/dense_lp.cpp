#include "kanjidist/dense_lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kanjidist {

LpResult solve_lp_leq(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                      int max_iterations) {
  const size_t rows = b.size();
  const size_t cols = c.size();
  if (a.size() != rows * cols) throw std::invalid_argument("solve_lp_leq: matrix size mismatch");
  for (double v : b) {
    if (v < 0.0) throw std::invalid_argument("solve_lp_leq: right-hand side must be nonnegative");
  }
  constexpr double eps = 1e-11;

  // Tableau columns: structural, slack, rhs. Last row holds reduced costs.
  const size_t width = cols + rows + 1;
  std::vector<double> t((rows + 1) * width, 0.0);
  auto at = [&](size_t r, size_t k) -> double& { return t[r * width + k]; };
  std::vector<size_t> basis(rows);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t k = 0; k < cols; ++k) at(r, k) = a[r * cols + k];
    at(r, cols + r) = 1.0;
    at(r, width - 1) = b[r];
    basis[r] = cols + r;
  }
  for (size_t k = 0; k < cols; ++k) at(rows, k) = c[k];

  LpResult result;
  int degenerate_run = 0;
  for (int iter = 0;; ++iter) {
    if (iter >= max_iterations) {
      result.status = LpResult::Status::iteration_limit;
      break;
    }
    const bool bland = degenerate_run > 50;
    size_t enter = width;
    double best = -eps;
    for (size_t k = 0; k + 1 < width; ++k) {
      const double rc = at(rows, k);
      if (rc < best) {
        enter = k;
        if (bland) break;
        best = rc;
      }
    }
    if (enter == width) break;

    size_t leave = rows;
    double ratio = 0.0;
    for (size_t r = 0; r < rows; ++r) {
      const double coef = at(r, enter);
      if (coef <= eps) continue;
      const double q = at(r, width - 1) / coef;
      if (leave == rows || q < ratio - 1e-12 || (std::abs(q - ratio) <= 1e-12 && basis[r] < basis[leave])) {
        leave = r;
        ratio = q;
      }
    }
    if (leave == rows) {
      result.status = LpResult::Status::unbounded;
      return result;
    }
    degenerate_run = ratio <= 1e-12 ? degenerate_run + 1 : 0;

    const double pivot = at(leave, enter);
    for (size_t k = 0; k < width; ++k) at(leave, k) /= pivot;
    for (size_t r = 0; r <= rows; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      double* dst = &t[r * width];
      const double* src = &t[leave * width];
      for (size_t k = 0; k < width; ++k) dst[k] -= f * src[k];
      dst[enter] = 0.0;
    }
    basis[leave] = enter;
  }

  result.x.assign(cols, 0.0);
  for (size_t r = 0; r < rows; ++r) {
    if (basis[r] < cols) result.x[basis[r]] = std::max(0.0, at(r, width - 1));
  }
  result.objective = 0.0;
  for (size_t k = 0; k < cols; ++k) result.objective += c[k] * result.x[k];
  return result;
}

}  // namespace kanjidist
