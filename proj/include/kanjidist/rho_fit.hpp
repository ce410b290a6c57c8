#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "kanjidist/component_metric.hpp"

namespace kanjidist {

inline constexpr double kResponseFloor = 1e-4;

/// One similarity judgment: relative transport, tau, sigma, chi, then any
/// extra covariates, and the perceived dissimilarity y.
struct JudgmentRecord {
  std::array<double, 4> features{};
  std::vector<double> extra;
  double y = 0.0;
};

/// Clamps a response to [1e-4, 1 - 1e-4].
double clamp_response(double y);
double logit(double u);
double logistic(double t);

struct PsiFit {
  PsiParams params;
  double slope = 0.0;      // raw OLS slope before flooring
  double intercept = 0.0;  // alpha * log((1 - x0) / x0)
  bool floored = false;    // slope was below 1 and alpha was set to 1
  double residual = 0.0;   // sum of squared logit residuals
};

/// Least squares of logit(y) on logit(x). Needs at least three pairs with x in
/// (0, 1), not all equal, and a positive slope.
PsiFit fit_psi(const std::vector<std::pair<double, double>>& xy);

struct LambdaFit {
  std::array<double, 4> lambda{};
  double residual = 0.0;  // sum of squared errors
  double stationarity = 0.0;
  int iterations = 0;
};

/// Simplex-constrained least squares of y on psi_i(feature_i), by projected
/// gradient until the projected step is below `tolerance`.
LambdaFit fit_lambdas(const std::vector<JudgmentRecord>& records, const std::array<PsiParams, 4>& psi,
                      double tolerance = 1e-8, int max_iterations = 1000000);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(const std::vector<double>& v);

enum class Kernel { gaussian, epanechnikov };

struct NadarayaWatson {
  double estimate = 0.0;
  bool fallback = false;  // every kernel weight was zero; nearest records used
};

/// Kernel mean of logit(y) mapped back through the unit logistic. The
/// bandwidth holds one entry per covariate (features then extras) or a
/// single entry used for all of them.
NadarayaWatson nadaraya_watson(const std::vector<JudgmentRecord>& train, const std::vector<double>& query,
                               const std::vector<double>& bandwidth, Kernel kernel = Kernel::gaussian);

/// Columns ubw, tau, sigma, chi, y in any order; other columns become extra
/// covariates in header order.
std::vector<JudgmentRecord> parse_judgments_csv(const std::string& text);

}  // namespace kanjidist
