#include "kanjidist/rho_fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace kanjidist {

double clamp_response(double y) { return std::clamp(y, kResponseFloor, 1.0 - kResponseFloor); }

double logit(double u) { return std::log(u / (1.0 - u)); }

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

PsiFit fit_psi(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 3) throw std::invalid_argument("fit_psi: need at least three pairs");
  std::vector<double> lx, ly;
  for (const auto& [x, y] : xy) {
    if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("fit_psi: x must lie in (0, 1)");
    if (!std::isfinite(y)) throw std::invalid_argument("fit_psi: response is not finite");
    lx.push_back(logit(x));
    ly.push_back(logit(clamp_response(y)));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 1e-300)) throw std::invalid_argument("fit_psi: degenerate design, all x equal");
  PsiFit fit;
  fit.slope = sxy / sxx;
  if (!(fit.slope > 1e-12)) throw std::invalid_argument("fit_psi: non-positive slope, alpha >= 1 impossible");
  double alpha = fit.slope;
  double intercept = my - alpha * mx;
  if (alpha < 1.0) {
    fit.floored = true;
    alpha = 1.0;
    intercept = my - mx;
  }
  fit.intercept = intercept;
  // intercept = alpha * log((1 - x0) / x0)
  fit.params = {alpha, 1.0 / (1.0 + std::exp(intercept / alpha))};
  for (size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (alpha * lx[i] + intercept);
    fit.residual += e * e;
  }
  return fit;
}

std::vector<double> project_to_simplex(const std::vector<double>& v) {
  if (v.empty()) return {};
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = std::max(0.0, v[i] - theta);
  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  if (sum > 0.0) {
    for (double& x : out) x /= sum;
  }
  return out;
}

LambdaFit fit_lambdas(const std::vector<JudgmentRecord>& records, const std::array<PsiParams, 4>& psi_params,
                      double tolerance, int max_iterations) {
  if (records.size() < 4) throw std::invalid_argument("fit_lambdas: need at least four records");
  const Eigen::Index n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd z(n, 4);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rec = records[r];
    for (int i = 0; i < 4; ++i) {
      if (!std::isfinite(rec.features[i])) throw std::invalid_argument("fit_lambdas: feature is not finite");
      z(r, i) = psi(psi_params[i], std::clamp(rec.features[i], 0.0, 1.0));
    }
    y(r) = clamp_response(rec.y);
  }
  const Eigen::Matrix4d gram = z.transpose() * z;
  const Eigen::Vector4d zy = z.transpose() * y;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(gram);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || lmin <= 1e-12 * lmax) throw std::invalid_argument("fit_lambdas: rank-deficient design");

  const double step = 1.0 / lmax;
  std::vector<double> lambda(4, 0.25);
  LambdaFit fit;
  auto gradient = [&](const std::vector<double>& l) {
    Eigen::Vector4d v(l[0], l[1], l[2], l[3]);
    return Eigen::Vector4d(gram * v - zy);
  };
  auto stationarity = [&](const std::vector<double>& l) {
    const Eigen::Vector4d g = gradient(l);
    std::vector<double> moved(4);
    for (int i = 0; i < 4; ++i) moved[i] = l[i] - g(i);
    const auto p = project_to_simplex(moved);
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s = std::max(s, std::abs(p[i] - l[i]));
    return s;
  };
  for (int it = 0; it < max_iterations; ++it) {
    fit.stationarity = stationarity(lambda);
    fit.iterations = it;
    if (fit.stationarity < tolerance) break;
    const Eigen::Vector4d g = gradient(lambda);
    std::vector<double> moved(4);
    for (int i = 0; i < 4; ++i) moved[i] = lambda[i] - step * g(i);
    lambda = project_to_simplex(moved);
  }
  fit.stationarity = stationarity(lambda);
  if (fit.stationarity >= tolerance) throw std::runtime_error("fit_lambdas: no convergence");
  for (int i = 0; i < 4; ++i) fit.lambda[i] = lambda[i];
  const Eigen::Vector4d l(lambda[0], lambda[1], lambda[2], lambda[3]);
  fit.residual = (z * l - y).squaredNorm();
  return fit;
}

namespace {

std::vector<double> covariates(const JudgmentRecord& r) {
  std::vector<double> x(r.features.begin(), r.features.end());
  x.insert(x.end(), r.extra.begin(), r.extra.end());
  return x;
}

}  // namespace

NadarayaWatson nadaraya_watson(const std::vector<JudgmentRecord>& train, const std::vector<double>& query,
                               const std::vector<double>& bandwidth, Kernel kernel) {
  if (train.empty()) throw std::invalid_argument("nadaraya_watson: no training records");
  const size_t d = query.size();
  if (bandwidth.size() != 1 && bandwidth.size() != d) {
    throw std::invalid_argument("nadaraya_watson: bandwidth size must be 1 or the covariate count");
  }
  for (double h : bandwidth) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("nadaraya_watson: bandwidth must be positive");
  }
  std::vector<double> u2(train.size());
  for (size_t i = 0; i < train.size(); ++i) {
    const auto x = covariates(train[i]);
    if (x.size() != d) throw std::invalid_argument("nadaraya_watson: covariate count mismatch");
    double s = 0.0;
    for (size_t j = 0; j < d; ++j) {
      const double t = (query[j] - x[j]) / bandwidth[bandwidth.size() == 1 ? 0 : j];
      s += t * t;
    }
    u2[i] = s;
  }
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < train.size(); ++i) {
    const double w = kernel == Kernel::gaussian ? std::exp(-0.5 * u2[i]) : std::max(0.0, 1.0 - u2[i]);
    num += w * logit(clamp_response(train[i].y));
    den += w;
  }
  NadarayaWatson out;
  if (den > 0.0) {
    out.estimate = logistic(num / den);
  } else {
    out.fallback = true;
    const double nearest = *std::min_element(u2.begin(), u2.end());
    double sum = 0.0;
    int count = 0;
    for (size_t i = 0; i < train.size(); ++i) {
      if (u2[i] == nearest) {
        sum += logit(clamp_response(train[i].y));
        ++count;
      }
    }
    out.estimate = logistic(sum / count);
  }
  return out;
}

std::vector<JudgmentRecord> parse_judgments_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return cells;
  };
  if (!std::getline(in, line)) throw std::invalid_argument("judgments csv: empty input");
  const auto header = split(line);
  const std::array<std::string, 5> required{"ubw", "tau", "sigma", "chi", "y"};
  std::array<int, 5> column{-1, -1, -1, -1, -1};
  std::vector<int> extra_columns;
  for (size_t c = 0; c < header.size(); ++c) {
    auto it = std::find(required.begin(), required.end(), header[c]);
    if (it == required.end()) {
      extra_columns.push_back(static_cast<int>(c));
    } else {
      if (column[it - required.begin()] != -1) throw std::invalid_argument("judgments csv: duplicate column " + *it);
      column[it - required.begin()] = static_cast<int>(c);
    }
  }
  for (size_t k = 0; k < required.size(); ++k) {
    if (column[k] < 0) throw std::invalid_argument("judgments csv: missing column " + required[k]);
  }
  std::vector<JudgmentRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("judgments csv: line " + std::to_string(lineno) + " has the wrong column count");
    }
    auto number = [&](int c) {
      try {
        size_t used = 0;
        const double v = std::stod(cells[c], &used);
        if (used != cells[c].size() || !std::isfinite(v)) throw std::invalid_argument("");
        return v;
      } catch (const std::exception&) {
        throw std::invalid_argument("judgments csv: line " + std::to_string(lineno) + ": bad number '" + cells[c] +
                                    "'");
      }
    };
    JudgmentRecord r;
    for (int k = 0; k < 4; ++k) r.features[k] = number(column[k]);
    r.y = clamp_response(number(column[4]));
    for (int c : extra_columns) r.extra.push_back(number(c));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace kanjidist
