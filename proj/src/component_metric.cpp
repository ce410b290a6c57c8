#include "kanjidist/component_metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kanjidist {

double psi(const PsiParams& params, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (params.is_identity()) return x;
  const double odds = (params.x0 / (1.0 - params.x0)) * ((1.0 - x) / x);
  return 1.0 / (1.0 + std::pow(odds, params.alpha));
}

double psi_inverse(const PsiParams& params, double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  if (params.is_identity()) return y;
  // (1-x)/x = ((1-y)/y)^(1/alpha) * (1-x0)/x0
  const double ratio = std::pow((1.0 - y) / y, 1.0 / params.alpha) * (1.0 - params.x0) / params.x0;
  return 1.0 / (1.0 + ratio);
}

RegistrationPenalties registration_penalties(const BBox& box, const BBox& box2) {
  const Point c = box.center();
  const Point c2 = box2.center();
  const double w = std::max(box.width(), kMinBoxSide);
  const double h = std::max(box.height(), kMinBoxSide);
  const double w2 = std::max(box2.width(), kMinBoxSide);
  const double h2 = std::max(box2.height(), kMinBoxSide);
  RegistrationPenalties out;
  out.tau = std::hypot(c.x - c2.x, c.y - c2.y);
  out.sigma = std::abs(0.5 * (std::log(w * h) - std::log(w2 * h2)));
  out.chi = std::abs(std::log(w / h) - std::log(w2 / h2));
  return out;
}

void validate(const RhoParams& params) {
  double sum = 0.0;
  for (double l : params.lambda) {
    if (!(l >= 0.0)) throw std::invalid_argument("rho: lambdas must be nonnegative");
    sum += l;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("rho: lambdas must sum to one");
  for (const auto& p : params.psi) {
    if (!(p.alpha >= 1.0) || !(p.x0 > 0.0 && p.x0 < 1.0)) throw std::invalid_argument("rho: invalid psi parameters");
  }
  if (!(params.ot_divisor > 0.0)) throw std::invalid_argument("rho: ot_divisor must be positive");
}

bool labels_match(const std::optional<std::string>& l1, const std::optional<std::string>& l2) {
  return l1 && l2 && *l1 == *l2;
}

double rho_from_terms(const RhoParams& params, double transport, const RegistrationPenalties& pen, bool same_label) {
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  const double ot = (same_label && params.label_override) ? 0.0 : transport;
  const double v = params.lambda[0] * psi(params.psi[0], clamp01(ot)) +
                   params.lambda[1] * psi(params.psi[1], clamp01(pen.tau)) +
                   params.lambda[2] * psi(params.psi[2], clamp01(pen.sigma)) +
                   params.lambda[3] * psi(params.psi[3], clamp01(pen.chi));
  return clamp01(v);
}

double transport_lower_bound(const RhoParams& params, double mass, double mass2) {
  const double p = params.ubw.p;
  const double cost = std::pow(std::abs(mass - mass2) * std::pow(params.ubw.b, p) / 2.0, 1.0 / p);
  return cost / (params.ot_divisor * std::max(mass, mass2));
}

ComponentFeatures component_features(const ComponentGeometry& unit_geometry, std::optional<std::string> label,
                                     const RasterParams& raster) {
  ComponentFeatures f;
  f.label = std::move(label);
  f.box = bounding_box(unit_geometry);
  f.raster = rasterize(normalize_component(unit_geometry).geometry, raster.n, raster.width());
  return f;
}

RhoBreakdown rho(const ComponentFeatures& c, const ComponentFeatures& c2, const RhoParams& params) {
  RhoBreakdown out;
  out.labels_match = labels_match(c.label, c2.label);
  out.penalties = registration_penalties(c.box, c2.box);
  if (!(out.labels_match && params.label_override)) {
    const auto r = ubw_distance(c.raster, c2.raster, params.ubw);
    out.transport = r.cost / (params.ot_divisor * std::max(r.plan.source_mass, r.plan.target_mass));
  }
  out.value = rho_from_terms(params, out.transport, out.penalties, out.labels_match);
  return out;
}

}  // namespace kanjidist
