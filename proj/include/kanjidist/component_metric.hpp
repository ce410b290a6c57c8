#pragma once

#include <array>
#include <optional>
#include <string>

#include "kanjidist/geometry.hpp"
#include "kanjidist/ubw.hpp"

namespace kanjidist {

/// Shape alpha >= 1 and midpoint x0 in (0, 1) of the logit-logistic transform.
struct PsiParams {
  double alpha = 1.0;
  double x0 = 0.5;

  static PsiParams identity() { return {1.0, 0.5}; }
  bool is_identity() const { return alpha == 1.0 && x0 == 0.5; }

  friend bool operator==(const PsiParams&, const PsiParams&) = default;
};

/// psi(x) = 1 / (1 + (x0/(1-x0) * (1-x)/x)^alpha), with psi(0) = 0, psi(1) = 1.
double psi(const PsiParams& params, double x);
/// Inverse of psi on [0, 1].
double psi_inverse(const PsiParams& params, double y);

struct RegistrationPenalties {
  double tau = 0.0;    // distance of box centers
  double sigma = 0.0;  // |log| ratio of geometric-mean side lengths
  double chi = 0.0;    // |log| ratio of aspect ratios
};

/// Smallest side length used in scale and aspect ratios: one source-grid unit.
inline constexpr double kMinBoxSide = 1.0 / kSourceCanvas;

/// Penalties between the unit-canvas bounding boxes of two components.
RegistrationPenalties registration_penalties(const BBox& box, const BBox& box2);

struct RasterParams {
  int n = 32;
  double line_width = 0.0;  // 0 selects default_line_width(n)

  double width() const { return line_width > 0.0 ? line_width : default_line_width(n); }

  friend bool operator==(const RasterParams&, const RasterParams&) = default;
};

struct RhoParams {
  std::array<double, 4> lambda{0.8, 0.1, 0.05, 0.05};
  std::array<PsiParams, 4> psi{PsiParams{2.0, 0.4}, PsiParams::identity(), PsiParams::identity(),
                               PsiParams::identity()};
  UbwParams ubw;
  bool label_override = true;
  /// The transport term enters as d_UBW / (ot_divisor * max(|C|, |C'|)).
  double ot_divisor = 0.2;

  friend bool operator==(const RhoParams&, const RhoParams&) = default;
};

/// Throws std::invalid_argument unless the lambdas are a probability vector
/// and every psi has alpha >= 1 and x0 in (0, 1).
void validate(const RhoParams& params);

bool labels_match(const std::optional<std::string>& l1, const std::optional<std::string>& l2);

struct RhoBreakdown {
  double transport = 0.0;  // d_UBW / (ot_divisor * max mass), before clamping
  RegistrationPenalties penalties;
  bool labels_match = false;
  double value = 0.0;
};

/// Combines the ingredients; arguments of psi are clamped to [0, 1].
double rho_from_terms(const RhoParams& params, double transport, const RegistrationPenalties& pen, bool same_label);

/// Lower bound on the transport term from the two ink masses alone.
double transport_lower_bound(const RhoParams& params, double mass, double mass2);

/// Everything rho needs to know about one component.
struct ComponentFeatures {
  std::optional<std::string> label;
  BBox box;           // unit canvas, before normalization
  PixelImage raster;  // normalized component
};

ComponentFeatures component_features(const ComponentGeometry& unit_geometry, std::optional<std::string> label,
                                     const RasterParams& raster);

RhoBreakdown rho(const ComponentFeatures& c, const ComponentFeatures& c2, const RhoParams& params);

}  // namespace kanjidist
