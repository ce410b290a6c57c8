#pragma once

#include <vector>

#include "json.hpp"
#include "kanjidist/geometry.hpp"

namespace kanjidist {

struct UbwParams {
  double p = 1.0;  // exponent of the ground distance
  double b = 0.4;  // reach: moving farther than b never beats delete + create

  friend bool operator==(const UbwParams&, const UbwParams&) = default;
};

struct TransportEntry {
  int from_row = 0, from_col = 0;
  int to_row = 0, to_col = 0;
  double mass = 0.0;
};

/// Sparse plan between a source image C and a target image C'.
struct TransportPlan {
  int n = 0;
  std::vector<TransportEntry> entries;
  double transported = 0.0;  // total plan mass
  double source_mass = 0.0;
  double target_mass = 0.0;
  std::vector<double> destroyed_cells;  // per source cell, row-major
  std::vector<double> created_cells;    // per target cell, row-major

  double destroyed() const { return source_mass - transported; }
  double created() const { return target_mass - transported; }
};

struct UbwResult {
  double cost = 0.0;
  TransportPlan plan;
};

/// Exact unbalanced Wasserstein distance
///   min_P ( sum delta^p P + (|C| + |C'| - 2|P|) b^p / 2 )^(1/p)
/// over sub-couplings P, solved as a min-cost flow. Cell masses are quantized
/// to max(|C|, |C'|) * 2^-40 for the flow; the cost is recomputed from the plan.
/// Throws std::invalid_argument for differing resolutions or two empty images.
UbwResult ubw_distance(const PixelImage& c, const PixelImage& c2, const UbwParams& params = {});

/// ubw_distance / (b * max(|C|, |C'|)), in [0, 1] for p = 1.
double relative_ubw(const PixelImage& c, const PixelImage& c2, const UbwParams& params = {});
double relative_from_cost(double cost, double mass, double mass2, const UbwParams& params);

/// Same program as ubw_distance written as a dense LP over all N^4 couplings.
/// Throws std::invalid_argument for N > 8.
double brute_oracle(const PixelImage& c, const PixelImage& c2, const UbwParams& params = {});

/// Euclidean distance (canvas units) from every cell center to the nearest
/// cell with positive mass; +inf everywhere for an empty image.
std::vector<double> ink_distance_field(const PixelImage& image);

/// Lower bound on ubw_distance from dual-feasible potentials, without solving
/// the transport problem. For p = 1 the potentials are clipped distances to
/// the ink of either image; otherwise only the mass difference is used.
double ubw_lower_bound(const PixelImage& c, const PixelImage& c2, const UbwParams& params = {});

/// Entries at distance zero are left implicit and reported as "stationary".
void to_json(nlohmann::json& j, const TransportPlan& plan);

}  // namespace kanjidist
