#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "kanjidist/engine.hpp"

namespace kanjidist {

struct DistanceMatrix {
  std::vector<char32_t> codepoints;
  std::vector<double> values;  // row-major, size() x size()
  std::string fingerprint;

  size_t size() const { return codepoints.size(); }
  double at(size_t i, size_t j) const { return values[i * codepoints.size() + j]; }
  double& at(size_t i, size_t j) { return values[i * codepoints.size() + j]; }
  /// Throws UnknownKanjiError.
  size_t index_of(char32_t cp) const;
};

/// All pairwise distances of `cps` (duplicates rejected), filled in parallel.
DistanceMatrix distance_matrix(Engine& engine, const std::vector<char32_t>& cps);

/// Neighbors of a row in ascending (distance, codepoint) order.
std::vector<Neighbor> knn(const DistanceMatrix& m, char32_t query, int k);

/// Seeds, their `first_k` nearest neighbors, and the `second_k` nearest
/// neighbors of each of those, in order of first appearance.
std::vector<char32_t> neighborhood_set(Engine& engine, const std::vector<char32_t>& seeds, int first_k,
                                       int second_k);

struct TriangleAudit {
  std::int64_t triples = 0;
  std::int64_t violating_triples = 0;     // triples with at least one violated inequality
  std::int64_t violated_inequalities = 0;
  double worst_gap = 0.0;                 // max of d(i,j) - d(i,k) - d(k,j)
  std::vector<std::array<char32_t, 3>> worst;  // violating triples, largest gap first (at most 20)

  double violation_rate() const { return triples ? static_cast<double>(violating_triples) / triples : 0.0; }
};

/// Checks d(i,j) <= d(i,k) + d(k,j) + tolerance for every triple.
TriangleAudit triangle_audit(const DistanceMatrix& m, double tolerance = 1e-12);

struct FocusedPoint {
  char32_t cp = 0;
  double r = 0.0;
  double theta = 0.0;  // [0, 2 pi)
};

struct FocusedLayout {
  char32_t center = 0;
  std::vector<FocusedPoint> points;  // placement order
  double stress = 0.0;               // over all placed pairs
};

/// Radial layout: radius = exact distance to the center, angles chosen one
/// kanji at a time (ascending distance) to minimize the squared chord errors
/// against those already placed.
FocusedLayout focused_mds(const DistanceMatrix& m, char32_t center);

/// Minimizes the squared error of the chord to already placed points over
/// the angle; golden-section search on `restarts` equal arcs.
double best_angle(double r, const std::vector<FocusedPoint>& placed, const std::vector<double>& targets,
                  int restarts = 16, double tolerance = 1e-6);

struct MdsResult {
  std::vector<std::vector<double>> coords;  // per point, `dims` values
  double stress = 0.0;                      // raw stress sum_{i<j} (|x_i - x_j| - d_ij)^2
  int iterations = 0;
  std::vector<double> stress_trace;         // initial configuration first
};

/// Classical scaling followed by SMACOF majorization; stops when the stress
/// decrease falls below `tolerance` or after `max_iterations`.
MdsResult classical_mds(const DistanceMatrix& m, int dims = 2);
MdsResult metric_mds(const DistanceMatrix& m, int dims = 2, int max_iterations = 500, double tolerance = 1e-8);
double raw_stress(const DistanceMatrix& m, const std::vector<std::vector<double>>& coords);

// Color brackets of distance tables: index 0 is [0, 0.075), index 5 is
// [0.175, 0.2) and index 6 everything from 0.2 on.
inline constexpr std::array<double, 6> kBracketBounds{0.075, 0.1, 0.125, 0.15, 0.175, 0.2};
int bracket_index(double d);
std::string bracket_label(int index);
std::string bracket_color(int index);

// Exports
std::string matrix_to_csv(const DistanceMatrix& m);
DistanceMatrix matrix_from_csv(const std::string& text);
/// Little-endian f64 row-major data plus a JSON sidecar with codepoints and fingerprint.
void write_matrix_binary(const DistanceMatrix& m, const std::filesystem::path& data,
                         const std::filesystem::path& sidecar);
DistanceMatrix read_matrix_binary(const std::filesystem::path& data, const std::filesystem::path& sidecar);

/// {center, center_kanji, points: [{cp, kanji, r, theta, bracket, color}], stress}
nlohmann::json layout_json(const FocusedLayout& layout);
/// {mode: "global", points: [{cp, kanji, x, y}], stress, iterations}
nlohmann::json global_layout_json(const DistanceMatrix& m, const MdsResult& mds);
/// Circles at multiples of `ring_step` around the center.
std::string focused_svg(const FocusedLayout& layout, double ring_step = 0.05);
std::string global_svg(const DistanceMatrix& m, const MdsResult& mds);

}  // namespace kanjidist
