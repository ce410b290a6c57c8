#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kanjidist {

/// Side length of the kanjiVG source canvas.
inline constexpr double kSourceCanvas = 109.0;

/// Largest side of a normalized component box.
inline constexpr double kNormalizedExtent = 0.98;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct CubicBezier {
  Point p0, p1, p2, p3;

  Point at(double t) const;
  Point derivative(double t) const;

  friend bool operator==(const CubicBezier&, const CubicBezier&) = default;
};

using BezierPath = std::vector<CubicBezier>;

/// One drawable stroke as stored in kanjiVG: 1-based stroke number, optional
/// stroke-type tag and a connected chain of cubic segments in source
/// coordinates (109 x 109 canvas).
struct Stroke {
  int index = 0;
  std::optional<std::string> type_tag;
  BezierPath path;

  friend bool operator==(const Stroke&, const Stroke&) = default;
};

/// Strokes of one component in unit-canvas coordinates.
struct ComponentGeometry {
  std::vector<BezierPath> strokes;
};

struct BBox {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Point center() const { return {(xmin + xmax) / 2.0, (ymin + ymax) / 2.0}; }
  BBox united(const BBox& other) const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Affine map applied by normalize_component: p' = (p - center) * scale + (0.5, 0.5).
struct NormalizationRecord {
  Point center;
  double scale = 1.0;
};

struct NormalizedComponent {
  ComponentGeometry geometry;
  NormalizationRecord record;
};

/// N x N grid of nonnegative ink masses, row-major with rows along y.
/// Cell (r, s) has its center at ((2s + 1) / 2N, (2r + 1) / 2N).
class PixelImage {
 public:
  PixelImage() = default;
  explicit PixelImage(int n);

  int n() const { return n_; }
  double& at(int row, int col) { return cells_[static_cast<size_t>(row) * n_ + col]; }
  double at(int row, int col) const { return cells_[static_cast<size_t>(row) * n_ + col]; }
  std::span<const double> cells() const { return cells_; }
  std::span<double> cells() { return cells_; }

  double total() const;
  /// An image can enter a transport problem only if it carries ink.
  bool valid_for_transport() const { return total() > 0.0; }

  /// 64-bit FNV-1a digest over the resolution and cell bit patterns.
  std::uint64_t digest() const;

  friend bool operator==(const PixelImage&, const PixelImage&) = default;

 private:
  int n_ = 0;
  std::vector<double> cells_;
};

/// Arc length of a path in its own coordinate units (adaptive Gauss-Legendre).
double curve_length(std::span<const CubicBezier> path);

/// Arc length of a kanjiVG stroke in unit-canvas units.
double stroke_length(const Stroke& stroke);

/// Tight box of a path, curve extrema included.
BBox path_bounds(std::span<const CubicBezier> path);

/// Tight box over all strokes of a component. Throws on an empty component.
BBox bounding_box(const ComponentGeometry& component);

/// Converts kanjiVG source strokes to unit-canvas geometry.
ComponentGeometry to_unit_canvas(std::span<const Stroke> strokes);

/// Centers the bounding box at (0.5, 0.5) and scales its larger side to 0.98.
/// A component with zero extent in both axes is only centered.
NormalizedComponent normalize_component(const ComponentGeometry& component);

ComponentGeometry transform(const ComponentGeometry& component, const NormalizationRecord& record);

/// Default stroke width for rasterization: two pixels at resolution n.
inline double default_line_width(int n) { return 2.0 / n; }

/// Constant-width stroke rendering with round caps and joins. Each cell holds
/// its ink coverage in [0, 1] from 4 x 4 subpixel sampling; overlapping strokes
/// are not counted twice. Throws std::invalid_argument for n < 8.
PixelImage rasterize(const ComponentGeometry& component, int n, double line_width);
inline PixelImage rasterize(const ComponentGeometry& component, int n) {
  return rasterize(component, n, default_line_width(n));
}

/// Plain PGM (P2) with cells scaled by 10^4.
std::string to_pgm(const PixelImage& image);

}  // namespace kanjidist
