#include "kanjidist/geometry.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kanjidist {

namespace {

Point lerp(Point a, Point b, double t) { return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t}; }

double norm(Point v) { return std::hypot(v.x, v.y); }

// 5-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                            0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                              0.2369268850561891, 0.2369268850561891};

double speed_integral(const CubicBezier& c, double a, double b) {
  const double half = (b - a) / 2.0;
  const double mid = (a + b) / 2.0;
  double sum = 0.0;
  for (size_t k = 0; k < kGlNodes.size(); ++k) sum += kGlWeights[k] * norm(c.derivative(mid + half * kGlNodes[k]));
  return sum * half;
}

double adaptive_length(const CubicBezier& c, double a, double b, double whole, int depth) {
  const double m = (a + b) / 2.0;
  const double left = speed_integral(c, a, m);
  const double right = speed_integral(c, m, b);
  if (depth >= 24 || std::abs(left + right - whole) <= 1e-12 * std::max(1.0, whole)) return left + right;
  return adaptive_length(c, a, m, left, depth + 1) + adaptive_length(c, m, b, right, depth + 1);
}

double segment_length(const CubicBezier& c) { return adaptive_length(c, 0.0, 1.0, speed_integral(c, 0.0, 1.0), 0); }

// Roots in (0, 1) of the derivative of one coordinate of a cubic.
void axis_extrema(double p0, double p1, double p2, double p3, std::vector<double>& ts) {
  const double d0 = p1 - p0;
  const double d1 = p2 - p1;
  const double d2 = p3 - p2;
  const double qa = d0 - 2.0 * d1 + d2;
  const double qb = 2.0 * (d1 - d0);
  const double qc = d0;
  auto push = [&](double t) {
    if (t > 0.0 && t < 1.0) ts.push_back(t);
  };
  if (std::abs(qa) < 1e-15) {
    if (std::abs(qb) > 1e-15) push(-qc / qb);
    return;
  }
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  push((-qb + sq) / (2.0 * qa));
  push((-qb - sq) / (2.0 * qa));
}

struct Segment {
  Point a, b;
};

void flatten(const CubicBezier& c, double tolerance, int depth, std::vector<Segment>& out) {
  // Flat when both inner control points lie within tolerance of the chord.
  const Point chord{c.p3.x - c.p0.x, c.p3.y - c.p0.y};
  const double len = norm(chord);
  auto dist = [&](Point p) {
    if (len < 1e-15) return norm({p.x - c.p0.x, p.y - c.p0.y});
    return std::abs((p.x - c.p0.x) * chord.y - (p.y - c.p0.y) * chord.x) / len;
  };
  if (depth >= 16 || std::max(dist(c.p1), dist(c.p2)) <= tolerance) {
    out.push_back({c.p0, c.p3});
    return;
  }
  const Point p01 = lerp(c.p0, c.p1, 0.5);
  const Point p12 = lerp(c.p1, c.p2, 0.5);
  const Point p23 = lerp(c.p2, c.p3, 0.5);
  const Point p012 = lerp(p01, p12, 0.5);
  const Point p123 = lerp(p12, p23, 0.5);
  const Point mid = lerp(p012, p123, 0.5);
  flatten({c.p0, p01, p012, mid}, tolerance, depth + 1, out);
  flatten({mid, p123, p23, c.p3}, tolerance, depth + 1, out);
}

double point_segment_dist2(double px, double py, const Segment& s) {
  const double vx = s.b.x - s.a.x;
  const double vy = s.b.y - s.a.y;
  const double wx = px - s.a.x;
  const double wy = py - s.a.y;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = wx - t * vx;
  const double dy = wy - t * vy;
  return dx * dx + dy * dy;
}

}  // namespace

Point CubicBezier::at(double t) const {
  const double u = 1.0 - t;
  const double b0 = u * u * u;
  const double b1 = 3.0 * u * u * t;
  const double b2 = 3.0 * u * t * t;
  const double b3 = t * t * t;
  return {b0 * p0.x + b1 * p1.x + b2 * p2.x + b3 * p3.x, b0 * p0.y + b1 * p1.y + b2 * p2.y + b3 * p3.y};
}

Point CubicBezier::derivative(double t) const {
  const double u = 1.0 - t;
  const double b0 = 3.0 * u * u;
  const double b1 = 6.0 * u * t;
  const double b2 = 3.0 * t * t;
  return {b0 * (p1.x - p0.x) + b1 * (p2.x - p1.x) + b2 * (p3.x - p2.x),
          b0 * (p1.y - p0.y) + b1 * (p2.y - p1.y) + b2 * (p3.y - p2.y)};
}

BBox BBox::united(const BBox& other) const {
  return {std::min(xmin, other.xmin), std::max(xmax, other.xmax), std::min(ymin, other.ymin),
          std::max(ymax, other.ymax)};
}

PixelImage::PixelImage(int n) : n_(n), cells_(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0) {
  if (n <= 0) throw std::invalid_argument("PixelImage: resolution must be positive");
}

double PixelImage::total() const {
  double sum = 0.0;
  for (double c : cells_) sum += c;
  return sum;
}

std::uint64_t PixelImage::digest() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int k = 0; k < 8; ++k) {
      h ^= (v >> (8 * k)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(n_));
  for (double c : cells_) mix(std::bit_cast<std::uint64_t>(c == 0.0 ? 0.0 : c));
  return h;
}

double curve_length(std::span<const CubicBezier> path) {
  double total = 0.0;
  for (const auto& c : path) total += segment_length(c);
  return total;
}

double stroke_length(const Stroke& stroke) { return curve_length(stroke.path) / kSourceCanvas; }

BBox path_bounds(std::span<const CubicBezier> path) {
  if (path.empty()) throw std::invalid_argument("path_bounds: empty path");
  BBox box{path.front().p0.x, path.front().p0.x, path.front().p0.y, path.front().p0.y};
  auto include = [&](Point p) {
    box.xmin = std::min(box.xmin, p.x);
    box.xmax = std::max(box.xmax, p.x);
    box.ymin = std::min(box.ymin, p.y);
    box.ymax = std::max(box.ymax, p.y);
  };
  std::vector<double> ts;
  for (const auto& c : path) {
    include(c.p0);
    include(c.p3);
    ts.clear();
    axis_extrema(c.p0.x, c.p1.x, c.p2.x, c.p3.x, ts);
    axis_extrema(c.p0.y, c.p1.y, c.p2.y, c.p3.y, ts);
    for (double t : ts) include(c.at(t));
  }
  return box;
}

BBox bounding_box(const ComponentGeometry& component) {
  std::optional<BBox> box;
  for (const auto& stroke : component.strokes) {
    if (stroke.empty()) continue;
    const BBox b = path_bounds(stroke);
    box = box ? box->united(b) : b;
  }
  if (!box) throw std::invalid_argument("bounding_box: component has no strokes");
  return *box;
}

ComponentGeometry to_unit_canvas(std::span<const Stroke> strokes) {
  ComponentGeometry out;
  out.strokes.reserve(strokes.size());
  auto scale = [](Point p) { return Point{p.x / kSourceCanvas, p.y / kSourceCanvas}; };
  for (const auto& s : strokes) {
    BezierPath path;
    path.reserve(s.path.size());
    for (const auto& c : s.path) path.push_back({scale(c.p0), scale(c.p1), scale(c.p2), scale(c.p3)});
    out.strokes.push_back(std::move(path));
  }
  return out;
}

ComponentGeometry transform(const ComponentGeometry& component, const NormalizationRecord& record) {
  auto map = [&](Point p) {
    return Point{(p.x - record.center.x) * record.scale + 0.5, (p.y - record.center.y) * record.scale + 0.5};
  };
  ComponentGeometry out;
  out.strokes.reserve(component.strokes.size());
  for (const auto& stroke : component.strokes) {
    BezierPath path;
    path.reserve(stroke.size());
    for (const auto& c : stroke) path.push_back({map(c.p0), map(c.p1), map(c.p2), map(c.p3)});
    out.strokes.push_back(std::move(path));
  }
  return out;
}

NormalizedComponent normalize_component(const ComponentGeometry& component) {
  const BBox box = bounding_box(component);
  const double extent = std::max(box.width(), box.height());
  NormalizationRecord record{box.center(), extent > 0.0 ? kNormalizedExtent / extent : 1.0};
  return {transform(component, record), record};
}

PixelImage rasterize(const ComponentGeometry& component, int n, double line_width) {
  if (n < 8) throw std::invalid_argument("rasterize: resolution below 8 is too coarse for transport");
  if (!(line_width > 0.0)) throw std::invalid_argument("rasterize: line width must be positive");
  constexpr int kSub = 4;
  const int grid = n * kSub;
  const double step = 1.0 / grid;
  const double hw = line_width / 2.0;
  const double hw2 = hw * hw;

  std::vector<Segment> segments;
  for (const auto& stroke : component.strokes) {
    for (const auto& c : stroke) flatten(c, 1e-4, 0, segments);
  }

  std::vector<std::uint8_t> mask(static_cast<size_t>(grid) * grid, 0);
  auto index_range = [&](double lo, double hi) {
    int a = static_cast<int>(std::floor(lo * grid - 0.5));
    int b = static_cast<int>(std::ceil(hi * grid - 0.5));
    return std::pair{std::max(a, 0), std::min(b, grid - 1)};
  };
  for (const auto& s : segments) {
    const auto [i0, i1] = index_range(std::min(s.a.x, s.b.x) - hw, std::max(s.a.x, s.b.x) + hw);
    const auto [j0, j1] = index_range(std::min(s.a.y, s.b.y) - hw, std::max(s.a.y, s.b.y) + hw);
    for (int j = j0; j <= j1; ++j) {
      const double py = (j + 0.5) * step;
      std::uint8_t* row = mask.data() + static_cast<size_t>(j) * grid;
      for (int i = i0; i <= i1; ++i) {
        if (row[i]) continue;
        if (point_segment_dist2((i + 0.5) * step, py, s) <= hw2) row[i] = 1;
      }
    }
  }

  PixelImage image(n);
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      if (mask[static_cast<size_t>(j) * grid + i]) image.at(j / kSub, i / kSub) += 1.0;
    }
  }
  for (double& c : image.cells()) c /= kSub * kSub;
  return image;
}

std::string to_pgm(const PixelImage& image) {
  std::ostringstream out;
  out << "P2\n" << image.n() << ' ' << image.n() << "\n10000\n";
  for (int r = 0; r < image.n(); ++r) {
    for (int s = 0; s < image.n(); ++s) {
      if (s) out << ' ';
      out << static_cast<long>(std::lround(image.at(r, s) * 10000.0));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace kanjidist
