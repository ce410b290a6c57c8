#include "kanjidist/analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "kanjidist/config.hpp"

namespace kanjidist {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

size_t DistanceMatrix::index_of(char32_t cp) const {
  auto it = std::find(codepoints.begin(), codepoints.end(), cp);
  if (it == codepoints.end()) throw UnknownKanjiError(cp);
  return static_cast<size_t>(it - codepoints.begin());
}

DistanceMatrix distance_matrix(Engine& engine, const std::vector<char32_t>& cps) {
  std::set<char32_t> seen;
  for (char32_t cp : cps) {
    engine.store().at(cp);
    if (!seen.insert(cp).second) throw std::invalid_argument("distance_matrix: duplicate kanji " + utf8_encode(cp));
  }
  DistanceMatrix m;
  m.codepoints = cps;
  m.fingerprint = params_fingerprint(engine.params());
  const size_t n = cps.size();
  m.values.assign(n * n, 0.0);
  engine.prepare(cps);
  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  parallel_for(pairs.size(), engine.threads(), [&](size_t k) {
    const auto [i, j] = pairs[k];
    const double d = engine.distance(cps[i], cps[j]);
    m.at(i, j) = d;
    m.at(j, i) = d;
  });
  return m;
}

std::vector<Neighbor> knn(const DistanceMatrix& m, char32_t query, int k) {
  const size_t q = m.index_of(query);
  std::vector<Neighbor> all;
  for (size_t j = 0; j < m.size(); ++j) {
    if (j != q) all.push_back({m.codepoints[j], m.at(q, j)});
  }
  std::sort(all.begin(), all.end(), neighbor_less);
  if (k < 0) k = 0;
  if (all.size() > static_cast<size_t>(k)) all.resize(k);
  return all;
}

std::vector<char32_t> neighborhood_set(Engine& engine, const std::vector<char32_t>& seeds, int first_k,
                                       int second_k) {
  std::vector<char32_t> out;
  auto add = [&](char32_t cp) {
    if (std::find(out.begin(), out.end(), cp) == out.end()) out.push_back(cp);
  };
  std::vector<char32_t> ring;
  for (char32_t s : seeds) add(s);
  for (char32_t s : seeds) {
    for (const auto& n : engine.knn(s, first_k)) {
      add(n.cp);
      if (std::find(ring.begin(), ring.end(), n.cp) == ring.end()) ring.push_back(n.cp);
    }
  }
  for (char32_t r : ring) {
    for (const auto& n : engine.knn(r, second_k)) add(n.cp);
  }
  return out;
}

TriangleAudit triangle_audit(const DistanceMatrix& m, double tolerance) {
  TriangleAudit out;
  const size_t n = m.size();
  struct Hit {
    double gap;
    size_t i, j, k;
  };
  std::vector<Hit> hits;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      for (size_t k = j + 1; k < n; ++k) {
        ++out.triples;
        const double dij = m.at(i, j), dik = m.at(i, k), djk = m.at(j, k);
        const double gaps[3] = {dij - dik - djk, dik - dij - djk, djk - dij - dik};
        double worst = -std::numeric_limits<double>::infinity();
        int violated = 0;
        for (double g : gaps) {
          if (g > tolerance) ++violated;
          worst = std::max(worst, g);
        }
        if (violated) {
          ++out.violating_triples;
          out.violated_inequalities += violated;
          out.worst_gap = std::max(out.worst_gap, worst);
          hits.push_back({worst, i, j, k});
        }
      }
    }
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.gap > b.gap; });
  for (size_t h = 0; h < std::min<size_t>(hits.size(), 20); ++h) {
    out.worst.push_back({m.codepoints[hits[h].i], m.codepoints[hits[h].j], m.codepoints[hits[h].k]});
  }
  return out;
}

namespace {

double chord(double r, double theta, const FocusedPoint& p) {
  const double sq = r * r + p.r * p.r - 2.0 * r * p.r * std::cos(theta - p.theta);
  return std::sqrt(std::max(0.0, sq));
}

double angle_stress(double r, double theta, const std::vector<FocusedPoint>& placed,
                    const std::vector<double>& targets) {
  double s = 0.0;
  for (size_t j = 0; j < placed.size(); ++j) {
    const double e = chord(r, theta, placed[j]) - targets[j];
    s += e * e;
  }
  return s;
}

}  // namespace

double best_angle(double r, const std::vector<FocusedPoint>& placed, const std::vector<double>& targets,
                  int restarts, double tolerance) {
  if (placed.empty()) return 0.0;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double best_theta = 0.0;
  double best_value = angle_stress(r, 0.0, placed, targets);
  auto consider = [&](double theta, double value) {
    if (value < best_value) {
      best_value = value;
      best_theta = theta;
    }
  };
  for (int k = 0; k < restarts; ++k) {
    double lo = kTwoPi * k / restarts;
    double hi = kTwoPi * (k + 1) / restarts;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = angle_stress(r, x1, placed, targets);
    double f2 = angle_stress(r, x2, placed, targets);
    while (hi - lo > tolerance) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = angle_stress(r, x1, placed, targets);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = angle_stress(r, x2, placed, targets);
      }
    }
    const double mid = (lo + hi) / 2.0;
    consider(mid, angle_stress(r, mid, placed, targets));
  }
  double theta = std::fmod(best_theta, kTwoPi);
  if (theta < 0.0) theta += kTwoPi;
  if (theta >= kTwoPi) theta = 0.0;
  return theta;
}

FocusedLayout focused_mds(const DistanceMatrix& m, char32_t center) {
  const size_t c = m.index_of(center);
  std::vector<size_t> order;
  for (size_t j = 0; j < m.size(); ++j) {
    if (j != c) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return neighbor_less({m.codepoints[a], m.at(c, a)}, {m.codepoints[b], m.at(c, b)});
  });
  FocusedLayout out;
  out.center = center;
  std::vector<size_t> placed_index;
  for (size_t idx : order) {
    std::vector<double> targets;
    targets.reserve(placed_index.size());
    for (size_t p : placed_index) targets.push_back(m.at(idx, p));
    const double r = m.at(c, idx);
    const double theta = best_angle(r, out.points, targets);
    out.points.push_back({m.codepoints[idx], r, theta});
    placed_index.push_back(idx);
  }
  double stress = 0.0;
  for (size_t a = 0; a < out.points.size(); ++a) {
    for (size_t b = a + 1; b < out.points.size(); ++b) {
      const double e = chord(out.points[a].r, out.points[a].theta, out.points[b]) -
                       m.at(placed_index[a], placed_index[b]);
      stress += e * e;
    }
  }
  out.stress = stress;
  return out;
}

double raw_stress(const DistanceMatrix& m, const std::vector<std::vector<double>>& coords) {
  double s = 0.0;
  for (size_t i = 0; i < m.size(); ++i) {
    for (size_t j = i + 1; j < m.size(); ++j) {
      double sq = 0.0;
      for (size_t d = 0; d < coords[i].size(); ++d) sq += (coords[i][d] - coords[j][d]) * (coords[i][d] - coords[j][d]);
      const double e = std::sqrt(sq) - m.at(i, j);
      s += e * e;
    }
  }
  return s;
}

MdsResult classical_mds(const DistanceMatrix& m, int dims) {
  if (dims < 1) throw std::invalid_argument("mds: dims must be positive");
  const Eigen::Index n = static_cast<Eigen::Index>(m.size());
  MdsResult out;
  out.coords.assign(m.size(), std::vector<double>(dims, 0.0));
  if (n == 0) return out;
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = -0.5 * m.at(i, j) * m.at(i, j);
  }
  const Eigen::VectorXd row_mean = b.rowwise().mean();
  const double total_mean = b.mean();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) += total_mean - row_mean(i) - row_mean(j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  const Eigen::MatrixXd& vectors = eig.eigenvectors();
  for (int d = 0; d < dims && d < n; ++d) {
    const Eigen::Index col = n - 1 - d;
    const double lambda = std::max(0.0, values(col));
    Eigen::VectorXd v = vectors.col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    for (Eigen::Index i = 0; i < n; ++i) out.coords[i][d] = v(i) * std::sqrt(lambda);
  }
  out.stress = raw_stress(m, out.coords);
  out.stress_trace.push_back(out.stress);
  return out;
}

MdsResult metric_mds(const DistanceMatrix& m, int dims, int max_iterations, double tolerance) {
  MdsResult out = classical_mds(m, dims);
  const size_t n = m.size();
  if (n < 2) return out;
  // The classical start can sit on a degenerate axis; nudge exact zeros apart
  // deterministically so the Guttman transform has distances to work with.
  double scale = 0.0;
  for (double v : m.values) scale = std::max(scale, v);
  for (size_t i = 0; i < n; ++i) {
    bool all_zero = true;
    for (double x : out.coords[i]) all_zero = all_zero && x == 0.0;
    if (all_zero && scale > 0.0) out.coords[i][i % dims] = scale * 1e-6 * static_cast<double>(i + 1);
  }
  out.stress = raw_stress(m, out.coords);
  out.stress_trace.assign(1, out.stress);
  for (int it = 0; it < max_iterations; ++it) {
    std::vector<std::vector<double>> next(n, std::vector<double>(dims, 0.0));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        double sq = 0.0;
        for (int d = 0; d < dims; ++d) sq += (out.coords[i][d] - out.coords[j][d]) * (out.coords[i][d] - out.coords[j][d]);
        const double dist = std::sqrt(sq);
        const double ratio = dist > 0.0 ? m.at(i, j) / dist : 0.0;
        for (int d = 0; d < dims; ++d) next[i][d] += ratio * (out.coords[i][d] - out.coords[j][d]);
      }
      for (int d = 0; d < dims; ++d) next[i][d] /= static_cast<double>(n);
    }
    // Guttman transform: X <- (1/n) B(X) X with the rows of X summing to zero.
    std::vector<double> mean(dims, 0.0);
    for (size_t i = 0; i < n; ++i) {
      for (int d = 0; d < dims; ++d) mean[d] += next[i][d] / static_cast<double>(n);
    }
    for (size_t i = 0; i < n; ++i) {
      for (int d = 0; d < dims; ++d) next[i][d] -= mean[d];
    }
    const double s = raw_stress(m, next);
    const double previous = out.stress;
    out.coords = std::move(next);
    out.stress = s;
    out.stress_trace.push_back(s);
    out.iterations = it + 1;
    if (previous - s < tolerance) break;
  }
  return out;
}

int bracket_index(double d) {
  int i = 0;
  while (i < static_cast<int>(kBracketBounds.size()) && d >= kBracketBounds[i]) ++i;
  return i;
}

std::string bracket_label(int index) {
  if (index <= 0) return "0-" + fmt("%g", kBracketBounds.front());
  if (index >= static_cast<int>(kBracketBounds.size())) return fmt("%g", kBracketBounds.back()) + "+";
  return fmt("%g", kBracketBounds[index - 1]) + "-" + fmt("%g", kBracketBounds[index]);
}

std::string bracket_color(int index) {
  static const char* colors[] = {"#EA4C3B", "#F0724B", "#F49265", "#F7AE83", "#F9C8A4", "#FADDC3", "#FFFFFF"};
  return colors[std::clamp(index, 0, 6)];
}

// ---------------------------------------------------------------------------
// Exports

std::string matrix_to_csv(const DistanceMatrix& m) {
  std::string out = "codepoint";
  for (char32_t cp : m.codepoints) out += "," + codepoint_hex(cp);
  out += "\n";
  for (size_t i = 0; i < m.size(); ++i) {
    out += codepoint_hex(m.codepoints[i]);
    for (size_t j = 0; j < m.size(); ++j) out += "," + fmt("%.17g", m.at(i, j));
    out += "\n";
  }
  return out;
}

DistanceMatrix matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  DistanceMatrix m;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream ls(s);
    while (std::getline(ls, cur, ',')) parts.push_back(cur);
    return parts;
  };
  if (!std::getline(in, line)) throw std::invalid_argument("matrix csv: empty input");
  auto header = split(line);
  if (header.empty() || header[0] != "codepoint") throw std::invalid_argument("matrix csv: bad header");
  for (size_t k = 1; k < header.size(); ++k) m.codepoints.push_back(parse_kanji_arg(header[k]));
  const size_t n = m.codepoints.size();
  m.values.assign(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw std::invalid_argument("matrix csv: missing rows");
    auto cells = split(line);
    if (cells.size() != n + 1 || parse_kanji_arg(cells[0]) != m.codepoints[i]) {
      throw std::invalid_argument("matrix csv: malformed row " + std::to_string(i + 1));
    }
    for (size_t j = 0; j < n; ++j) m.at(i, j) = std::stod(cells[j + 1]);
  }
  return m;
}

void write_matrix_binary(const DistanceMatrix& m, const std::filesystem::path& data,
                         const std::filesystem::path& sidecar) {
  std::string bytes(m.values.size() * 8, '\0');
  for (size_t k = 0; k < m.values.size(); ++k) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(m.values[k]);
    for (int b = 0; b < 8; ++b) bytes[k * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  write_text_file(data, bytes);
  nlohmann::json meta;
  meta["format"] = "f64le";
  meta["layout"] = "row-major";
  meta["rows"] = m.size();
  meta["cols"] = m.size();
  meta["fingerprint"] = m.fingerprint;
  nlohmann::json cps = nlohmann::json::array();
  for (char32_t cp : m.codepoints) cps.push_back(codepoint_hex(cp));
  meta["codepoints"] = std::move(cps);
  write_text_file(sidecar, meta.dump(2) + "\n");
}

DistanceMatrix read_matrix_binary(const std::filesystem::path& data, const std::filesystem::path& sidecar) {
  const auto meta = nlohmann::json::parse(read_text_file(sidecar));
  if (meta.at("format") != "f64le") throw std::invalid_argument("matrix: unsupported format");
  DistanceMatrix m;
  for (const auto& cp : meta.at("codepoints")) m.codepoints.push_back(parse_kanji_arg(cp.get<std::string>()));
  m.fingerprint = meta.value("fingerprint", "");
  const std::string bytes = read_text_file(data);
  const size_t n = m.codepoints.size();
  if (bytes.size() != n * n * 8) throw IoError("matrix: data size does not match the sidecar");
  m.values.resize(n * n);
  for (size_t k = 0; k < n * n; ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[k * 8 + b])) << (8 * b);
    m.values[k] = std::bit_cast<double>(bits);
  }
  return m;
}

nlohmann::json layout_json(const FocusedLayout& layout) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : layout.points) {
    points.push_back({{"cp", codepoint_hex(p.cp)},
                      {"kanji", utf8_encode(p.cp)},
                      {"r", p.r},
                      {"theta", p.theta},
                      {"bracket", bracket_index(p.r)},
                      {"color", bracket_color(bracket_index(p.r))}});
  }
  return nlohmann::json{{"center", codepoint_hex(layout.center)},
                        {"center_kanji", utf8_encode(layout.center)},
                        {"points", std::move(points)},
                        {"stress", layout.stress}};
}

nlohmann::json global_layout_json(const DistanceMatrix& m, const MdsResult& mds) {
  nlohmann::json points = nlohmann::json::array();
  for (size_t i = 0; i < m.size(); ++i) {
    nlohmann::json p = {{"cp", codepoint_hex(m.codepoints[i])}, {"kanji", utf8_encode(m.codepoints[i])}};
    p["x"] = mds.coords[i].size() > 0 ? mds.coords[i][0] : 0.0;
    p["y"] = mds.coords[i].size() > 1 ? mds.coords[i][1] : 0.0;
    points.push_back(std::move(p));
  }
  return nlohmann::json{{"mode", "global"},
                        {"points", std::move(points)},
                        {"stress", mds.stress},
                        {"iterations", mds.iterations}};
}

namespace {

constexpr double kSvgSize = 800.0;
constexpr double kSvgMargin = 40.0;

std::string svg_text(double x, double y, const std::string& s, double size, const std::string& fill) {
  return "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", y) + "\" font-size=\"" + fmt("%.0f", size) +
         "\" text-anchor=\"middle\" dominant-baseline=\"central\" fill=\"" + fill + "\">" + s + "</text>\n";
}

std::string svg_open() {
  const std::string size = fmt("%.0f", kSvgSize);
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + size + "\" height=\"" + size + "\" viewBox=\"0 0 " +
         size + " " + size + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string focused_svg(const FocusedLayout& layout, double ring_step) {
  double rmax = ring_step;
  for (const auto& p : layout.points) rmax = std::max(rmax, p.r);
  const int rings = static_cast<int>(std::ceil(rmax / ring_step - 1e-12));
  const double scale = (kSvgSize / 2.0 - kSvgMargin) / (rings * ring_step);
  const double c = kSvgSize / 2.0;
  std::string out = svg_open();
  for (int k = 1; k <= rings; ++k) {
    out += "<circle cx=\"" + fmt("%.2f", c) + "\" cy=\"" + fmt("%.2f", c) + "\" r=\"" +
           fmt("%.2f", k * ring_step * scale) + "\" fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
  }
  out += svg_text(c, c, utf8_encode(layout.center), 28, "#000000");
  for (const auto& p : layout.points) {
    const double x = c + p.r * scale * std::cos(p.theta);
    const double y = c - p.r * scale * std::sin(p.theta);
    const int b = bracket_index(p.r);
    out += "<circle cx=\"" + fmt("%.2f", x) + "\" cy=\"" + fmt("%.2f", y) + "\" r=\"13\" fill=\"" + bracket_color(b) +
           "\"/>\n";
    out += svg_text(x, y, utf8_encode(p.cp), 18, "#000000");
  }
  out += "</svg>\n";
  return out;
}

std::string global_svg(const DistanceMatrix& m, const MdsResult& mds) {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  for (size_t i = 0; i < m.size(); ++i) {
    const double x = mds.coords[i].empty() ? 0.0 : mds.coords[i][0];
    const double y = mds.coords[i].size() > 1 ? mds.coords[i][1] : 0.0;
    if (i == 0) {
      xmin = xmax = x;
      ymin = ymax = y;
    }
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double scale = (kSvgSize - 2.0 * kSvgMargin) / span;
  std::string out = svg_open();
  for (size_t i = 0; i < m.size(); ++i) {
    const double x = mds.coords[i].empty() ? 0.0 : mds.coords[i][0];
    const double y = mds.coords[i].size() > 1 ? mds.coords[i][1] : 0.0;
    const double px = kSvgMargin + (x - xmin) * scale + (kSvgSize - 2.0 * kSvgMargin - (xmax - xmin) * scale) / 2.0;
    const double py = kSvgMargin + (ymax - y) * scale + (kSvgSize - 2.0 * kSvgMargin - (ymax - ymin) * scale) / 2.0;
    out += svg_text(px, py, utf8_encode(m.codepoints[i]), 20, "#000000");
  }
  out += "</svg>\n";
  return out;
}

}  // namespace kanjidist
