#include "kanjidist/ubw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "kanjidist/dense_lp.hpp"
#include "kanjidist/network_simplex.hpp"

namespace kanjidist {

namespace {

constexpr double kCostScale = 1e9;

void check_inputs(const PixelImage& c, const PixelImage& c2, const UbwParams& params) {
  if (c.n() != c2.n()) throw std::invalid_argument("ubw: images have different resolutions");
  if (!(params.p >= 1.0)) throw std::invalid_argument("ubw: p must be at least 1");
  if (!(params.b > 0.0)) throw std::invalid_argument("ubw: b must be positive");
  if (!c.valid_for_transport() && !c2.valid_for_transport()) throw std::invalid_argument("ubw: both images are empty");
  for (double v : c.cells()) {
    if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("ubw: negative or non-finite cell mass");
  }
  for (double v : c2.cells()) {
    if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("ubw: negative or non-finite cell mass");
  }
}

double ground(int dr, int ds, int n, double p) { return std::pow(std::hypot(dr, ds) / n, p); }

double plan_cost(const TransportPlan& plan, const UbwParams& params) {
  double moved = 0.0;
  for (const auto& e : plan.entries) {
    moved += ground(e.from_row - e.to_row, e.from_col - e.to_col, plan.n, params.p) * e.mass;
  }
  const double slack = std::max(0.0, plan.source_mass + plan.target_mass - 2.0 * plan.transported);
  const double total = moved + slack * std::pow(params.b, params.p) / 2.0;
  return std::pow(std::max(0.0, total), 1.0 / params.p);
}

void fill_slack(TransportPlan& plan, const PixelImage& c, const PixelImage& c2) {
  plan.destroyed_cells.assign(c.cells().begin(), c.cells().end());
  plan.created_cells.assign(c2.cells().begin(), c2.cells().end());
  for (const auto& e : plan.entries) {
    plan.destroyed_cells[static_cast<size_t>(e.from_row) * plan.n + e.from_col] -= e.mass;
    plan.created_cells[static_cast<size_t>(e.to_row) * plan.n + e.to_col] -= e.mass;
  }
  for (double& v : plan.destroyed_cells) v = std::max(0.0, v);
  for (double& v : plan.created_cells) v = std::max(0.0, v);
}

TransportPlan solve_canonical(const PixelImage& c, const PixelImage& c2, const UbwParams& params) {
  const int n = c.n();
  TransportPlan plan;
  plan.n = n;
  plan.source_mass = c.total();
  plan.target_mass = c2.total();

  const double quantum = std::ldexp(std::max(plan.source_mass, plan.target_mass), -40);
  auto units = [&](double mass) { return static_cast<std::int64_t>(std::floor(mass / quantum)); };

  NetworkSimplex net;
  std::vector<int> src_node(static_cast<size_t>(n) * n, -1), dst_node(static_cast<size_t>(n) * n, -1);
  std::vector<int> src_cell, dst_cell;
  std::int64_t src_total = 0, dst_total = 0;
  for (int k = 0; k < n * n; ++k) {
    const std::int64_t q = units(c.cells()[k]);
    if (q > 0) {
      src_node[k] = net.add_node(q);
      src_cell.push_back(k);
      src_total += q;
    }
  }
  for (int k = 0; k < n * n; ++k) {
    const std::int64_t q = units(c2.cells()[k]);
    if (q > 0) {
      dst_node[k] = net.add_node(-q);
      dst_cell.push_back(k);
      dst_total += q;
    }
  }
  const int creator = net.add_node(dst_total);
  const int destroyer = net.add_node(-src_total);

  const std::int64_t slack_cost = std::llround(std::pow(params.b, params.p) / 2.0 * kCostScale);
  const int reach = static_cast<int>(std::floor(params.b * n + 1e-9));
  struct Arc {
    int arc, from_cell, to_cell;
  };
  std::vector<Arc> transport;
  for (int k : src_cell) {
    const int r = k / n, s = k % n;
    for (int r2 = std::max(0, r - reach); r2 <= std::min(n - 1, r + reach); ++r2) {
      for (int s2 = std::max(0, s - reach); s2 <= std::min(n - 1, s + reach); ++s2) {
        const int k2 = r2 * n + s2;
        if (dst_node[k2] < 0) continue;
        const double delta = std::hypot(r - r2, s - s2) / n;
        if (delta > params.b * (1.0 + 1e-12)) continue;
        const auto cost = std::llround(std::pow(delta, params.p) * kCostScale);
        transport.push_back({net.add_arc(src_node[k], dst_node[k2], cost), k, k2});
      }
    }
    net.add_arc(src_node[k], destroyer, slack_cost);
  }
  for (int k2 : dst_cell) net.add_arc(creator, dst_node[k2], slack_cost);
  net.add_arc(creator, destroyer, 0);

  if (!net.solve()) throw std::logic_error("ubw: flow problem infeasible");

  for (const auto& a : transport) {
    const std::int64_t f = net.flow(a.arc);
    if (f <= 0) continue;
    const double mass = static_cast<double>(f) * quantum;
    plan.entries.push_back({a.from_cell / n, a.from_cell % n, a.to_cell / n, a.to_cell % n, mass});
    plan.transported += mass;
  }
  return plan;
}

}  // namespace

UbwResult ubw_distance(const PixelImage& c, const PixelImage& c2, const UbwParams& params) {
  check_inputs(c, c2, params);
  UbwResult result;
  if (c == c2) {
    TransportPlan& plan = result.plan;
    plan.n = c.n();
    plan.source_mass = plan.target_mass = plan.transported = c.total();
    for (int k = 0; k < c.n() * c.n(); ++k) {
      if (c.cells()[k] > 0.0) plan.entries.push_back({k / c.n(), k % c.n(), k / c.n(), k % c.n(), c.cells()[k]});
    }
    fill_slack(plan, c, c2);
    return result;
  }

  // Solving in a canonical order makes the result exactly symmetric.
  const bool swapped = std::lexicographical_compare(c2.cells().begin(), c2.cells().end(), c.cells().begin(),
                                                    c.cells().end());
  TransportPlan plan = swapped ? solve_canonical(c2, c, params) : solve_canonical(c, c2, params);
  result.cost = plan_cost(plan, params);
  if (swapped) {
    std::swap(plan.source_mass, plan.target_mass);
    for (auto& e : plan.entries) {
      std::swap(e.from_row, e.to_row);
      std::swap(e.from_col, e.to_col);
    }
    std::sort(plan.entries.begin(), plan.entries.end(), [](const TransportEntry& a, const TransportEntry& b) {
      return std::tie(a.from_row, a.from_col, a.to_row, a.to_col) < std::tie(b.from_row, b.from_col, b.to_row, b.to_col);
    });
  }
  fill_slack(plan, c, c2);
  result.plan = std::move(plan);
  return result;
}

double relative_from_cost(double cost, double mass, double mass2, const UbwParams& params) {
  const double denom = params.b * std::max(mass, mass2);
  if (!(denom > 0.0)) throw std::invalid_argument("relative_ubw: both images are empty");
  return cost / denom;
}

double relative_ubw(const PixelImage& c, const PixelImage& c2, const UbwParams& params) {
  const auto r = ubw_distance(c, c2, params);
  return relative_from_cost(r.cost, r.plan.source_mass, r.plan.target_mass, params);
}

double brute_oracle(const PixelImage& c, const PixelImage& c2, const UbwParams& params) {
  check_inputs(c, c2, params);
  const int n = c.n();
  if (n > 8) throw std::invalid_argument("brute_oracle: resolution above 8 is too large for the dense LP");
  const int cells = n * n;
  const size_t vars = static_cast<size_t>(cells) * cells;
  const double bp = std::pow(params.b, params.p);
  std::vector<double> a(static_cast<size_t>(2 * cells) * vars, 0.0);
  std::vector<double> rhs(2 * cells), obj(vars);
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      const size_t v = static_cast<size_t>(i) * cells + j;
      obj[v] = ground(i / n - j / n, i % n - j % n, n, params.p) - bp;
      a[static_cast<size_t>(i) * vars + v] = 1.0;
      a[static_cast<size_t>(cells + j) * vars + v] = 1.0;
    }
    rhs[i] = c.cells()[i];
    rhs[cells + i] = c2.cells()[i];
  }
  const auto lp = solve_lp_leq(a, rhs, obj);
  if (lp.status != LpResult::Status::optimal) throw std::runtime_error("brute_oracle: LP did not reach optimality");
  const double total = (c.total() + c2.total()) * bp / 2.0 + lp.objective;
  return std::pow(std::max(0.0, total), 1.0 / params.p);
}

namespace {

// Squared distance transform along one line (lower envelope of parabolas).
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      k = 0;
      continue;
    }
    double s;
    for (;;) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s > z[k] || k == 0) break;
      --k;
    }
    if (s <= z[k]) {
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      k = 0;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    for (int q = 0; q < n; ++q) d[q] = inf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

double potential_bound(const PixelImage& c, const PixelImage& c2, const std::vector<double>& dist2, double b) {
  // f_t(x) = min(b/2, t + dist(x, supp C')) is 1-Lipschitz with |f_t| <= b/2.
  double best = 0.0;
  constexpr int kSteps = 8;
  const auto cells = c.cells();
  const auto cells2 = c2.cells();
  for (int step = 0; step <= kSteps; ++step) {
    const double t = -b / 2.0 + b * step / kSteps;
    double v = 0.0;
    for (size_t k = 0; k < cells.size(); ++k) {
      const double diff = cells[k] - cells2[k];
      if (diff == 0.0) continue;
      v += std::min(b / 2.0, t + dist2[k]) * diff;
    }
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

std::vector<double> ink_distance_field(const PixelImage& image) {
  const int n = image.n();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> grid(static_cast<size_t>(n) * n);
  for (size_t k = 0; k < grid.size(); ++k) grid[k] = image.cells()[k] > 0.0 ? 0.0 : inf;
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int r = 0; r < n; ++r) {
    for (int s = 0; s < n; ++s) f[s] = grid[static_cast<size_t>(r) * n + s];
    edt_1d(f.data(), d.data(), n, v, z);
    for (int s = 0; s < n; ++s) grid[static_cast<size_t>(r) * n + s] = d[s];
  }
  for (int s = 0; s < n; ++s) {
    for (int r = 0; r < n; ++r) f[r] = grid[static_cast<size_t>(r) * n + s];
    edt_1d(f.data(), d.data(), n, v, z);
    for (int r = 0; r < n; ++r) grid[static_cast<size_t>(r) * n + s] = d[r];
  }
  for (double& x : grid) x = std::sqrt(x) / n;
  return grid;
}

double ubw_lower_bound(const PixelImage& c, const PixelImage& c2, const UbwParams& params) {
  check_inputs(c, c2, params);
  const double bp = std::pow(params.b, params.p);
  double total = std::abs(c.total() - c2.total()) * bp / 2.0;
  if (params.p == 1.0 && c.valid_for_transport() && c2.valid_for_transport()) {
    total = std::max(total, potential_bound(c, c2, ink_distance_field(c2), params.b));
    total = std::max(total, potential_bound(c2, c, ink_distance_field(c), params.b));
  }
  // Guard against rounding in the potentials pushing the bound past the optimum.
  total *= 1.0 - 1e-12;
  return std::pow(std::max(0.0, total), 1.0 / params.p);
}

void to_json(nlohmann::json& j, const TransportPlan& plan) {
  nlohmann::json entries = nlohmann::json::array();
  double stationary = 0.0;
  for (const auto& e : plan.entries) {
    if (e.from_row == e.to_row && e.from_col == e.to_col) {
      stationary += e.mass;
      continue;
    }
    entries.push_back({{"from", {e.from_row, e.from_col}}, {"to", {e.to_row, e.to_col}}, {"mass", e.mass}});
  }
  auto cell_list = [&](const std::vector<double>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (size_t k = 0; k < v.size(); ++k) {
      if (v[k] > 0.0) out.push_back({{"cell", {static_cast<int>(k) / plan.n, static_cast<int>(k) % plan.n}}, {"mass", v[k]}});
    }
    return out;
  };
  j = nlohmann::json{{"n", plan.n},
                     {"entries", std::move(entries)},
                     {"stationary", stationary},
                     {"transported", plan.transported},
                     {"source_mass", plan.source_mass},
                     {"target_mass", plan.target_mass},
                     {"created", cell_list(plan.created_cells)},
                     {"destroyed", cell_list(plan.destroyed_cells)}};
}

}  // namespace kanjidist
