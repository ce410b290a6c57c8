#include "kanjidist/hierarchy_match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>

#include "kanjidist/dense_lp.hpp"

namespace kanjidist {

double mu(MuKind kind, double w, double w2) {
  switch (kind) {
    case MuKind::min:
      return std::min(w, w2);
    case MuKind::geometric:
      return std::sqrt(w * w2);
    case MuKind::harmonic:
      return (w + w2) > 0.0 ? 2.0 * w * w2 / (w + w2) : 0.0;
    case MuKind::arithmetic:
      return (w + w2) / 2.0;
  }
  return 0.0;
}

std::string to_string(MuKind kind) {
  switch (kind) {
    case MuKind::min:
      return "min";
    case MuKind::geometric:
      return "geometric";
    case MuKind::harmonic:
      return "harmonic";
    case MuKind::arithmetic:
      return "arithmetic";
  }
  return "min";
}

MuKind parse_mu_kind(const std::string& s) {
  if (s == "min") return MuKind::min;
  if (s == "geometric") return MuKind::geometric;
  if (s == "harmonic") return MuKind::harmonic;
  if (s == "arithmetic") return MuKind::arithmetic;
  throw std::invalid_argument("unknown mu kind '" + s + "'");
}

WeightStructure component_weights(const KanjiDecomposition& d, const std::vector<double>& stroke_lengths,
                                  double trickle) {
  if (!(trickle >= 0.0 && trickle < 1.0)) throw std::invalid_argument("weights: trickle must lie in [0, 1)");
  if (static_cast<int>(stroke_lengths.size()) != d.stroke_count()) {
    throw std::invalid_argument("weights: one length per stroke required");
  }
  double total = 0.0;
  for (double len : stroke_lengths) total += len;
  if (!(total > 0.0)) throw std::invalid_argument("weights: kanji has no ink");

  WeightStructure out;
  out.trickle = trickle;
  const int top = std::max(0, d.max_level());
  for (int l = 0; l <= top; ++l) {
    const auto& level = d.levels.at(l);
    std::vector<int> multiplicity(d.stroke_count() + 1, 0);
    for (const auto& c : level) {
      for (int s : c.strokes) ++multiplicity[s];
    }
    const double decay = std::pow(1.0 - trickle, std::max(0, l - 1));
    std::vector<double> w;
    w.reserve(level.size());
    for (const auto& c : level) {
      double ink = 0.0;
      for (int s : c.strokes) ink += stroke_lengths[s - 1] / multiplicity[s];
      w.push_back(ink / total * decay);
    }
    out.w.push_back(std::move(w));
  }
  return out;
}

WeightStructure component_weights(const KanjiDecomposition& d, double trickle) {
  std::vector<double> lengths;
  lengths.reserve(d.strokes.size());
  for (const auto& s : d.strokes) lengths.push_back(stroke_length(s));
  return component_weights(d, lengths, trickle);
}

void validate(const MatchParams& params) {
  if (!(params.a > 0.0 && params.a <= 1.0)) throw std::invalid_argument("match: a must lie in (0, 1]");
  if (!(params.trickle >= 0.0 && params.trickle < 1.0)) throw std::invalid_argument("match: trickle must lie in [0, 1)");
  if (params.raster.n < 8) throw std::invalid_argument("match: raster resolution must be at least 8");
  if (params.min_strokes < 0) throw std::invalid_argument("match: min_strokes must be nonnegative");
  if (params.max_level < 1) throw std::invalid_argument("match: max_level must be at least 1");
  validate(params.rho);
}

// ---------------------------------------------------------------------------
// Branch and bound

namespace {

constexpr double kIntegralTol = 1e-9;

struct Program {
  std::vector<std::pair<int, int>> var_pair;  // lexicographic (left, right)
  std::vector<double> coef;                   // weight * (cost - a) < 0
  std::vector<std::vector<int>> rows;         // variable ids, at most one may be 1
  std::vector<std::vector<int>> rows_of;      // per variable
};

Program build_program(const MatchingInstance& inst) {
  if (static_cast<int>(inst.cost.size()) != inst.left_count * inst.right_count ||
      inst.weight.size() != inst.cost.size()) {
    throw std::invalid_argument("matching: cost and weight must be left_count x right_count");
  }
  Program p;
  std::vector<int> var_of(inst.cost.size(), -1);
  for (int i = 0; i < inst.left_count; ++i) {
    for (int j = 0; j < inst.right_count; ++j) {
      const size_t k = static_cast<size_t>(i) * inst.right_count + j;
      const double w = inst.weight[k];
      const double c = inst.cost[k];
      if (!(w > 0.0) || !(c < inst.a)) continue;
      var_of[k] = static_cast<int>(p.coef.size());
      p.var_pair.emplace_back(i, j);
      p.coef.push_back(w * (c - inst.a));
    }
  }
  if (p.coef.size() > static_cast<size_t>(kMaxMatchingVariables)) {
    throw std::invalid_argument("matching: " + std::to_string(p.coef.size()) + " variables exceed the cap of " +
                                std::to_string(kMaxMatchingVariables));
  }
  const int m = static_cast<int>(p.coef.size());
  std::set<std::vector<int>> unique_rows;
  std::vector<bool> left_covered(inst.left_count, false), right_covered(inst.right_count, false);
  auto add_rows = [&](const std::vector<std::vector<int>>& veins, bool left, std::vector<bool>& covered, int count) {
    for (const auto& vein : veins) {
      std::vector<bool> in(count, false);
      for (int s : vein) {
        if (s < 0 || s >= count) throw std::invalid_argument("matching: vein refers to an unknown slot");
        in[s] = true;
        covered[s] = true;
      }
      std::vector<int> row;
      for (int k = 0; k < m; ++k) {
        if (in[left ? p.var_pair[k].first : p.var_pair[k].second]) row.push_back(k);
      }
      if (row.size() > 1) unique_rows.insert(std::move(row));
    }
  };
  add_rows(inst.left_veins, true, left_covered, inst.left_count);
  add_rows(inst.right_veins, false, right_covered, inst.right_count);
  p.rows.assign(unique_rows.begin(), unique_rows.end());

  p.rows_of.assign(m, {});
  for (int r = 0; r < static_cast<int>(p.rows.size()); ++r) {
    for (int k : p.rows[r]) p.rows_of[k].push_back(r);
  }
  // A variable outside every multi-variable row only needs its 0-1 bound.
  for (int k = 0; k < m; ++k) {
    if (p.rows_of[k].empty()) {
      p.rows_of[k].push_back(static_cast<int>(p.rows.size()));
      p.rows.push_back({k});
    }
  }
  return p;
}

enum class Fix : signed char { free = -1, zero = 0, one = 1 };

class BranchAndBound {
 public:
  BranchAndBound(const Program& p, std::int64_t max_nodes) : p_(p), max_nodes_(max_nodes) {}

  std::int64_t nodes() const { return nodes_; }

  /// Best solution under `fix` with value < upper - eps. With `first` set,
  /// stops at the first solution whose value is <= upper.
  std::optional<std::vector<int>> search(const std::vector<Fix>& fix, double upper, bool first, double* value) {
    struct Node {
      std::vector<Fix> fix;
    };
    std::vector<Node> stack{{fix}};
    std::optional<std::vector<int>> best;
    double best_value = upper;
    auto better = [&](double v) { return first ? v <= upper : v < best_value - 1e-13; };
    while (!stack.empty()) {
      Node node = std::move(stack.back());
      stack.pop_back();
      if (++nodes_ > max_nodes_) throw SolverLimitError("matching: node limit reached", best_value);

      double fixed = 0.0;
      std::vector<double> rhs(p_.rows.size(), 1.0);
      bool feasible = true;
      for (size_t k = 0; k < node.fix.size(); ++k) {
        if (node.fix[k] != Fix::one) continue;
        fixed += p_.coef[k];
        for (int r : p_.rows_of[k]) {
          rhs[r] -= 1.0;
          if (rhs[r] < -0.5) feasible = false;
        }
      }
      if (!feasible) continue;

      std::vector<int> free_vars;
      for (size_t k = 0; k < node.fix.size(); ++k) {
        if (node.fix[k] != Fix::free) continue;
        bool blocked = false;
        for (int r : p_.rows_of[k]) blocked = blocked || rhs[r] < 0.5;
        if (!blocked) free_vars.push_back(static_cast<int>(k));
      }

      std::vector<double> x(node.fix.size(), 0.0);
      for (size_t k = 0; k < node.fix.size(); ++k) x[k] = node.fix[k] == Fix::one ? 1.0 : 0.0;
      double lp_value = 0.0;
      if (!free_vars.empty()) {
        std::vector<int> row_map(p_.rows.size(), -1);
        std::vector<int> used_rows;
        for (int k : free_vars) {
          for (int r : p_.rows_of[k]) {
            if (row_map[r] < 0) {
              row_map[r] = static_cast<int>(used_rows.size());
              used_rows.push_back(r);
            }
          }
        }
        const size_t nv = free_vars.size();
        std::vector<double> a(used_rows.size() * nv, 0.0), b(used_rows.size()), c(nv);
        for (size_t v = 0; v < nv; ++v) {
          c[v] = p_.coef[free_vars[v]];
          for (int r : p_.rows_of[free_vars[v]]) a[static_cast<size_t>(row_map[r]) * nv + v] = 1.0;
        }
        for (size_t r = 0; r < used_rows.size(); ++r) b[r] = rhs[used_rows[r]];
        const auto lp = solve_lp_leq(a, b, c);
        if (lp.status != LpResult::Status::optimal) throw std::runtime_error("matching: LP relaxation failed");
        lp_value = lp.objective;
        for (size_t v = 0; v < nv; ++v) x[free_vars[v]] = lp.x[v];
      }

      const double bound = fixed + lp_value;
      if (first ? bound > upper + 1e-13 : bound >= best_value - 1e-13) continue;

      int branch = -1;
      double most = -1.0;
      for (int k : free_vars) {
        const double frac = std::abs(x[k] - std::round(x[k]));
        if (frac > kIntegralTol && frac > most + 1e-12) {
          most = frac;
          branch = k;
        }
      }
      if (branch < 0) {
        std::vector<int> sol;
        double v = 0.0;
        for (size_t k = 0; k < x.size(); ++k) {
          if (x[k] > 0.5) {
            sol.push_back(static_cast<int>(k));
            v += p_.coef[k];
          }
        }
        if (better(v)) {
          best = std::move(sol);
          best_value = v;
          if (first) break;
        }
        continue;
      }
      Node zero{node.fix}, one{std::move(node.fix)};
      zero.fix[branch] = Fix::zero;
      one.fix[branch] = Fix::one;
      stack.push_back(std::move(zero));
      stack.push_back(std::move(one));
    }
    if (best && value) *value = best_value;
    return best;
  }

 private:
  const Program& p_;
  std::int64_t max_nodes_;
  std::int64_t nodes_ = 0;
};

std::vector<int> greedy(const Program& p) {
  std::vector<int> order(p.coef.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return p.coef[x] < p.coef[y]; });
  std::vector<bool> used(p.rows.size(), false);
  std::vector<int> sol;
  for (int k : order) {
    bool ok = true;
    for (int r : p.rows_of[k]) ok = ok && !used[r];
    if (!ok) continue;
    for (int r : p.rows_of[k]) used[r] = true;
    sol.push_back(k);
  }
  std::sort(sol.begin(), sol.end());
  return sol;
}

double value_of(const Program& p, const std::vector<int>& sol) {
  double v = 0.0;
  for (int k : sol) v += p.coef[k];
  return v;
}

bool intersects(const StrokeSet& a, const StrokeSet& b) {
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    *i < *j ? ++i : ++j;
  }
  return false;
}

}  // namespace

MatchingSolution solve_binary_matching(const MatchingInstance& inst, const SolverOptions& options) {
  const Program p = build_program(inst);
  const int m = static_cast<int>(p.coef.size());
  BranchAndBound bb(p, options.max_nodes);
  std::vector<Fix> fix(m, Fix::free);

  std::vector<int> sol = greedy(p);
  double z = value_of(p, sol);
  double improved = 0.0;
  if (auto better = bb.search(fix, z, false, &improved)) {
    sol = std::move(*better);
    z = improved;
  }

  if (options.lexicographic) {
    const double limit = z + options.tie_tolerance;
    for (int k = 0; k < m; ++k) {
      const bool chosen = std::binary_search(sol.begin(), sol.end(), k);
      if (chosen) {
        std::vector<Fix> trial = fix;
        trial[k] = Fix::zero;
        double v = 0.0;
        if (auto alt = bb.search(trial, limit, true, &v)) {
          sol = std::move(*alt);
          fix[k] = Fix::zero;
        } else {
          fix[k] = Fix::one;
        }
      } else {
        fix[k] = Fix::zero;
      }
    }
  }

  MatchingSolution out;
  for (int k : sol) out.chosen.push_back(p.var_pair[k]);
  std::sort(out.chosen.begin(), out.chosen.end());
  out.objective = matching_objective(inst, out.chosen);
  out.nodes = bb.nodes();
  return out;
}

double matching_objective(const MatchingInstance& inst, const std::vector<std::pair<int, int>>& chosen) {
  double matched = 0.0, weighted = 0.0;
  for (const auto& [i, j] : chosen) {
    const size_t k = static_cast<size_t>(i) * inst.right_count + j;
    matched += inst.weight[k];
    weighted += inst.weight[k] * inst.cost[k];
  }
  return inst.a * (1.0 - matched) + weighted;
}

bool satisfies_vein_constraints(const MatchingInstance& inst, const std::vector<std::pair<int, int>>& chosen) {
  auto check = [&](const std::vector<std::vector<int>>& veins, bool left) {
    for (const auto& vein : veins) {
      int hits = 0;
      for (const auto& pr : chosen) {
        const int s = left ? pr.first : pr.second;
        if (std::find(vein.begin(), vein.end(), s) != vein.end()) ++hits;
      }
      if (hits > 1) return false;
    }
    return true;
  };
  return check(inst.left_veins, true) && check(inst.right_veins, false);
}

// ---------------------------------------------------------------------------
// Prepared kanji

PixelImage coverage_image(const std::vector<std::uint8_t>& coverage, int n) {
  PixelImage img(n);
  auto cells = img.cells();
  for (size_t k = 0; k < coverage.size(); ++k) cells[k] = coverage[k] / 16.0;
  return img;
}

PixelImage PreparedKanji::raster(int slot) const { return coverage_image(slots.at(slot).coverage, raster_n); }

PreparedKanji prepare_kanji(const KanjiDecomposition& d, const MatchParams& params) {
  validate(params);
  const auto weights = component_weights(d, params.trickle);
  const auto iv = index_and_veins(d);

  PreparedKanji out;
  out.codepoint = d.codepoint;
  out.raster_n = params.raster.n;
  std::vector<ComponentIndex> indices;
  if (params.include_root) indices.push_back({0, 0});
  indices.insert(indices.end(), iv.essential.begin(), iv.essential.end());
  std::sort(indices.begin(), indices.end());

  std::vector<std::vector<int>> slot_of(d.levels.size());
  for (size_t l = 0; l < d.levels.size(); ++l) slot_of[l].assign(d.levels[l].size(), -1);

  for (const auto& idx : indices) {
    if (idx.level > params.max_level) continue;
    const Component& c = d.component(idx.level, idx.index);
    if (static_cast<int>(c.strokes.size()) < params.min_strokes) continue;
    PreparedComponent pc;
    pc.index = idx;
    pc.stroke_count = static_cast<int>(c.strokes.size());
    pc.label = c.label;
    pc.weight = weights.at(idx.level, idx.index);
    const auto geom = component_geometry(d, c.strokes);
    pc.box = bounding_box(geom);
    const PixelImage img = rasterize(normalize_component(geom).geometry, params.raster.n, params.raster.width());
    pc.mass = img.total();
    pc.digest = img.digest();
    pc.coverage.reserve(img.cells().size());
    for (double v : img.cells()) {
      const long q = std::lround(v * 16.0);
      if (q < 0 || q > 16 || q / 16.0 != v) throw std::logic_error("prepare_kanji: raster is not in 1/16 steps");
      pc.coverage.push_back(static_cast<std::uint8_t>(q));
    }
    if (!(pc.mass > 0.0)) continue;
    slot_of[idx.level][idx.index] = static_cast<int>(out.slots.size());
    out.slots.push_back(std::move(pc));
  }

  std::set<std::vector<int>> veins;
  for (const auto& vein : iv.veins) {
    std::vector<int> v;
    for (const auto& idx : vein) {
      if (idx.level > params.max_level) break;
      const int s = slot_of.at(idx.level).at(idx.index);
      if (s >= 0) v.push_back(s);
    }
    if (!v.empty()) veins.insert(std::move(v));
  }
  // components of different levels that share a stroke are mutually exclusive
  for (size_t s = 0; s < out.slots.size(); ++s) {
    for (size_t t = s + 1; t < out.slots.size(); ++t) {
      const auto& a = out.slots[s].index;
      const auto& b = out.slots[t].index;
      if (a.level == b.level) continue;
      const auto& sa = d.component(a.level, a.index).strokes;
      const auto& sb = d.component(b.level, b.index).strokes;
      if (!intersects(sa, sb)) continue;
      const int is = static_cast<int>(s), it = static_cast<int>(t);
      const bool covered = std::any_of(veins.begin(), veins.end(), [&](const std::vector<int>& v) {
        return std::find(v.begin(), v.end(), is) != v.end() && std::find(v.begin(), v.end(), it) != v.end();
      });
      if (!covered) veins.insert({is, it});
    }
  }
  out.veins.assign(veins.begin(), veins.end());
  return out;
}

double DirectTransport::cost(const PreparedKanji& k1, int s1, const PreparedKanji& k2, int s2,
                             const UbwParams& params) {
  return ubw_distance(k1.raster(s1), k2.raster(s2), params).cost;
}

size_t CachedTransport::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = k.lo * 0x9e3779b97f4a7c15ULL;
  h ^= k.hi + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(k.n) + (h << 6) + (h >> 2);
  h ^= std::hash<double>{}(k.p) + (h << 6) + (h >> 2);
  h ^= std::hash<double>{}(k.b) + (h << 6) + (h >> 2);
  return static_cast<size_t>(h);
}

double CachedTransport::cost(const PreparedKanji& k1, int s1, const PreparedKanji& k2, int s2,
                             const UbwParams& params) {
  const auto d1 = k1.slots.at(s1).digest;
  const auto d2 = k2.slots.at(s2).digest;
  const Key key{std::min(d1, d2), std::max(d1, d2), k1.raster_n, params.p, params.b};
  {
    std::shared_lock lock(mutex_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  const double c = ubw_distance(k1.raster(s1), k2.raster(s2), params).cost;
  ++solves_;
  std::unique_lock lock(mutex_);
  memo_.emplace(key, c);
  return c;
}

size_t CachedTransport::size() const {
  std::shared_lock lock(mutex_);
  return memo_.size();
}

void CachedTransport::clear() {
  std::unique_lock lock(mutex_);
  memo_.clear();
}

namespace {

bool same_raster(const PreparedComponent& c1, const PreparedComponent& c2) {
  return c1.digest == c2.digest && c1.coverage == c2.coverage;
}

bool transport_free(const PreparedComponent& c1, const PreparedComponent& c2, const RhoParams& params) {
  return (params.label_override && labels_match(c1.label, c2.label)) || same_raster(c1, c2);
}

}  // namespace

double exact_rho(const PreparedKanji& k1, int s1, const PreparedKanji& k2, int s2, const MatchParams& params,
                 TransportOracle& oracle, RhoBreakdown* breakdown) {
  const auto& c1 = k1.slots.at(s1);
  const auto& c2 = k2.slots.at(s2);
  RhoBreakdown b;
  b.labels_match = labels_match(c1.label, c2.label);
  b.penalties = registration_penalties(c1.box, c2.box);
  if (!transport_free(c1, c2, params.rho)) {
    const double cost = oracle.cost(k1, s1, k2, s2, params.rho.ubw);
    b.transport = cost / (params.rho.ot_divisor * std::max(c1.mass, c2.mass));
  }
  b.value = rho_from_terms(params.rho, b.transport, b.penalties, b.labels_match);
  if (breakdown) *breakdown = b;
  return b.value;
}

double rho_lower_bound(const PreparedComponent& c1, const PreparedComponent& c2, const MatchParams& params,
                       bool* exact, BoundKind kind) {
  const bool free = transport_free(c1, c2, params.rho);
  if (exact) *exact = free;
  double transport = 0.0;
  if (!free) {
    transport = transport_lower_bound(params.rho, c1.mass, c2.mass);
    if (kind == BoundKind::potential) {
      const int n = params.raster.n;
      const double cost = ubw_lower_bound(coverage_image(c1.coverage, n), coverage_image(c2.coverage, n), params.rho.ubw);
      transport = std::max(transport, cost / (params.rho.ot_divisor * std::max(c1.mass, c2.mass)));
    }
  }
  return rho_from_terms(params.rho, transport, registration_penalties(c1.box, c2.box),
                        labels_match(c1.label, c2.label));
}

namespace {

MatchingInstance base_instance(const PreparedKanji& k1, const PreparedKanji& k2, const MatchParams& params) {
  MatchingInstance inst;
  inst.left_count = static_cast<int>(k1.slots.size());
  inst.right_count = static_cast<int>(k2.slots.size());
  inst.a = params.a;
  inst.left_veins = k1.veins;
  inst.right_veins = k2.veins;
  inst.cost.assign(static_cast<size_t>(inst.left_count) * inst.right_count, 0.0);
  inst.weight.assign(inst.cost.size(), 0.0);
  for (int i = 0; i < inst.left_count; ++i) {
    for (int j = 0; j < inst.right_count; ++j) {
      inst.weight[static_cast<size_t>(i) * inst.right_count + j] =
          mu(params.mu, k1.slots[i].weight, k2.slots[j].weight);
    }
  }
  return inst;
}

}  // namespace

MatchResult kanji_distance(const PreparedKanji& k1, const PreparedKanji& k2, const MatchParams& params,
                           TransportOracle& oracle, const SolverOptions& options) {
  if (k1.raster_n != k2.raster_n) throw std::invalid_argument("kanji_distance: prepared at different resolutions");
  MatchingInstance inst = base_instance(k1, k2, params);
  const size_t cells = inst.cost.size();
  std::vector<char> exact(cells, 0);
  std::vector<std::optional<RhoBreakdown>> detail(cells);
  for (int i = 0; i < inst.left_count; ++i) {
    for (int j = 0; j < inst.right_count; ++j) {
      const size_t k = static_cast<size_t>(i) * inst.right_count + j;
      if (!(inst.weight[k] > 0.0)) continue;
      bool is_exact = false;
      inst.cost[k] = rho_lower_bound(k1.slots[i], k2.slots[j], params, &is_exact);
      exact[k] = is_exact;
    }
  }

  MatchResult out;
  out.from_codepoint = k1.codepoint;
  out.to_codepoint = k2.codepoint;
  MatchingSolution sol;
  for (;;) {
    sol = solve_binary_matching(inst, options);
    bool refined = false;
    for (const auto& [i, j] : sol.chosen) {
      const size_t k = static_cast<size_t>(i) * inst.right_count + j;
      if (exact[k]) continue;
      RhoBreakdown b;
      inst.cost[k] = exact_rho(k1, i, k2, j, params, oracle, &b);
      detail[k] = b;
      exact[k] = 1;
      ++out.exact_evaluations;
      refined = true;
    }
    if (!refined) break;
  }

  double matched = 0.0, weighted = 0.0;
  for (const auto& [i, j] : sol.chosen) {
    const size_t k = static_cast<size_t>(i) * inst.right_count + j;
    if (!detail[k]) {
      RhoBreakdown b;
      exact_rho(k1, i, k2, j, params, oracle, &b);
      detail[k] = b;
    }
    MatchedPair mp;
    mp.from = k1.slots[i].index;
    mp.to = k2.slots[j].index;
    mp.mu_weight = inst.weight[k];
    mp.rho = inst.cost[k];
    mp.breakdown = *detail[k];
    mp.label_from = k1.slots[i].label;
    mp.label_to = k2.slots[j].label;
    matched += mp.mu_weight;
    weighted += mp.mu_weight * mp.rho;
    out.pairs.push_back(std::move(mp));
  }
  out.matched_weight = matched;
  out.unmatched_weight = 1.0 - matched;
  out.unmatched_penalty = params.a * out.unmatched_weight;
  out.distance = out.unmatched_penalty + weighted;
  return out;
}

double kanji_distance_lower_bound(const PreparedKanji& k1, const PreparedKanji& k2, const MatchParams& params,
                                  BoundKind kind, const SolverOptions& options) {
  MatchingInstance inst = base_instance(k1, k2, params);
  for (int i = 0; i < inst.left_count; ++i) {
    for (int j = 0; j < inst.right_count; ++j) {
      const size_t k = static_cast<size_t>(i) * inst.right_count + j;
      if (inst.weight[k] > 0.0) inst.cost[k] = rho_lower_bound(k1.slots[i], k2.slots[j], params, nullptr, kind);
    }
  }
  SolverOptions opt = options;
  opt.lexicographic = false;
  return solve_binary_matching(inst, opt).objective;
}

MatchResult kanji_distance(const KanjiDecomposition& k1, const KanjiDecomposition& k2, const MatchParams& params) {
  DirectTransport oracle;
  return kanji_distance(prepare_kanji(k1, params), prepare_kanji(k2, params), params, oracle);
}

void to_json(nlohmann::json& j, const MatchResult& r) {
  nlohmann::json pairs = nlohmann::json::array();
  auto label = [](const std::optional<std::string>& l) { return l ? nlohmann::json(*l) : nlohmann::json(nullptr); };
  for (const auto& p : r.pairs) {
    pairs.push_back({{"from", {p.from.level, p.from.index}},
                     {"to", {p.to.level, p.to.index}},
                     {"mu_weight", p.mu_weight},
                     {"rho", p.rho},
                     {"labels", {label(p.label_from), label(p.label_to)}},
                     {"same_label", p.breakdown.labels_match},
                     {"transport", p.breakdown.transport},
                     {"tau", p.breakdown.penalties.tau},
                     {"sigma", p.breakdown.penalties.sigma},
                     {"chi", p.breakdown.penalties.chi}});
  }
  j = nlohmann::json{{"from", utf8_encode(r.from_codepoint)},
                     {"to", utf8_encode(r.to_codepoint)},
                     {"pairs", std::move(pairs)},
                     {"matched_weight", r.matched_weight},
                     {"unmatched_weight", r.unmatched_weight},
                     {"unmatched_penalty", r.unmatched_penalty},
                     {"distance", r.distance}};
}

}  // namespace kanjidist
