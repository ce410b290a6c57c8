#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kanjidist/component_metric.hpp"
#include "kanjidist/kanjivg.hpp"

namespace kanjidist {

enum class MuKind { min, geometric, harmonic, arithmetic };

double mu(MuKind kind, double w, double w2);
std::string to_string(MuKind kind);
MuKind parse_mu_kind(const std::string& s);

/// Ink-proportional component weights, levels 0..L. A stroke shared by k
/// components of one level contributes 1/k of its length to each of them.
struct WeightStructure {
  double trickle = 0.0;
  std::vector<std::vector<double>> w;

  double at(int level, int index) const { return w.at(level).at(index); }
};

WeightStructure component_weights(const KanjiDecomposition& d, double trickle);
WeightStructure component_weights(const KanjiDecomposition& d, const std::vector<double>& stroke_lengths,
                                  double trickle);

struct MatchParams {
  double a = 0.25;
  MuKind mu = MuKind::min;
  double trickle = 0.02;
  RhoParams rho;
  RasterParams raster;
  int max_level = 2;          // deepest level whose components take part in matching
  int min_strokes = 0;        // components with fewer strokes are never matched
  bool include_root = true;   // the whole kanji is a matchable component

  friend bool operator==(const MatchParams&, const MatchParams&) = default;
};

void validate(const MatchParams& params);

// ---------------------------------------------------------------------------
// Binary program: minimize a + sum_k e_k * weight_k * (cost_k - a) subject to
// at most one chosen pair touching any vein of either side.

struct MatchingInstance {
  int left_count = 0;
  int right_count = 0;
  std::vector<double> cost;    // left_count x right_count, row-major
  std::vector<double> weight;  // left_count x right_count, row-major
  double a = 0.25;
  std::vector<std::vector<int>> left_veins;
  std::vector<std::vector<int>> right_veins;
};

struct SolverOptions {
  std::int64_t max_nodes = 2000000;
  double tie_tolerance = 1e-12;
  bool lexicographic = true;
};

struct MatchingSolution {
  std::vector<std::pair<int, int>> chosen;  // sorted (left, right)
  double objective = 0.0;
  std::int64_t nodes = 0;
};

class SolverLimitError : public std::runtime_error {
 public:
  SolverLimitError(const std::string& what, double bound) : std::runtime_error(what), bound_(bound) {}
  double bound() const { return bound_; }

 private:
  double bound_;
};

inline constexpr int kMaxMatchingVariables = 10000;

/// Exact optimum by branch and bound over the LP relaxation. Among optimal
/// solutions (within tie_tolerance) returns the lexicographically smallest
/// 0-1 vector in (left, right) order. Pairs with cost >= a are never chosen.
/// Throws SolverLimitError past max_nodes and std::invalid_argument when the
/// number of candidate pairs exceeds kMaxMatchingVariables.
MatchingSolution solve_binary_matching(const MatchingInstance& inst, const SolverOptions& options = {});

/// Recomputes the objective of a selection.
double matching_objective(const MatchingInstance& inst, const std::vector<std::pair<int, int>>& chosen);

/// True if every vein on both sides is touched by at most one chosen pair.
bool satisfies_vein_constraints(const MatchingInstance& inst, const std::vector<std::pair<int, int>>& chosen);

// ---------------------------------------------------------------------------
// Kanji distance

struct MatchedPair {
  ComponentIndex from;
  ComponentIndex to;
  double mu_weight = 0.0;
  double rho = 0.0;
  RhoBreakdown breakdown;
  std::optional<std::string> label_from;
  std::optional<std::string> label_to;
};

struct MatchResult {
  char32_t from_codepoint = 0;
  char32_t to_codepoint = 0;
  std::vector<MatchedPair> pairs;
  double matched_weight = 0.0;
  double unmatched_weight = 0.0;
  double unmatched_penalty = 0.0;
  double distance = 0.0;
  int exact_evaluations = 0;
};

void to_json(nlohmann::json& j, const MatchResult& r);

/// Precomputed per-component data of one kanji.
struct PreparedComponent {
  ComponentIndex index;
  int stroke_count = 0;
  std::optional<std::string> label;
  BBox box;
  double mass = 0.0;
  std::uint64_t digest = 0;
  double weight = 0.0;
  std::vector<std::uint8_t> coverage;  // raster cells in 1/16 steps
};

struct PreparedKanji {
  char32_t codepoint = 0;
  int raster_n = 0;
  std::vector<PreparedComponent> slots;  // root (optional) then levels 1..L, in (l, i) order
  std::vector<std::vector<int>> veins;   // slot ids; also pairs of overlapping slots on different levels

  PixelImage raster(int slot) const;
};

PixelImage coverage_image(const std::vector<std::uint8_t>& coverage, int n);

PreparedKanji prepare_kanji(const KanjiDecomposition& d, const MatchParams& params);

/// Source of exact transport costs; implementations may cache.
class TransportOracle {
 public:
  virtual ~TransportOracle() = default;
  virtual double cost(const PreparedKanji& k1, int s1, const PreparedKanji& k2, int s2, const UbwParams& params) = 0;
};

class DirectTransport : public TransportOracle {
 public:
  double cost(const PreparedKanji& k1, int s1, const PreparedKanji& k2, int s2, const UbwParams& params) override;
};

/// Thread-safe memo of transport costs keyed by the unordered pair of raster
/// digests. Components recur across kanji, so hits are common.
class CachedTransport : public TransportOracle {
 public:
  double cost(const PreparedKanji& k1, int s1, const PreparedKanji& k2, int s2, const UbwParams& params) override;
  size_t size() const;
  std::uint64_t solves() const { return solves_.load(); }
  void clear();

 private:
  struct Key {
    std::uint64_t lo, hi;
    int n;
    double p, b;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const;
  };
  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, double, KeyHash> memo_;
  std::atomic<std::uint64_t> solves_{0};
};

double exact_rho(const PreparedKanji& k1, int s1, const PreparedKanji& k2, int s2, const MatchParams& params,
                 TransportOracle& oracle, RhoBreakdown* breakdown = nullptr);
enum class BoundKind { mass, potential };

/// Lower bound on rho; `exact` reports whether no transport solve is needed.
double rho_lower_bound(const PreparedComponent& c1, const PreparedComponent& c2, const MatchParams& params,
                       bool* exact, BoundKind kind = BoundKind::potential);

/// Exact distance between prepared kanji with lazy transport
/// evaluation: only pairs that an optimal matching would use are solved.
MatchResult kanji_distance(const PreparedKanji& k1, const PreparedKanji& k2, const MatchParams& params,
                           TransportOracle& oracle, const SolverOptions& options = {});

/// Lower bound on kanji_distance that needs no transport solves.
double kanji_distance_lower_bound(const PreparedKanji& k1, const PreparedKanji& k2, const MatchParams& params,
                                  BoundKind kind = BoundKind::potential, const SolverOptions& options = {});

MatchResult kanji_distance(const KanjiDecomposition& k1, const KanjiDecomposition& k2, const MatchParams& params = {});

}  // namespace kanjidist
