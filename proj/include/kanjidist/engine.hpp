#pragma once

#include <functional>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "kanjidist/hierarchy_match.hpp"
#include "kanjidist/store.hpp"

namespace kanjidist {

struct Neighbor {
  char32_t cp = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Orders by distance, then codepoint.
bool neighbor_less(const Neighbor& a, const Neighbor& b);

/// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
/// exception after all workers stop.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn);

int default_thread_count();

/// Distances over one store with shared caches. All methods are thread-safe.
/// Every pair is solved in codepoint order, so d(a, b) and d(b, a) agree bitwise.
class Engine {
 public:
  Engine(std::shared_ptr<const KanjiStore> store, MatchParams params, int threads = 0);

  const KanjiStore& store() const { return *store_; }
  const MatchParams& params() const { return params_; }
  int threads() const { return threads_; }

  std::shared_ptr<const PreparedKanji> prepared(char32_t cp);
  void prepare(const std::vector<char32_t>& cps);

  double distance(char32_t a, char32_t b);
  /// Matching oriented from `a` to `b`.
  MatchResult explain(char32_t a, char32_t b);
  double lower_bound(char32_t a, char32_t b, BoundKind kind = BoundKind::potential);

  /// k nearest candidates of `query` by exact distance, skipping the query
  /// itself. Candidates are pruned with lower bounds before exact solves.
  std::vector<Neighbor> knn(char32_t query, int k, const std::vector<char32_t>& candidates);
  std::vector<Neighbor> knn(char32_t query, int k);

  std::uint64_t transport_solves() const { return transport_.solves(); }
  std::uint64_t exact_distances() const;

 private:
  MatchResult solve(char32_t lo, char32_t hi);

  std::shared_ptr<const KanjiStore> store_;
  MatchParams params_;
  int threads_;
  CachedTransport transport_;

  mutable std::shared_mutex prepared_mutex_;
  std::unordered_map<char32_t, std::shared_ptr<const PreparedKanji>> prepared_;

  mutable std::shared_mutex distance_mutex_;
  std::unordered_map<std::uint64_t, double> distances_;
};

}  // namespace kanjidist
