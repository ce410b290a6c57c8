#include "kanjidist/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace kanjidist {

bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.cp < b.cp;
}

int default_thread_count() { return std::max(1u, std::thread::hardware_concurrency()); }

void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (size_t t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Engine::Engine(std::shared_ptr<const KanjiStore> store, MatchParams params, int threads)
    : store_(std::move(store)), params_(params), threads_(threads > 0 ? threads : default_thread_count()) {
  if (!store_) throw std::invalid_argument("engine: no store");
  validate(params_);
}

std::shared_ptr<const PreparedKanji> Engine::prepared(char32_t cp) {
  {
    std::shared_lock lock(prepared_mutex_);
    if (auto it = prepared_.find(cp); it != prepared_.end()) return it->second;
  }
  auto p = std::make_shared<const PreparedKanji>(prepare_kanji(store_->at(cp), params_));
  std::unique_lock lock(prepared_mutex_);
  return prepared_.emplace(cp, std::move(p)).first->second;
}

void Engine::prepare(const std::vector<char32_t>& cps) {
  parallel_for(cps.size(), threads_, [&](size_t i) { prepared(cps[i]); });
}

MatchResult Engine::solve(char32_t lo, char32_t hi) {
  return kanji_distance(*prepared(lo), *prepared(hi), params_, transport_);
}

namespace {

std::uint64_t pair_key(char32_t lo, char32_t hi) { return (static_cast<std::uint64_t>(lo) << 32) | hi; }

}  // namespace

double Engine::distance(char32_t a, char32_t b) {
  const char32_t lo = std::min(a, b), hi = std::max(a, b);
  store_->at(lo);
  store_->at(hi);
  if (lo == hi) return 0.0;
  const auto key = pair_key(lo, hi);
  {
    std::shared_lock lock(distance_mutex_);
    if (auto it = distances_.find(key); it != distances_.end()) return it->second;
  }
  const double d = solve(lo, hi).distance;
  std::unique_lock lock(distance_mutex_);
  distances_.emplace(key, d);
  return d;
}

MatchResult Engine::explain(char32_t a, char32_t b) {
  const char32_t lo = std::min(a, b), hi = std::max(a, b);
  MatchResult r = solve(lo, hi);
  if (lo == hi) r.distance = 0.0;
  {
    std::unique_lock lock(distance_mutex_);
    if (lo != hi) distances_.emplace(pair_key(lo, hi), r.distance);
  }
  if (a == lo) return r;
  std::swap(r.from_codepoint, r.to_codepoint);
  for (auto& p : r.pairs) {
    std::swap(p.from, p.to);
    std::swap(p.label_from, p.label_to);
  }
  std::sort(r.pairs.begin(), r.pairs.end(), [](const MatchedPair& x, const MatchedPair& y) {
    return std::tie(x.from, x.to) < std::tie(y.from, y.to);
  });
  return r;
}

double Engine::lower_bound(char32_t a, char32_t b, BoundKind kind) {
  const char32_t lo = std::min(a, b), hi = std::max(a, b);
  if (lo == hi) return 0.0;
  return kanji_distance_lower_bound(*prepared(lo), *prepared(hi), params_, kind);
}

std::uint64_t Engine::exact_distances() const {
  std::shared_lock lock(distance_mutex_);
  return distances_.size();
}

std::vector<Neighbor> Engine::knn(char32_t query, int k) { return knn(query, k, store_->codepoints()); }

std::vector<Neighbor> Engine::knn(char32_t query, int k, const std::vector<char32_t>& candidates) {
  store_->at(query);
  std::vector<char32_t> pool;
  for (char32_t cp : candidates) {
    if (cp != query) pool.push_back(cp);
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (k <= 0 || pool.empty()) return {};
  const size_t want = std::min(pool.size(), static_cast<size_t>(k));

  prepared(query);
  prepare(pool);

  std::vector<Neighbor> screened(pool.size());
  parallel_for(pool.size(), threads_, [&](size_t i) {
    screened[i] = {pool[i], lower_bound(query, pool[i], BoundKind::mass)};
  });
  std::sort(screened.begin(), screened.end(), neighbor_less);

  std::vector<Neighbor> best;
  auto threshold = [&] {
    return best.size() < want ? std::numeric_limits<double>::infinity() : best[want - 1].distance;
  };
  const size_t batch_size = static_cast<size_t>(threads_);
  size_t i = 0;
  while (i < screened.size()) {
    std::vector<char32_t> batch;
    bool exhausted = false;
    while (batch.size() < batch_size && i < screened.size()) {
      const Neighbor& c = screened[i++];
      const double t = threshold();
      if (c.distance > t) {
        exhausted = true;
        break;
      }
      if (best.size() >= want && lower_bound(query, c.cp, BoundKind::potential) > t) continue;
      batch.push_back(c.cp);
    }
    std::vector<Neighbor> found(batch.size());
    parallel_for(batch.size(), threads_, [&](size_t j) { found[j] = {batch[j], distance(query, batch[j])}; });
    for (const auto& n : found) {
      best.insert(std::upper_bound(best.begin(), best.end(), n, neighbor_less), n);
      if (best.size() > want) best.pop_back();
    }
    if (exhausted) break;
  }
  return best;
}

}  // namespace kanjidist
