#pragma once

#include <map>
#include <mutex>
#include <random>
#include <string>

#include "kanjidist/analysis.hpp"
#include "kanjidist/store.hpp"

namespace testing_support {

inline std::string data_dir() { return KANJIDIST_DATA_DIR; }

inline kanjidist::KanjiDecomposition load(char32_t cp, int max_level = kanjidist::kDefaultMaxLevel) {
  return kanjidist::load_kanjivg_file(data_dir() + "/kanjivg/" + kanjidist::kanjivg_filename(cp), max_level);
}

inline std::vector<char32_t> joyo() { return kanjidist::read_kanji_list(data_dir() + "/joyo.txt"); }

/// The Joyo store, parsed once per test binary.
inline std::shared_ptr<const kanjidist::KanjiStore> joyo_store() {
  static std::once_flag once;
  static std::shared_ptr<const kanjidist::KanjiStore> store;
  std::call_once(once, [] {
    const auto list = joyo();
    auto report = kanjidist::ingest_directory(data_dir() + "/kanjivg", kanjidist::kDefaultMaxLevel, &list);
    store = std::make_shared<const kanjidist::KanjiStore>(std::move(report.store));
  });
  return store;
}

/// A small store with the given kanji only.
inline std::shared_ptr<const kanjidist::KanjiStore> store_of(const std::u32string& kanji) {
  kanjidist::KanjiStore s;
  for (char32_t cp : kanji) s.insert(load(cp));
  return std::make_shared<const kanjidist::KanjiStore>(std::move(s));
}

inline kanjidist::PixelImage random_image(std::mt19937_64& rng, int n, double density = 0.4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  kanjidist::PixelImage img(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) img.at(r, c) = u(rng) < density ? u(rng) : 0.0;
  }
  return img;
}

inline kanjidist::ComponentGeometry line(double x0, double y0, double x1, double y1) {
  using kanjidist::CubicBezier;
  using kanjidist::Point;
  const Point a{x0, y0}, b{x1, y1};
  const Point p1{x0 + (x1 - x0) / 3.0, y0 + (y1 - y0) / 3.0};
  const Point p2{x0 + 2.0 * (x1 - x0) / 3.0, y0 + 2.0 * (y1 - y0) / 3.0};
  return kanjidist::ComponentGeometry{{kanjidist::BezierPath{CubicBezier{a, p1, p2, b}}}};
}

}  // namespace testing_support
