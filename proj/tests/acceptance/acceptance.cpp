// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "../common/oracles.hpp"
#include "cli.hpp"
#include "kanjidist/analysis.hpp"
#include "kanjidist/rho_fit.hpp"

using namespace kanjidist;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void criterion(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string data_dir() { return KANJIDIST_DATA_DIR; }

std::shared_ptr<const KanjiStore> joyo_store() {
  static std::shared_ptr<const KanjiStore> store = [] {
    const auto list = read_kanji_list(data_dir() + "/joyo.txt");
    auto report = ingest_directory(data_dir() + "/kanjivg", kDefaultMaxLevel, &list);
    return std::make_shared<const KanjiStore>(std::move(report.store));
  }();
  return store;
}

PixelImage random_image(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PixelImage img(n);
  for (double& v : img.cells()) v = u(rng) < 0.4 ? u(rng) : 0.0;
  return img;
}

PixelImage point(int n, int r, int c) {
  PixelImage img(n);
  img.at(r, c) = 1.0;
  return img;
}

const Component& find_component(const KanjiDecomposition& d, int level, const StrokeSet& strokes) {
  for (const auto& c : d.levels.at(level)) {
    if (c.strokes == strokes) return c;
  }
  throw std::runtime_error("component not found in U+" + codepoint_hex(d.codepoint));
}

}  // namespace

int main() {
  std::printf("kanjidist acceptance\n");

  criterion("ot-oracle", [] {
    const auto start = Clock::now();
    std::mt19937_64 rng(2024);
    double worst = 0.0;
    int pairs = 0;
    while (pairs < 200) {
      const int n = 4 + 2 * (pairs % 3);
      const auto a = random_image(rng, n), b = random_image(rng, n);
      if (!a.valid_for_transport() && !b.valid_for_transport()) continue;
      worst = std::max(worst, std::abs(ubw_distance(a, b).cost - brute_oracle(a, b)));
      ++pairs;
    }
    const double t = seconds_since(start);
    report("ot-oracle", worst <= 1e-6 && t < 30.0,
           fmt("200 pairs N in {4,6,8}: max |exact - LP| = %.2e (tol 1e-6), %.1f s (limit 30 s)", worst, t));
  });

  criterion("ot-analytic", [] {
    double worst = 0.0;
    const PixelImage empty(8);
    worst = std::max(worst, std::abs(ubw_distance(point(8, 3, 4), empty).cost - 0.2));
    std::mt19937_64 rng(7);
    const auto img = random_image(rng, 8);
    worst = std::max(worst, std::abs(ubw_distance(img, img).cost));
    for (int k = 1; k < 8; ++k) {
      worst = std::max(worst, std::abs(ubw_distance(point(8, 0, 0), point(8, 0, k)).cost - std::min(k / 8.0, 0.4)));
    }
    worst = std::max(worst, std::abs(relative_ubw(point(8, 0, 0), point(8, 7, 7)) - 1.0));
    report("ot-analytic", worst <= 1e-9,
           fmt("identity, deletion b/2, min(delta, b), far pair relative 1: max error %.2e (tol 1e-9)", worst));
  });

  criterion("fig3-components", [] {
    const auto start = Clock::now();
    const auto k1 = load_kanjivg_file(data_dir() + "/kanjivg/" + kanjivg_filename(U'潟'));
    const auto k2 = load_kanjivg_file(data_dir() + "/kanjivg/" + kanjivg_filename(U'陽'));
    const auto& c1 = find_component(k1, 2, {4, 5, 6, 7, 8, 9});
    const auto& c2 = find_component(k2, 3, {4, 5, 6, 7});
    RasterParams raster;
    raster.n = 64;
    const UbwParams ubw{1.0, 0.4};
    const auto f1 = component_features(component_geometry(k1, c1.strokes), c1.label, raster);
    const auto f2 = component_features(component_geometry(k2, c2.strokes), c2.label, raster);
    const double d = relative_ubw(f1.raster, f2.raster, ubw) * ubw.b;
    const auto pen = registration_penalties(f1.box, f2.box);
    const double t = seconds_since(start);
    const bool ok = std::abs(d - 0.061272) <= 0.01 && std::abs(pen.tau - 0.041694) <= 0.01 &&
                    std::abs(pen.sigma - 0.363346) <= 0.01 && std::abs(pen.chi - 0.013505) <= 0.01 && t < 5.0;
    report("fig3-components", ok,
           fmt("潟 臼 vs 陽 日: d/max %.6f (0.061272), tau %.6f (0.041694), sigma %.6f (0.363346), chi %.6f "
               "(0.013505), tol 0.01, %.2f s (limit 5 s)",
               d, pen.tau, pen.sigma, pen.chi, t));
  });

  criterion("table2-neighbors", [] {
    const auto start = Clock::now();
    auto store = joyo_store();
    Engine engine(store, MatchParams{}, 0);
    engine.prepare(store->codepoints());
    struct Row {
      char32_t query, nn;
      double d;
    };
    const Row rows[] = {{U'粋', U'枠', 0.0596}, {U'酔', U'酢', 0.0594}, {U'枠', U'粋', 0.0596}, {U'砕', U'枠', 0.1109}};
    bool ok = true;
    std::string detail;
    for (const auto& r : rows) {
      const auto nn = engine.knn(r.query, 1);
      const bool row_ok = !nn.empty() && nn[0].cp == r.nn && std::abs(nn[0].distance - r.d) <= 0.02;
      ok = ok && row_ok;
      detail += utf8_encode(r.query) + "->" + (nn.empty() ? "?" : utf8_encode(nn[0].cp)) +
                fmt(" %.4f (%.4f); ", nn.empty() ? 0.0 : nn[0].distance, r.d);
    }
    const double t = seconds_since(start);
    ok = ok && t < 600.0;
    report("table2-neighbors", ok, detail + fmt("tol 0.02, %.0f s over %zu kanji (limit 600 s)", t, store->size()));
  });

  criterion("joyo-subset-matrix", [] {
    auto store = joyo_store();
    auto cps = store->codepoints();
    std::mt19937_64 rng(50);
    std::shuffle(cps.begin(), cps.end(), rng);
    cps.resize(50);
    Engine engine(store, MatchParams{}, 0);
    const auto m = distance_matrix(engine, cps);
    double asym = 0.0, diag = 0.0, top = 0.0, low = 0.0;
    for (size_t i = 0; i < m.size(); ++i) {
      diag = std::max(diag, std::abs(m.at(i, i)));
      for (size_t j = 0; j < m.size(); ++j) {
        asym = std::max(asym, std::abs(m.at(i, j) - m.at(j, i)));
        top = std::max(top, m.at(i, j));
        low = std::min(low, m.at(i, j));
      }
    }
    report("joyo-subset-matrix", asym <= 1e-9 && diag == 0.0 && top <= 0.25 && low >= 0.0,
           fmt("50 random kanji: max asymmetry %.1e (tol 1e-9), max |diag| %.1e, range [%.4f, %.4f] (<= 0.25)", asym,
               diag, low, top));
  });

  criterion("triangle-audit", [] {
    auto store = joyo_store();
    const auto set = read_kanji_list(data_dir() + "/neighborhood42.txt");
    Engine engine(store, MatchParams{}, 0);
    const auto m = distance_matrix(engine, set);
    const auto a = triangle_audit(m);
    report("triangle-audit", a.violation_rate() < 0.02,
           fmt("neighborhood of 粋/枠 (%zu kanji): %lld of %lld triples violate (%.2f%%, limit 2%%), worst gap %.4f",
               set.size(), static_cast<long long>(a.violating_triples), static_cast<long long>(a.triples),
               100.0 * a.violation_rate(), a.worst_gap));
  });

  criterion("matching-exhaustive", [] {
    std::mt19937_64 rng(100);
    int agree = 0;
    for (int t = 0; t < 100; ++t) {
      const auto inst = oracles::random_instance(rng);
      const auto s = solve_binary_matching(inst);
      const auto e = oracles::enumerate_matchings(inst);
      if (std::abs(s.objective - e.objective) <= 1e-12 && s.chosen == e.chosen) ++agree;
    }
    report("matching-exhaustive", agree == 100, fmt("%d of 100 instances (<= 20 variables) equal enumeration", agree));
  });

  criterion("psi-suite", [] {
    double fixed = 0.0;
    for (double alpha : {1.0, 2.0, 3.5}) {
      for (double x0 : {0.2, 0.4, 0.7}) fixed = std::max(fixed, std::abs(psi({alpha, x0}, x0) - 0.5));
    }
    bool monotone = true;
    for (int i = 1; i < 100; ++i) monotone = monotone && psi({2.0, 0.4}, i / 99.0) > psi({2.0, 0.4}, (i - 1) / 99.0);
    double ident = 0.0;
    for (int i = 0; i < 100; ++i) ident = std::max(ident, std::abs(psi({1.0, 0.5}, i / 99.0) - i / 99.0));
    const double e = std::abs(psi({2.0, 0.4}, 0.2) - 9.0 / 73.0);
    report("psi-suite", fixed <= 1e-12 && monotone && ident <= 1e-12 && e <= 1e-12,
           fmt("psi(x0)=1/2 err %.1e, monotone %s, identity err %.1e, psi(2,0.4)(0.2)-9/73 = %.1e (tol 1e-12)", fixed,
               monotone ? "yes" : "no", ident, e));
  });

  criterion("fit-recovery", [] {
    std::vector<std::pair<double, double>> xy;
    for (int i = 1; i < 50; ++i) xy.emplace_back(i / 50.0, psi({2.0, 0.4}, i / 50.0));
    const auto pf = fit_psi(xy);
    const std::array<PsiParams, 4> p{pf.params, PsiParams::identity(), PsiParams::identity(), PsiParams::identity()};
    const std::array<double, 4> truth{0.8, 0.1, 0.05, 0.05};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    std::vector<JudgmentRecord> records;
    for (int i = 0; i < 300; ++i) {
      JudgmentRecord r;
      for (double& f : r.features) f = u(rng);
      r.y = truth[0] * psi({2.0, 0.4}, r.features[0]) + truth[1] * r.features[1] + truth[2] * r.features[2] +
            truth[3] * r.features[3];
      records.push_back(r);
    }
    const auto lf = fit_lambdas(records, p);
    double err = std::max(std::abs(pf.params.alpha - 2.0), std::abs(pf.params.x0 - 0.4));
    for (int k = 0; k < 4; ++k) err = std::max(err, std::abs(lf.lambda[k] - truth[k]));
    report("fit-recovery", err <= 1e-4,
           fmt("alpha %.6f x0 %.6f lambda (%.5f, %.5f, %.5f, %.5f): max error %.1e (tol 1e-4)", pf.params.alpha,
               pf.params.x0, lf.lambda[0], lf.lambda[1], lf.lambda[2], lf.lambda[3], err));
  });

  criterion("weight-sums", [] {
    auto store = joyo_store();
    double worst = 0.0;
    for (char32_t cp : store->codepoints()) {
      const auto& d = store->at(cp);
      const auto w = component_weights(d, 0.02);
      for (int l = 0; l < static_cast<int>(w.w.size()); ++l) {
        const double sum = std::accumulate(w.w[l].begin(), w.w[l].end(), 0.0);
        worst = std::max(worst, std::abs(sum - std::pow(0.98, std::max(0, l - 1))));
      }
    }
    report("weight-sums", worst <= 1e-9,
           fmt("%zu kanji, every level: max |sum - 0.98^max(0,l-1)| = %.1e (tol 1e-9)", store->size(), worst));
  });

  criterion("cli-determinism", [] {
    const auto dir = fs::temp_directory_path() / "kanjidist_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_text_file(dir / "set.txt", "粋枠酔酢砕研辞粉\n");
    auto run = [&](std::vector<std::string> args) {
      std::ostringstream out, err;
      const int code = run_cli(args, out, err);
      if (code != 0) throw std::runtime_error("exit " + std::to_string(code) + ": " + err.str());
      return out.str();
    };
    const auto d1 = run({"dist", "粋", "枠"});
    const auto d2 = run({"dist", "粋", "枠"});
    const auto set = (dir / "set.txt").string();
    bool maps = true;
    for (const std::string mode : {"focused", "global"}) {
      const auto a = (dir / ("a_" + mode)).string(), b = (dir / ("b_" + mode)).string();
      run({"map", set, "--mode", mode, "--center", "粋", "--out", a});
      run({"map", set, "--mode", mode, "--center", "粋", "--out", b});
      maps = maps && read_text_file(a + ".json") == read_text_file(b + ".json") &&
             read_text_file(a + ".svg") == read_text_file(b + ".svg");
    }
    fs::remove_all(dir);
    report("cli-determinism", d1 == d2 && maps,
           fmt("dist output identical: %s; map json/svg identical (focused, global): %s", d1 == d2 ? "yes" : "no",
               maps ? "yes" : "no"));
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "PASSED", failures);
  return failures ? 1 : 0;
}
