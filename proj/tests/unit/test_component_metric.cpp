#include <doctest.h>

#include <cmath>
#include <random>

#include "kanjidist/component_metric.hpp"
#include "support.hpp"

using namespace kanjidist;
using testing_support::line;

namespace {

// Root of logit(y) = alpha * (logit(x) - logit(x0)) by bisection.
double psi_by_bisection(double alpha, double x0, double x) {
  auto logit = [](double u) { return std::log(u / (1.0 - u)); };
  const double target = alpha * (logit(x) - logit(x0));
  double lo = 1e-15, hi = 1.0 - 1e-15;
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2.0;
    (logit(mid) < target ? lo : hi) = mid;
  }
  return (lo + hi) / 2.0;
}

ComponentFeatures features(const KanjiDecomposition& k, int level, int index, const RasterParams& raster = {}) {
  const auto& c = k.component(level, index);
  return component_features(component_geometry(k, c.strokes), c.label, raster);
}

}  // namespace

TEST_CASE("psi fixed point, identity and endpoints") {
  for (double alpha : {1.0, 1.5, 2.0, 5.0}) {
    for (double x0 : {0.1, 0.4, 0.5, 0.9}) {
      CHECK(std::abs(psi({alpha, x0}, x0) - 0.5) < 1e-12);
      CHECK(psi({alpha, x0}, 0.0) == 0.0);
      CHECK(psi({alpha, x0}, 1.0) == 1.0);
    }
  }
  for (int i = 0; i <= 100; ++i) CHECK(psi({1.0, 0.5}, i / 100.0) == doctest::Approx(i / 100.0).epsilon(1e-15));
  CHECK(std::abs(psi({2.0, 0.4}, 0.2) - 9.0 / 73.0) < 1e-12);
  CHECK(std::abs(psi({2.0, 0.4}, 0.2) - psi_by_bisection(2.0, 0.4, 0.2)) < 1e-12);
}

TEST_CASE("psi is increasing and invertible") {
  for (const PsiParams p : {PsiParams{2.0, 0.4}, PsiParams{3.5, 0.2}, PsiParams{1.2, 0.7}}) {
    double previous = -1.0;
    for (int i = 0; i <= 100; ++i) {
      const double x = i / 100.0;
      const double y = psi(p, x);
      CHECK(y > previous);
      previous = y;
      CHECK(std::abs(psi(p, psi_inverse(p, x)) - x) < 1e-9);
      if (i > 0 && i < 100) CHECK(std::abs(y - psi_by_bisection(p.alpha, p.x0, x)) < 1e-12);
    }
  }
}

TEST_CASE("registration penalties") {
  const BBox a{0.1, 0.5, 0.1, 0.3};
  const BBox b{0.2, 0.6, 0.2, 0.4};
  const auto same = registration_penalties(a, a);
  CHECK(same.tau == 0.0);
  CHECK(same.sigma == 0.0);
  CHECK(same.chi == 0.0);
  const auto p = registration_penalties(a, b);
  CHECK(p.tau == doctest::Approx(std::sqrt(0.02)));
  CHECK(p.sigma == doctest::Approx(0.0).scale(1.0));
  CHECK(p.chi == doctest::Approx(0.0).scale(1.0));

  const BBox wide{0.0, 0.8, 0.0, 0.2};
  const auto q = registration_penalties(a, wide);
  CHECK(q.sigma == doctest::Approx(std::abs(std::log(std::sqrt(0.4 * 0.2) / std::sqrt(0.8 * 0.2)))));
  CHECK(q.chi == doctest::Approx(std::abs(std::log(2.0 / 4.0))));

  const BBox flat{0.2, 0.8, 0.5, 0.5};
  const auto f = registration_penalties(flat, a);
  CHECK(std::isfinite(f.chi));
  CHECK(f.chi == doctest::Approx(std::abs(std::log(0.6 / kMinBoxSide) - std::log(2.0))));
}

TEST_CASE("rho of a component with itself is zero") {
  const auto k = testing_support::load(U'顔');
  RhoParams no_override;
  no_override.label_override = false;
  for (int level = 0; level <= 3; ++level) {
    for (int i = 0; i < static_cast<int>(k.levels[level].size()); ++i) {
      const auto f = features(k, level, i);
      CHECK(rho(f, f, {}).value == 0.0);
      CHECK(rho(f, f, no_override).value == 0.0);
    }
  }
}

TEST_CASE("equal labels zero the transport term") {
  const auto k = testing_support::load(U'顔');
  const auto j = testing_support::load(U'須');
  const auto a = features(k, 1, 1);  // 頁
  const auto b = features(j, 1, 1);  // 頁
  REQUIRE(a.label == std::optional<std::string>("頁"));
  REQUIRE(b.label == a.label);
  const auto r = rho(a, b, {});
  CHECK(r.labels_match);
  CHECK(r.transport == 0.0);
  const auto pen = registration_penalties(a.box, b.box);
  const double expected = 0.1 * std::min(pen.tau, 1.0) + 0.05 * std::min(pen.sigma, 1.0) + 0.05 * std::min(pen.chi, 1.0);
  CHECK(std::abs(r.value - expected) < 1e-15);
}

TEST_CASE("rho composes its terms") {
  const RhoParams params;
  const RegistrationPenalties pen{0.041694, 0.363346, 0.013505};
  const double transport = 0.061272 / 0.2;
  const double expected = 0.8 * psi({2.0, 0.4}, transport) + 0.1 * 0.041694 + 0.05 * 0.363346 + 0.05 * 0.013505;
  CHECK(std::abs(rho_from_terms(params, transport, pen, false) - expected) < 1e-15);

  // sigma and chi beyond one are clamped
  const RegistrationPenalties big{0.0, 3.0, 2.0};
  CHECK(rho_from_terms(params, 0.0, big, false) == doctest::Approx(0.1));
}

TEST_CASE("rho is symmetric, bounded and dominates the penalty terms") {
  std::mt19937_64 rng(21);
  const auto store = testing_support::store_of(U"粋枠酔酢砕顔須");
  std::vector<ComponentFeatures> all;
  for (char32_t cp : store->codepoints()) {
    const auto& d = store->at(cp);
    for (int l = 0; l <= 2; ++l) {
      for (int i = 0; i < static_cast<int>(d.levels[l].size()); ++i) all.push_back(features(d, l, i));
    }
  }
  std::uniform_int_distribution<size_t> pick(0, all.size() - 1);
  for (int t = 0; t < 40; ++t) {
    const auto& a = all[pick(rng)];
    const auto& b = all[pick(rng)];
    const auto ab = rho(a, b, {});
    const auto ba = rho(b, a, {});
    CHECK(std::abs(ab.value - ba.value) < 1e-9);
    CHECK(ab.value <= 1.0);
    const auto& p = ab.penalties;
    CHECK(ab.value >= 0.1 * std::min(p.tau, 1.0) + 0.05 * std::min(p.sigma, 1.0) + 0.05 * std::min(p.chi, 1.0) - 1e-15);
  }
}

TEST_CASE("with only the transport term rho is the relative distance") {
  RhoParams params;
  params.lambda = {1.0, 0.0, 0.0, 0.0};
  params.psi[0] = PsiParams::identity();
  params.ot_divisor = params.ubw.b;
  ComponentFeatures a = component_features(line(0.1, 0.2, 0.8, 0.3), std::nullopt, {});
  ComponentFeatures b = component_features(line(0.1, 0.2, 0.3, 0.9), std::nullopt, {});
  CHECK(rho(a, b, params).value == doctest::Approx(relative_ubw(a.raster, b.raster)).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  RhoParams p;
  CHECK_NOTHROW(validate(p));
  p.lambda = {0.5, 0.5, 0.5, 0.0};
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = RhoParams{};
  p.psi[1] = {0.5, 0.5};
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  CHECK(labels_match(std::string("口"), std::string("口")));
  CHECK_FALSE(labels_match(std::nullopt, std::nullopt));
  CHECK_FALSE(labels_match(std::string("口"), std::nullopt));
}
