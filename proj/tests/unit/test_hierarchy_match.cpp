#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "../common/oracles.hpp"
#include "kanjidist/hierarchy_match.hpp"
#include "support.hpp"

using namespace kanjidist;
using testing_support::load;

namespace {

KanjiDecomposition single_stroke(char32_t cp, const std::string& path) {
  const std::string text =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:kvg=\"http://kanjivg.tagaini.net\">"
      "<g id=\"kvg:StrokePaths_" +
      codepoint_hex(cp) + "\"><g kvg:element=\"" + utf8_encode(cp) + "\"><path d=\"" + path + "\"/></g></g></svg>";
  return build_decomposition(parse_kanjivg(text), 3);
}

void audit(const MatchResult& r, const PreparedKanji& k1, const PreparedKanji& k2, const MatchParams& params) {
  double matched = 0.0, cost = 0.0;
  for (const auto& p : r.pairs) {
    matched += p.mu_weight;
    cost += p.mu_weight * p.rho;
    CHECK(p.rho < params.a);
  }
  CHECK(std::abs(r.matched_weight - matched) < 1e-12);
  CHECK(std::abs(r.distance - (params.a * (1.0 - matched) + cost)) < 1e-9);
  CHECK(r.distance >= 0.0);
  CHECK(r.distance <= params.a);
  auto slot_of = [](const PreparedKanji& k, ComponentIndex c) {
    for (size_t s = 0; s < k.slots.size(); ++s) {
      if (k.slots[s].index == c) return static_cast<int>(s);
    }
    return -1;
  };
  for (const auto& vein : k1.veins) {
    int touched = 0;
    for (const auto& p : r.pairs) touched += std::count(vein.begin(), vein.end(), slot_of(k1, p.from));
    CHECK(touched <= 1);
  }
  for (const auto& vein : k2.veins) {
    int touched = 0;
    for (const auto& p : r.pairs) touched += std::count(vein.begin(), vein.end(), slot_of(k2, p.to));
    CHECK(touched <= 1);
  }
}

}  // namespace

TEST_CASE("mu kinds") {
  CHECK(mu(MuKind::min, 0.3, 0.7) == doctest::Approx(0.3));
  for (auto kind : {MuKind::min, MuKind::geometric, MuKind::harmonic, MuKind::arithmetic}) {
    CHECK(mu(kind, 0.25, 0.25) == doctest::Approx(0.25));
    CHECK(parse_mu_kind(to_string(kind)) == kind);
  }
  CHECK(mu(MuKind::harmonic, 0.2, 0.0) == 0.0);
  CHECK(mu(MuKind::geometric, 0.2, 0.0) == 0.0);
  CHECK(mu(MuKind::geometric, 0.2, 0.8) == doctest::Approx(0.4));
  CHECK(mu(MuKind::harmonic, 0.2, 0.8) == doctest::Approx(0.32));
  CHECK(mu(MuKind::arithmetic, 0.2, 0.8) == doctest::Approx(0.5));
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double w = u(rng), w2 = u(rng);
    for (auto kind : {MuKind::min, MuKind::geometric, MuKind::harmonic, MuKind::arithmetic}) {
      CHECK(mu(kind, w, w2) >= std::min(w, w2) - 1e-15);
    }
  }
  CHECK_THROWS_AS(parse_mu_kind("median"), std::invalid_argument);
}

TEST_CASE("component weights follow ink length") {
  const auto one = load(U'一');
  const auto w1 = component_weights(one, 0.02);
  CHECK(w1.at(1, 0) == doctest::Approx(1.0));

  const auto k = load(U'顔');
  const auto w = component_weights(k, 0.02);
  double total = 0.0, face = 0.0;
  for (const auto& s : k.strokes) total += stroke_length(s);
  for (int s : k.levels[1][1].strokes) face += stroke_length(k.strokes[s - 1]);
  CHECK(w.at(1, 1) == doctest::Approx(face / total).epsilon(1e-12));
  CHECK(w.at(0, 0) == doctest::Approx(1.0));
  for (int level = 1; level <= k.max_level(); ++level) {
    const double sum = std::accumulate(w.w[level].begin(), w.w[level].end(), 0.0);
    CHECK(std::abs(sum - std::pow(0.98, level - 1)) < 1e-9);
  }

  // level 2 of 顔 shares stroke 5 between 立 and 厂: it counts half for each
  const double s5 = stroke_length(k.strokes[4]);
  double li = 0.0;
  for (int s : k.levels[2][0].strokes) li += stroke_length(k.strokes[s - 1]);
  CHECK(w.at(2, 0) == doctest::Approx((li - s5 / 2.0) / total * 0.98).epsilon(1e-12));

  CHECK_THROWS(component_weights(k, std::vector<double>(18, 0.0), 0.02));
}

TEST_CASE("single candidate pair") {
  MatchingInstance inst;
  inst.left_count = inst.right_count = 1;
  inst.cost = {0.1};
  inst.weight = {0.5};
  inst.left_veins = {{0}};
  inst.right_veins = {{0}};
  auto s = solve_binary_matching(inst);
  REQUIRE(s.chosen.size() == 1);
  CHECK(s.objective == doctest::Approx(0.25 * 0.5 + 0.05));
  inst.cost = {0.3};
  s = solve_binary_matching(inst);
  CHECK(s.chosen.empty());
  CHECK(s.objective == doctest::Approx(0.25));
}

TEST_CASE("branch and bound equals exhaustive enumeration") {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 60; ++t) {
    const auto inst = oracles::random_instance(rng);
    const auto s = solve_binary_matching(inst);
    const auto e = oracles::enumerate_matchings(inst);
    CHECK(std::abs(s.objective - e.objective) < 1e-12);
    CHECK(s.chosen == e.chosen);
    CHECK(satisfies_vein_constraints(inst, s.chosen));
    CHECK(std::abs(matching_objective(inst, s.chosen) - s.objective) < 1e-12);
  }
}

TEST_CASE("equal optima resolve to the lexicographically smallest selection") {
  MatchingInstance inst;
  inst.left_count = 2;
  inst.right_count = 2;
  inst.cost = {0.1, 0.1, 0.1, 0.1};
  inst.weight = {0.3, 0.3, 0.3, 0.3};
  inst.left_veins = {{0}, {1}};
  inst.right_veins = {{0}, {1}};
  const auto s = solve_binary_matching(inst);
  // 0110 precedes 1001
  CHECK(s.chosen == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
}

TEST_CASE("solver limits") {
  MatchingInstance big;
  big.left_count = 101;
  big.right_count = 101;
  big.cost.assign(101 * 101, 0.1);
  big.weight.assign(101 * 101, 0.01);
  CHECK_THROWS_AS(solve_binary_matching(big), std::invalid_argument);

  std::mt19937_64 rng(33);
  int limited = 0;
  for (int t = 0; t < 30; ++t) {
    const auto inst = oracles::random_instance(rng);
    SolverOptions tight;
    tight.max_nodes = 1;
    try {
      solve_binary_matching(inst, tight);
    } catch (const SolverLimitError& e) {
      ++limited;
      CHECK(e.bound() <= oracles::enumerate_matchings(inst).objective + 1e-12);
    }
  }
  CHECK(limited > 0);
}

TEST_CASE("a kanji is at distance zero from itself") {
  const auto store = testing_support::joyo_store();
  MatchParams params;
  DirectTransport direct;
  for (char32_t cp : store->codepoints()) {
    const auto k = prepare_kanji(store->at(cp), params);
    const auto r = kanji_distance(k, k, params, direct);
    INFO("kanji " << utf8_encode(cp));
    CHECK(std::abs(r.distance) < 1e-12);
  }
}

TEST_CASE("顔 and 須 match 頁 and 彡") {
  const auto r = kanji_distance(load(U'顔'), load(U'須'));
  REQUIRE(r.pairs.size() == 2);
  CHECK(r.pairs[0].label_from == std::optional<std::string>("頁"));
  CHECK(r.pairs[0].label_to == std::optional<std::string>("頁"));
  CHECK(r.pairs[0].from == ComponentIndex{1, 1});
  CHECK(r.pairs[1].label_from == std::optional<std::string>("彡"));
  CHECK(r.pairs[1].label_to == std::optional<std::string>("彡"));
  CHECK(r.pairs[1].from == ComponentIndex{2, 2});
  CHECK(r.pairs[1].to == ComponentIndex{2, 0});
  const nlohmann::json j = r;
  CHECK(j.at("pairs").size() == 2);
  CHECK(j.at("pairs")[0].at("from") == nlohmann::json::array({1, 1}));
  CHECK(j.at("pairs")[0].at("labels") == nlohmann::json::array({"頁", "頁"}));
  for (const char* key : {"distance", "matched_weight", "unmatched_weight", "unmatched_penalty", "from", "to"}) {
    CHECK(j.contains(key));
  }
}

TEST_CASE("unrelated glyphs stay unmatched") {
  const auto a = single_stroke(0xE000, "M5,5 C10,5 15,5 20,5");
  const auto b = single_stroke(0xE001, "M100,40 C100,60 100,80 100,104");
  const auto r = kanji_distance(a, b);
  CHECK(r.pairs.empty());
  CHECK(r.distance == doctest::Approx(0.25));
  const auto pa = prepare_kanji(a, {});
  const auto pb = prepare_kanji(b, {});
  for (const auto& s1 : pa.slots) {
    for (const auto& s2 : pb.slots) {
      bool exact = false;
      CHECK(rho_lower_bound(s1, s2, {}, &exact) >= 0.25);
    }
  }
}

TEST_CASE("distance audits on real pairs") {
  const auto store = testing_support::store_of(U"粋枠酔酢砕研徴懲顔須悔母局");
  const MatchParams params;
  CachedTransport cache;
  DirectTransport direct;
  std::vector<PreparedKanji> prepared;
  for (char32_t cp : store->codepoints()) prepared.push_back(prepare_kanji(store->at(cp), params));
  for (size_t i = 0; i < prepared.size(); ++i) {
    for (size_t j = i + 1; j < prepared.size(); j += 3) {
      const auto r = kanji_distance(prepared[i], prepared[j], params, cache);
      const auto back = kanji_distance(prepared[j], prepared[i], params, cache);
      audit(r, prepared[i], prepared[j], params);
      audit(back, prepared[j], prepared[i], params);
      CHECK(std::abs(r.distance - back.distance) < 1e-9);
      CHECK(kanji_distance_lower_bound(prepared[i], prepared[j], params) <= r.distance + 1e-12);
      CHECK(kanji_distance_lower_bound(prepared[i], prepared[j], params, BoundKind::mass) <= r.distance + 1e-12);
      if (i == 0) CHECK(kanji_distance(prepared[i], prepared[j], params, direct).distance == r.distance);
    }
  }
}

TEST_CASE("matching a root excludes every other pair on that side") {
  MatchParams params;
  const auto k1 = prepare_kanji(load(U'徴'), params);
  const auto k2 = prepare_kanji(load(U'懲'), params);
  CachedTransport cache;
  const auto r = kanji_distance(k1, k2, params, cache);
  audit(r, k1, k2, params);
  for (const auto& p : r.pairs) {
    if (p.from.level == 0) CHECK(r.pairs.size() == 1);
    if (p.to.level == 0) CHECK(r.pairs.size() == 1);
  }

  MatchingInstance inst;
  inst.left_count = 3;
  inst.right_count = 2;
  inst.cost = {0.05, 0.05, 0.01, 0.2, 0.2, 0.01};
  inst.weight = {0.9, 0.9, 0.4, 0.4, 0.4, 0.4};
  inst.left_veins = {{0, 1}, {0, 2}};
  inst.right_veins = {{0}, {1}};
  const auto s = solve_binary_matching(inst);
  bool root_used = false;
  for (auto [l, r2] : s.chosen) root_used = root_used || l == 0;
  if (root_used) CHECK(s.chosen.size() == 1);
  CHECK(s.chosen == oracles::enumerate_matchings(inst).chosen);
}

TEST_CASE("distances of identical decompositions with all rho zero") {
  MatchParams params;
  const auto k = prepare_kanji(load(U'顔'), params);
  CachedTransport cache;
  const auto r = kanji_distance(k, k, params, cache);
  double matched = 0.0;
  for (const auto& p : r.pairs) matched += p.mu_weight;
  CHECK(r.distance == doctest::Approx(params.a * (1.0 - matched)).scale(1.0));
}

TEST_CASE("parameter validation") {
  MatchParams p;
  CHECK_NOTHROW(validate(p));
  p.a = 0.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = MatchParams{};
  p.trickle = 1.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}
