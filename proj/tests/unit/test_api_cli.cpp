#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "httplib.h"
#include "kanjidist/api.hpp"
#include "kanjidist/config.hpp"
#include "kanjidist/rho_fit.hpp"
#include "support.hpp"

using namespace kanjidist;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

fs::path workdir() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / "kanjidist_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    write_text_file(d / "small.txt", "粋枠酔酢砕研顔須\n");
    write_text_file(d / "set.txt", "粋枠酔酢砕\n");
    return d;
  }();
  return dir;
}

Run run(std::vector<std::string> args, bool small = true) {
  if (small) args.insert(args.begin(), {"--set", "kanji_list=" + (workdir() / "small.txt").string()});
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace

TEST_CASE("dist prints the distance") {
  const auto r = run({"dist", "粋", "枠"});
  REQUIRE(r.code == kExitOk);
  CHECK(std::abs(std::stod(r.out) - 0.0596) < 0.02);
  const auto same = run({"dist", "粋", "U+7C8B"});
  CHECK(same.out == "0.000000\n");
}

TEST_CASE("dist --explain prints the matching") {
  const auto r = run({"dist", "顔", "須", "--explain"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("pairs").size() == 2);
  CHECK(r.out.find("頁") != std::string::npos);
  CHECK(r.out.find("彡") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({"dist", "粋", "猫"}).code == kExitUnknownKanji);
  CHECK(run({"knn", "猫"}).code == kExitUnknownKanji);
  CHECK(run({"dist", "粋"}).code == kExitBadArguments);
  CHECK(run({"frobnicate"}).code == kExitBadArguments);
  CHECK(run({"--set", "match.a=7", "dist", "粋", "枠"}).code == kExitBadArguments);
  CHECK(run({"map", (workdir() / "set.txt").string(), "--mode", "focused", "--out", (workdir() / "m").string()}).code ==
        kExitBadArguments);
  CHECK(run({"map", (workdir() / "set.txt").string(), "--mode", "focused", "--center", "顔", "--out",
             (workdir() / "m").string()})
            .code == kExitBadArguments);
  CHECK(run({"map", (workdir() / "missing.txt").string(), "--mode", "global", "--out", (workdir() / "m").string()})
            .code == kExitIo);
  CHECK(run({"--store", (workdir() / "missing.jsonl").string(), "dist", "粋", "枠"}).code == kExitIo);
  const auto zero = run({"knn", "粋", "0"});
  CHECK(zero.code == kExitOk);
  CHECK(zero.out.empty());
}

TEST_CASE("knn lists neighbors in order") {
  const auto r = run({"knn", "粋", "3", "--brackets"});
  REQUIRE(r.code == kExitOk);
  std::istringstream lines(r.out);
  std::string line;
  std::vector<double> d;
  while (std::getline(lines, line)) {
    std::vector<std::string> f;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, '\t')) f.push_back(cell);
    REQUIRE(f.size() == 7);
    d.push_back(std::stod(f[3]));
  }
  REQUIRE(d.size() == 3);
  CHECK(r.out.rfind("1\t枠\tU+67A0\t", 0) == 0);
  CHECK(std::is_sorted(d.begin(), d.end()));
}

TEST_CASE("dist and map are reproducible byte for byte") {
  CHECK(run({"dist", "酔", "酢"}).out == run({"dist", "酔", "酢"}).out);
  const auto set = (workdir() / "set.txt").string();
  for (const std::string mode : {"focused", "global"}) {
    const auto a = (workdir() / ("a_" + mode)).string();
    const auto b = (workdir() / ("b_" + mode)).string();
    REQUIRE(run({"map", set, "--mode", mode, "--center", "粋", "--out", a}).code == kExitOk);
    REQUIRE(run({"map", set, "--mode", mode, "--center", "粋", "--out", b}).code == kExitOk);
    CHECK(read_text_file(a + ".json") == read_text_file(b + ".json"));
    CHECK(read_text_file(a + ".svg") == read_text_file(b + ".svg"));
  }
  const auto j = nlohmann::json::parse(read_text_file((workdir() / "a_focused").string() + ".json"));
  CHECK(j.at("points").size() == 4);
}

TEST_CASE("cache writes matrices that knn and map can reuse") {
  const auto prefix = (workdir() / "cache").string();
  REQUIRE(run({"cache", (workdir() / "set.txt").string(), "--out", prefix, "--format", "both"}).code == kExitOk);
  CHECK(fs::exists(prefix + ".bin"));
  CHECK(fs::exists(prefix + ".json"));
  CHECK(fs::exists(prefix + ".csv"));
  const auto direct = run({"knn", "酔", "2"});
  const auto cached = run({"knn", "酔", "2", "--matrix", prefix});
  REQUIRE(cached.code == kExitOk);
  CHECK(direct.out == cached.out);
}

TEST_CASE("ingest and store round trip through the CLI") {
  const auto store = (workdir() / "store.jsonl").string();
  const auto r = run({"ingest", (fs::path(testing_support::data_dir()) / "kanjivg").string(), store, "--list",
                      (workdir() / "small.txt").string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("ingested 8") != std::string::npos);
  const auto d = run({"--store", store, "dist", "粋", "枠"}, false);
  CHECK(d.out == run({"dist", "粋", "枠"}).out);
  CHECK(run({"config"}).out.find("match.a") != std::string::npos);
}

TEST_CASE("fit and predict") {
  std::ostringstream csv;
  csv << "ubw,tau,sigma,chi,y\n";
  for (int i = 1; i < 40; ++i) {
    const double x = i / 40.0, t = (i % 7) / 10.0, s = (i % 5) / 10.0, c = (i % 3) / 10.0;
    const double y = 0.8 * psi({2.0, 0.4}, x) + 0.1 * t + 0.05 * s + 0.05 * c;
    csv << x << "," << t << "," << s << "," << c << "," << y << "\n";
  }
  write_text_file(workdir() / "judgments.csv", csv.str());
  const auto r = run({"fit", (workdir() / "judgments.csv").string()});
  REQUIRE(r.code == kExitOk);
  const auto config = parse_config(r.out);
  const auto records = parse_judgments_csv(csv.str());
  std::vector<std::pair<double, double>> xy;
  for (const auto& rec : records) xy.emplace_back(rec.features[0], rec.y);
  auto psi_params = EngineConfig{}.match.rho.psi;
  psi_params[0] = fit_psi(xy).params;
  const auto lambda = fit_lambdas(records, psi_params).lambda;
  CHECK(config.match.rho.psi[0].alpha == doctest::Approx(psi_params[0].alpha));
  CHECK(config.match.rho.psi[0].x0 == doctest::Approx(psi_params[0].x0));
  for (int k = 0; k < 4; ++k) CHECK(config.match.rho.lambda[k] == doctest::Approx(lambda[k]).epsilon(1e-9));
  const auto p = run({"predict", (workdir() / "judgments.csv").string(), "--query", "0.5,0.1,0.1,0.1", "--bandwidth",
                      "0.1"});
  REQUIRE(p.code == kExitOk);
  const double y = std::stod(p.out);
  CHECK(y > 0.0);
  CHECK(y < 1.0);
  CHECK(run({"predict", (workdir() / "judgments.csv").string(), "--query", "0.5", "--bandwidth", "0.1"}).code ==
        kExitBadArguments);
}

TEST_CASE("API routes") {
  const auto store = testing_support::store_of(U"粋枠酔酢砕研顔須");
  Engine engine(store, MatchParams{}, 1);
  ApiHandler api(engine, store->codepoints());

  auto n = api.handle("GET", "/v1/kanji/7c8b/neighbors", {{"k", "3"}});
  REQUIRE(n.status == 200);
  CHECK(n.body.at("kanji") == "粋");
  REQUIRE(n.body.at("neighbors").size() == 3);
  CHECK(n.body.at("neighbors")[0].at("kanji") == "枠");
  for (const char* key : {"cp", "kanji", "distance", "bracket", "color"}) CHECK(n.body.at("neighbors")[0].contains(key));

  const auto f = api.handle("GET", "/v1/kanji/粋/focused", {{"k", "4"}});
  REQUIRE(f.status == 200);
  CHECK(f.body.at("points").size() == 4);
  CHECK(f.body.contains("rings"));
  CHECK(f.body.contains("fingerprint"));

  const auto e = api.handle("GET", "/v1/pair/9854/9808/explain", {});
  REQUIRE(e.status == 200);
  CHECK(e.body.at("pairs").size() == 2);

  const auto r = api.handle("GET", "/v1/render/9854/2", {});
  REQUIRE(r.status == 200);
  CHECK(r.body.at("components").size() == 5);
  CHECK(r.body.at("components")[0].at("box").size() == 4);

  CHECK(api.handle("GET", "/v1/health", {}).status == 200);
  const auto missing = api.handle("GET", "/v1/kanji/732b/neighbors", {});
  CHECK(missing.status == 404);
  CHECK(missing.body.at("error") == "unknown kanji");
  CHECK(api.handle("GET", "/v1/kanji/7c8b/neighbors", {{"k", "abc"}}).status == 400);
  CHECK(api.handle("GET", "/v1/kanji/7c8b/neighbors", {{"k", "1000"}}).status == 400);
  CHECK(api.handle("GET", "/v1/render/9854/9", {}).status == 400);
  CHECK(api.handle("GET", "/v2/health", {}).status == 404);
  CHECK(api.handle("GET", "/v1/nothing", {}).status == 404);
  CHECK(api.handle("POST", "/v1/health", {}).status == 405);
}

TEST_CASE("HTTP server with CORS headers") {
  const auto store = testing_support::store_of(U"粋枠酔");
  Engine engine(store, MatchParams{}, 1);
  ApiHandler api(engine, store->codepoints());
  auto server = make_http_server(api);
  const int port = server->bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&] { server->listen_after_bind(); });
  server->wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/v1/kanji/7c8b/neighbors?k=1");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(nlohmann::json::parse(res->body).at("neighbors")[0].at("kanji") == "枠");
  auto bad = client.Get("/v1/kanji/732b/neighbors");
  REQUIRE(bad);
  CHECK(bad->status == 404);
  CHECK(nlohmann::json::parse(bad->body).at("error") == "unknown kanji");
  auto pre = client.Options("/v1/health");
  REQUIRE(pre);
  CHECK(pre->status == 204);

  // the serve command cannot take a port that is in use
  CHECK(run({"serve", "--port", std::to_string(port)}).code == kExitServe);

  server->stop();
  worker.join();
}
