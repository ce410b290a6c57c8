#include "cli.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "kanjidist/config.hpp"
#include "kanjidist/rho_fit.hpp"

namespace kanjidist {

namespace {

std::string unicode_name(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
  return buf;
}

class ServeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct GlobalOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string store;
  std::string data_dir;
  int threads = -1;
};

struct Session {
  EngineConfig config;
  std::shared_ptr<const KanjiStore> store;
  std::vector<char32_t> corpus;
  std::unique_ptr<Engine> engine;
};

EngineConfig effective_config(const GlobalOptions& g) {
  EngineConfig c = g.config_file.empty() ? EngineConfig{} : load_config(g.config_file);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!g.store.empty()) c.store = g.store;
  if (!g.data_dir.empty()) c.data_dir = g.data_dir;
  if (g.threads >= 0) c.threads = g.threads;
  try {
    validate(c.match);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

Session open_session(const GlobalOptions& g) {
  Session s;
  s.config = effective_config(g);
  std::optional<std::vector<char32_t>> filter;
  if (!s.config.kanji_list.empty()) filter = read_kanji_list(resolve_in_data_dir(s.config, s.config.kanji_list));
  if (!s.config.store.empty()) {
    s.store = std::make_shared<const KanjiStore>(load_store(s.config.store));
  } else {
    auto report = ingest_directory(resolve_in_data_dir(s.config, "kanjivg"), s.config.ingest_max_level,
                                   filter ? &*filter : nullptr);
    s.store = std::make_shared<const KanjiStore>(std::move(report.store));
  }
  for (char32_t cp : s.store->codepoints()) {
    if (!filter || std::find(filter->begin(), filter->end(), cp) != filter->end()) s.corpus.push_back(cp);
  }
  s.engine = std::make_unique<Engine>(s.store, s.config.match, s.config.threads);
  return s;
}

std::vector<char32_t> read_set(const Session& s, const std::string& file) {
  auto set = read_kanji_list(file);
  for (char32_t cp : set) s.store->at(cp);
  return set;
}

DistanceMatrix load_matrix(const std::string& prefix) {
  if (std::filesystem::exists(prefix + ".bin")) return read_matrix_binary(prefix + ".bin", prefix + ".json");
  if (std::filesystem::exists(prefix + ".csv")) return matrix_from_csv(read_text_file(prefix + ".csv"));
  throw IoError("no cached matrix at '" + prefix + "' (.bin/.json or .csv)");
}

void check_fingerprint(const DistanceMatrix& m, const Session& s, std::ostream& err) {
  const auto expected = params_fingerprint(s.config.match);
  if (!m.fingerprint.empty() && m.fingerprint != expected) {
    err << "warning: cached matrix was computed with parameters " << m.fingerprint << ", current are " << expected
        << "\n";
  }
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) throw std::invalid_argument("bad number '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

std::map<std::string, std::string> query_map(const httplib::Request& req) {
  std::map<std::string, std::string> q;
  for (const auto& [k, v] : req.params) q.emplace(k, v);
  return q;
}

}  // namespace

std::unique_ptr<httplib::Server> make_http_server(ApiHandler& handler) {
  auto server = std::make_unique<httplib::Server>();
  // a second server must not share the port
  server->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                               {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                               {"Access-Control-Allow-Headers", "Content-Type"}});
  server->Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server->Get(".*", [&handler](const httplib::Request& req, httplib::Response& res) {
    ApiResponse r;
    try {
      r = handler.handle("GET", req.path, query_map(req));
    } catch (const std::exception& e) {
      r = {500, nlohmann::json{{"error", e.what()}, {"status", 500}}};
    }
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  });
  return server;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"kanjidist: distances between kanji by hierarchical optimal transport of their components",
               "kanjidist"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config_file, "Engine configuration file");
  app.add_option("--set", g.overrides, "Override a configuration key (key=value), repeatable");
  app.add_option("--store", g.store, "Decomposition store written by 'ingest'");
  app.add_option("--data-dir", g.data_dir, "Directory with kanjivg/ and kanji lists");
  app.add_option("--threads", g.threads, "Worker threads (0: all CPUs)")->check(CLI::NonNegativeNumber);

  std::function<void()> action;

  auto* ingest = app.add_subcommand("ingest", "Parse kanjiVG SVGs into a decomposition store");
  std::string ingest_dir, ingest_out, ingest_list;
  int ingest_level = kDefaultMaxLevel;
  ingest->add_option("svg_dir", ingest_dir)->required();
  ingest->add_option("out_store", ingest_out)->required();
  ingest->add_option("--list", ingest_list, "Only ingest the kanji of this list");
  ingest->add_option("--max-level", ingest_level)->check(CLI::Range(1, 8));
  ingest->callback([&] {
    action = [&] {
      std::optional<std::vector<char32_t>> filter;
      if (!ingest_list.empty()) filter = read_kanji_list(ingest_list);
      auto report = ingest_directory(ingest_dir, ingest_level, filter ? &*filter : nullptr);
      save_store(report.store, ingest_out);
      out << "ingested " << report.store.size() << "\n";
      for (const auto& f : report.failures) out << "failed " << f.file << ": " << f.message << "\n";
      for (const auto& n : report.notes) err << "note " << n << "\n";
    };
  });

  auto* dist = app.add_subcommand("dist", "Distance between two kanji");
  std::string dist_a, dist_b;
  bool dist_explain = false;
  dist->add_option("kanji1", dist_a)->required();
  dist->add_option("kanji2", dist_b)->required();
  dist->add_flag("--explain", dist_explain, "Print the optimal matching as JSON");
  dist->callback([&] {
    action = [&] {
      const char32_t a = parse_kanji_arg(dist_a), b = parse_kanji_arg(dist_b);
      auto s = open_session(g);
      s.store->at(a);
      s.store->at(b);
      if (dist_explain) {
        out << nlohmann::json(s.engine->explain(a, b)).dump(2) << "\n";
      } else {
        out << fixed6(s.engine->distance(a, b)) << "\n";
      }
    };
  });

  auto* knn = app.add_subcommand("knn", "Nearest neighbors of a kanji");
  std::string knn_kanji, knn_matrix;
  int knn_k = 10;
  bool knn_brackets = false;
  knn->add_option("kanji", knn_kanji)->required();
  knn->add_option("k", knn_k)->check(CLI::NonNegativeNumber);
  knn->add_flag("--brackets", knn_brackets, "Append the color bracket of each distance");
  knn->add_option("--matrix", knn_matrix, "Use a cached matrix (prefix given to 'cache')");
  knn->callback([&] {
    action = [&] {
      const char32_t q = parse_kanji_arg(knn_kanji);
      auto s = open_session(g);
      s.store->at(q);
      std::vector<Neighbor> list;
      if (!knn_matrix.empty()) {
        const auto m = load_matrix(knn_matrix);
        check_fingerprint(m, s, err);
        list = kanjidist::knn(m, q, knn_k);
      } else {
        list = s.engine->knn(q, knn_k, s.corpus);
      }
      int rank = 0;
      for (const auto& n : list) {
        out << ++rank << "\t" << utf8_encode(n.cp) << "\t" << unicode_name(n.cp) << "\t" << fixed6(n.distance);
        if (knn_brackets) {
          const int b = bracket_index(n.distance);
          out << "\t" << b << "\t" << bracket_label(b) << "\t" << bracket_color(b);
        }
        out << "\n";
      }
    };
  });

  auto* map = app.add_subcommand("map", "Two-dimensional map of a kanji set (JSON and SVG)");
  std::string map_set, map_mode = "focused", map_center, map_out, map_matrix;
  map->add_option("set_file", map_set, "Kanji list")->required();
  map->add_option("--mode", map_mode)->check(CLI::IsMember({"focused", "global"}));
  map->add_option("--center", map_center, "Center kanji (focused mode)");
  map->add_option("--out", map_out, "Output prefix; writes <prefix>.json and <prefix>.svg")->required();
  map->add_option("--matrix", map_matrix, "Use a cached matrix (prefix given to 'cache')");
  map->callback([&] {
    action = [&] {
      if (map_mode == "focused" && map_center.empty()) throw CLI::ValidationError("--center is required in focused mode");
      auto s = open_session(g);
      const auto set = read_set(s, map_set);
      DistanceMatrix m;
      if (!map_matrix.empty()) {
        const auto full = load_matrix(map_matrix);
        check_fingerprint(full, s, err);
        m.codepoints = set;
        m.fingerprint = full.fingerprint;
        m.values.assign(set.size() * set.size(), 0.0);
        std::vector<size_t> idx;
        for (char32_t cp : set) idx.push_back(full.index_of(cp));
        for (size_t i = 0; i < set.size(); ++i) {
          for (size_t j = 0; j < set.size(); ++j) m.at(i, j) = full.at(idx[i], idx[j]);
        }
      } else {
        m = distance_matrix(*s.engine, set);
      }
      nlohmann::json json;
      std::string svg;
      if (map_mode == "focused") {
        const char32_t center = parse_kanji_arg(map_center);
        s.store->at(center);
        if (std::find(set.begin(), set.end(), center) == set.end()) {
          throw CLI::ValidationError("center " + utf8_encode(center) + " is not in the set");
        }
        const auto layout = focused_mds(m, center);
        json = layout_json(layout);
        json["mode"] = "focused";
        svg = focused_svg(layout, 0.05);
      } else {
        const auto mds = metric_mds(m);
        json = global_layout_json(m, mds);
        svg = global_svg(m, mds);
      }
      json["fingerprint"] = m.fingerprint;
      write_text_file(map_out + ".json", json.dump(2) + "\n");
      write_text_file(map_out + ".svg", svg);
      out << map_out << ".json\n" << map_out << ".svg\n";
    };
  });

  auto* cache = app.add_subcommand("cache", "Compute and store a distance matrix");
  std::string cache_set, cache_out, cache_format = "both";
  cache->add_option("set_file", cache_set, "Kanji list; omit for the whole corpus");
  cache->add_option("--out", cache_out, "Output prefix")->required();
  cache->add_option("--format", cache_format)->check(CLI::IsMember({"bin", "csv", "both"}));
  cache->callback([&] {
    action = [&] {
      auto s = open_session(g);
      const auto set = cache_set.empty() ? s.corpus : read_set(s, cache_set);
      const auto m = distance_matrix(*s.engine, set);
      if (cache_format != "csv") {
        write_matrix_binary(m, cache_out + ".bin", cache_out + ".json");
        out << cache_out << ".bin\n" << cache_out << ".json\n";
      }
      if (cache_format != "bin") {
        write_text_file(cache_out + ".csv", matrix_to_csv(m));
        out << cache_out << ".csv\n";
      }
    };
  });

  auto* serve = app.add_subcommand("serve", "Serve the /v1 JSON API over HTTP");
  int serve_port = 8080;
  std::string serve_host = "127.0.0.1";
  serve->add_option("--port", serve_port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", serve_host);
  serve->callback([&] {
    action = [&] {
      auto s = open_session(g);
      ApiHandler handler(*s.engine, s.corpus);
      auto server = make_http_server(handler);
      int port = serve_port;
      if (port == 0) {
        port = server->bind_to_any_port(serve_host);
        if (port < 0) throw ServeError("cannot bind " + serve_host);
      } else if (!server->bind_to_port(serve_host, port)) {
        throw ServeError("cannot bind " + serve_host + ":" + std::to_string(port));
      }
      out << "listening on http://" << serve_host << ":" << port << "/v1\n" << std::flush;
      if (!server->listen_after_bind()) throw ServeError("server stopped with an error");
    };
  });

  auto* fit = app.add_subcommand("fit", "Fit transforms and weights from judgment data");
  std::string fit_csv, fit_out;
  std::vector<std::string> fit_psi_features = {"ubw"};
  fit->add_option("csv", fit_csv, "Columns ubw, tau, sigma, chi, y")->required();
  fit->add_option("--psi", fit_psi_features, "Features whose transform is fitted before the weights")
      ->check(CLI::IsMember({"ubw", "tau", "sigma", "chi"}))
      ->delimiter(',');
  fit->add_option("--out", fit_out, "Write the updated configuration here instead of stdout");
  fit->callback([&] {
    action = [&] {
      auto config = effective_config(g);
      const auto records = parse_judgments_csv(read_text_file(fit_csv));
      const std::array<std::string, 4> names{"ubw", "tau", "sigma", "chi"};
      auto& rho = config.match.rho;
      for (int i = 0; i < 4; ++i) {
        if (std::find(fit_psi_features.begin(), fit_psi_features.end(), names[i]) == fit_psi_features.end()) continue;
        std::vector<std::pair<double, double>> xy;
        for (const auto& r : records) xy.emplace_back(r.features[i], r.y);
        const auto f = fit_psi(xy);
        rho.psi[i] = f.params;
        err << "psi " << names[i] << ": alpha " << f.params.alpha << " x0 " << f.params.x0
            << (f.floored ? " (alpha floored at 1)" : "") << "\n";
      }
      const auto lf = fit_lambdas(records, rho.psi);
      rho.lambda = lf.lambda;
      err << "lambda residual " << lf.residual << " after " << lf.iterations << " iterations\n";
      const auto text = format_config(config);
      if (fit_out.empty()) {
        out << text;
      } else {
        write_text_file(fit_out, text);
        out << fit_out << "\n";
      }
    };
  });

  auto* predict = app.add_subcommand("predict", "Kernel estimate of the dissimilarity at a covariate vector");
  std::string predict_csv, predict_query, predict_bandwidth;
  predict->add_option("csv", predict_csv, "Training data")->required();
  predict->add_option("--query", predict_query, "Comma-separated covariates")->required();
  predict->add_option("--bandwidth", predict_bandwidth, "One value or one per covariate")->required();
  predict->callback([&] {
    action = [&] {
      const auto records = parse_judgments_csv(read_text_file(predict_csv));
      const auto r = nadaraya_watson(records, parse_doubles(predict_query), parse_doubles(predict_bandwidth));
      out << fixed6(r.estimate) << (r.fallback ? "\tnearest-neighbor fallback" : "") << "\n";
    };
  });

  auto* config = app.add_subcommand("config", "Print the effective configuration");
  config->callback([&] { action = [&] { out << format_config(effective_config(g)); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadArguments;
  }
  try {
    if (action) action();
    return kExitOk;
  } catch (const UnknownKanjiError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUnknownKanji;
  } catch (const ServeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitServe;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadArguments;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadArguments;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitBadArguments;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace kanjidist
