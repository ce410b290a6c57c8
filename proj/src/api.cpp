#include "kanjidist/api.hpp"

#include <algorithm>
#include <charconv>

namespace kanjidist {

namespace {

ApiResponse error(int status, const std::string& message) {
  return {status, nlohmann::json{{"error", message}, {"status", status}}};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (start <= path.size()) {
    const size_t slash = path.find('/', start);
    const size_t end = slash == std::string::npos ? path.size() : slash;
    if (end > start) parts.push_back(path.substr(start, end - start));
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return parts;
}

int parse_int(const std::string& s, const char* what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument(std::string(what) + " must be an integer");
  }
  return v;
}

int query_k(const std::map<std::string, std::string>& query, int fallback) {
  auto it = query.find("k");
  const int k = it == query.end() ? fallback : parse_int(it->second, "k");
  if (k < 0 || k > kMaxApiNeighbors) {
    throw std::invalid_argument("k must lie in [0, " + std::to_string(kMaxApiNeighbors) + "]");
  }
  return k;
}

nlohmann::json kanji_ref(char32_t cp) { return {{"cp", codepoint_hex(cp)}, {"kanji", utf8_encode(cp)}}; }

}  // namespace

ApiHandler::ApiHandler(Engine& engine, std::vector<char32_t> corpus) : engine_(engine), corpus_(std::move(corpus)) {}

nlohmann::json ApiHandler::neighbors(char32_t cp, int k) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& n : engine_.knn(cp, k, corpus_)) {
    auto item = kanji_ref(n.cp);
    item["distance"] = n.distance;
    item["bracket"] = bracket_index(n.distance);
    item["color"] = bracket_color(bracket_index(n.distance));
    list.push_back(std::move(item));
  }
  auto out = kanji_ref(cp);
  out["k"] = k;
  out["neighbors"] = std::move(list);
  return out;
}

nlohmann::json ApiHandler::focused(char32_t cp, int k) {
  std::vector<char32_t> set{cp};
  for (const auto& n : engine_.knn(cp, k, corpus_)) set.push_back(n.cp);
  const auto m = distance_matrix(engine_, set);
  auto out = layout_json(focused_mds(m, cp));
  nlohmann::json rings = nlohmann::json::array();
  double rmax = 0.0;
  for (const auto& p : out["points"]) rmax = std::max(rmax, p["r"].get<double>());
  for (int i = 1; i * 0.05 < rmax + 0.05 - 1e-12; ++i) rings.push_back(i * 0.05);
  out["rings"] = std::move(rings);
  out["fingerprint"] = m.fingerprint;
  return out;
}

nlohmann::json ApiHandler::explain(char32_t a, char32_t b) { return engine_.explain(a, b); }

nlohmann::json ApiHandler::render(char32_t cp, int level) {
  return render_level_json(engine_.store().at(cp), level, engine_.params().raster);
}

nlohmann::json render_level_json(const KanjiDecomposition& d, int level, const RasterParams& raster) {
  if (level < 0 || level >= static_cast<int>(d.levels.size())) {
    throw std::invalid_argument("level must lie in [0, " + std::to_string(d.levels.size() - 1) + "]");
  }
  nlohmann::json components = nlohmann::json::array();
  for (size_t i = 0; i < d.levels[level].size(); ++i) {
    const auto& c = d.levels[level][i];
    const auto geometry = component_geometry(d, c.strokes);
    const BBox box = bounding_box(geometry);
    const auto image = rasterize(normalize_component(geometry).geometry, raster.n, raster.width());
    std::vector<double> cells(image.cells().begin(), image.cells().end());
    components.push_back({{"index", i},
                          {"label", c.label ? nlohmann::json(*c.label) : nlohmann::json(nullptr)},
                          {"strokes", c.strokes},
                          {"box", {box.xmin, box.ymin, box.xmax, box.ymax}},
                          {"raster", std::move(cells)}});
  }
  auto out = kanji_ref(d.codepoint);
  out["level"] = level;
  out["n"] = raster.n;
  out["components"] = std::move(components);
  return out;
}

ApiResponse ApiHandler::handle(const std::string& method, const std::string& path,
                               const std::map<std::string, std::string>& query) {
  const auto parts = split_path(path);
  if (parts.empty() || parts[0] != "v1") return error(404, "no such route");
  if (method != "GET") return error(405, "only GET is supported");
  try {
    auto cp = [&](const std::string& s) {
      const char32_t c = parse_kanji_arg(s);
      engine_.store().at(c);
      return c;
    };
    if (parts.size() == 4 && parts[1] == "kanji" && parts[3] == "neighbors") {
      const char32_t c = cp(parts[2]);
      return {200, neighbors(c, query_k(query, 10))};
    }
    if (parts.size() == 4 && parts[1] == "kanji" && parts[3] == "focused") {
      const char32_t c = cp(parts[2]);
      return {200, focused(c, query_k(query, 16))};
    }
    if (parts.size() == 5 && parts[1] == "pair" && parts[4] == "explain") {
      const char32_t a = cp(parts[2]);
      const char32_t b = cp(parts[3]);
      return {200, explain(a, b)};
    }
    if (parts.size() == 4 && parts[1] == "render") {
      const char32_t c = cp(parts[2]);
      return {200, render(c, parse_int(parts[3], "level"))};
    }
    if (parts.size() == 2 && parts[1] == "health") {
      return {200, nlohmann::json{{"status", "ok"},
                                  {"kanji", engine_.store().size()},
                                  {"corpus", corpus_.size()}}};
    }
    return error(404, "no such route");
  } catch (const UnknownKanjiError& e) {
    auto r = error(404, "unknown kanji");
    r.body["cp"] = codepoint_hex(e.codepoint());
    return r;
  } catch (const std::invalid_argument& e) {
    return error(400, e.what());
  }
}

}  // namespace kanjidist
