#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "kanjidist/analysis.hpp"

namespace kanjidist {

inline constexpr int kMaxApiNeighbors = 64;

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Routes of the /v1 JSON API over one engine. Neighbor searches range over
/// `corpus`. Thread-safe as long as the engine is.
class ApiHandler {
 public:
  ApiHandler(Engine& engine, std::vector<char32_t> corpus);

  /// `path` without query string, e.g. "/v1/kanji/7c8b/neighbors".
  ApiResponse handle(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& query);

  nlohmann::json neighbors(char32_t cp, int k);
  nlohmann::json focused(char32_t cp, int k);
  nlohmann::json explain(char32_t a, char32_t b);
  nlohmann::json render(char32_t cp, int level);

 private:
  Engine& engine_;
  std::vector<char32_t> corpus_;
};

/// Component rasters of one decomposition level, normalized as for transport.
nlohmann::json render_level_json(const KanjiDecomposition& d, int level, const RasterParams& raster);

}  // namespace kanjidist
