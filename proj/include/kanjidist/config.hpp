#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "kanjidist/hierarchy_match.hpp"

namespace kanjidist {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EngineConfig {
  std::string data_dir = KANJIDIST_DATA_DIR;
  std::string store;                 // decomposition store; empty: parse SVGs from data_dir/kanjivg
  std::string kanji_list = "joyo.txt";  // corpus filter, relative to data_dir unless absolute
  int ingest_max_level = kDefaultMaxLevel;
  int threads = 0;                   // 0: hardware concurrency
  MatchParams match;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

/// Flat "key = value" text, one key per line, '#' comments. Unknown keys and
/// malformed values throw ConfigError naming the line.
EngineConfig parse_config(const std::string& text);
std::string format_config(const EngineConfig& config);

EngineConfig load_config(const std::filesystem::path& file);
void save_config(const EngineConfig& config, const std::filesystem::path& file);

/// Applies one key=value assignment. Ranges are checked by validate(), not here,
/// so that related keys can be set one after another.
void set_config_value(EngineConfig& config, const std::string& key, const std::string& value);

/// Every parameter that changes distances, as canonical key=value text.
std::string canonical_match_params(const MatchParams& params);
/// FNV-1a over canonical_match_params, as 16 hex digits.
std::string params_fingerprint(const MatchParams& params);

std::filesystem::path resolve_in_data_dir(const EngineConfig& config, const std::string& path);

}  // namespace kanjidist
