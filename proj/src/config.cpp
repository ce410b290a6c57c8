#include "kanjidist/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>
#include <vector>

#include "kanjidist/store.hpp"

namespace kanjidist {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

using Entry = std::pair<std::string, std::string>;

std::vector<Entry> match_entries(const MatchParams& m) {
  std::vector<Entry> out;
  out.emplace_back("raster.n", std::to_string(m.raster.n));
  out.emplace_back("raster.line_width", fmt_double(m.raster.line_width));
  out.emplace_back("ubw.p", fmt_double(m.rho.ubw.p));
  out.emplace_back("ubw.b", fmt_double(m.rho.ubw.b));
  for (int i = 0; i < 4; ++i) out.emplace_back("rho.lambda" + std::to_string(i), fmt_double(m.rho.lambda[i]));
  for (int i = 0; i < 4; ++i) {
    out.emplace_back("rho.psi" + std::to_string(i) + ".alpha", fmt_double(m.rho.psi[i].alpha));
    out.emplace_back("rho.psi" + std::to_string(i) + ".x0", fmt_double(m.rho.psi[i].x0));
  }
  out.emplace_back("rho.label_override", fmt_bool(m.rho.label_override));
  out.emplace_back("rho.ot_divisor", fmt_double(m.rho.ot_divisor));
  out.emplace_back("match.a", fmt_double(m.a));
  out.emplace_back("match.mu", to_string(m.mu));
  out.emplace_back("match.trickle", fmt_double(m.trickle));
  out.emplace_back("match.max_level", std::to_string(m.max_level));
  out.emplace_back("match.min_strokes", std::to_string(m.min_strokes));
  out.emplace_back("match.include_root", fmt_bool(m.include_root));
  return out;
}

}  // namespace

void set_config_value(EngineConfig& c, const std::string& key, const std::string& value) {
  auto& m = c.match;
  if (key == "data_dir") {
    c.data_dir = value;
  } else if (key == "store") {
    c.store = value;
  } else if (key == "kanji_list") {
    c.kanji_list = value;
  } else if (key == "ingest.max_level") {
    c.ingest_max_level = to_int(key, value);
  } else if (key == "threads") {
    c.threads = to_int(key, value);
  } else if (key == "raster.n") {
    m.raster.n = to_int(key, value);
  } else if (key == "raster.line_width") {
    m.raster.line_width = to_double(key, value);
  } else if (key == "ubw.p") {
    m.rho.ubw.p = to_double(key, value);
  } else if (key == "ubw.b") {
    m.rho.ubw.b = to_double(key, value);
  } else if (key.size() == 11 && key.rfind("rho.lambda", 0) == 0 && key[10] >= '0' && key[10] <= '3') {
    m.rho.lambda[key[10] - '0'] = to_double(key, value);
  } else if (key.rfind("rho.psi", 0) == 0 && key.size() > 9 && key[7] >= '0' && key[7] <= '3' && key[8] == '.') {
    auto& psi = m.rho.psi[key[7] - '0'];
    const std::string field = key.substr(9);
    if (field == "alpha") {
      psi.alpha = to_double(key, value);
    } else if (field == "x0") {
      psi.x0 = to_double(key, value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  } else if (key == "rho.label_override") {
    m.rho.label_override = to_bool(key, value);
  } else if (key == "rho.ot_divisor") {
    m.rho.ot_divisor = to_double(key, value);
  } else if (key == "match.a") {
    m.a = to_double(key, value);
  } else if (key == "match.mu") {
    try {
      m.mu = parse_mu_kind(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what());
    }
  } else if (key == "match.trickle") {
    m.trickle = to_double(key, value);
  } else if (key == "match.max_level") {
    m.max_level = to_int(key, value);
  } else if (key == "match.min_strokes") {
    m.min_strokes = to_int(key, value);
  } else if (key == "match.include_root") {
    m.include_root = to_bool(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

EngineConfig parse_config(const std::string& text) {
  EngineConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = line;
    if (auto hash = body.find('#'); hash != std::string::npos) body.resize(hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    try {
      set_config_value(c, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  try {
    validate(c.match);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string format_config(const EngineConfig& c) {
  std::string out = "# kanjidist engine configuration\n";
  out += "data_dir = " + c.data_dir + "\n";
  out += "store = " + c.store + "\n";
  out += "kanji_list = " + c.kanji_list + "\n";
  out += "ingest.max_level = " + std::to_string(c.ingest_max_level) + "\n";
  out += "threads = " + std::to_string(c.threads) + "\n";
  for (const auto& [k, v] : match_entries(c.match)) out += k + " = " + v + "\n";
  return out;
}

EngineConfig load_config(const std::filesystem::path& file) { return parse_config(read_text_file(file)); }

void save_config(const EngineConfig& config, const std::filesystem::path& file) {
  write_text_file(file, format_config(config));
}

std::string canonical_match_params(const MatchParams& params) {
  std::string out;
  for (const auto& [k, v] : match_entries(params)) out += k + "=" + v + "\n";
  return out;
}

std::string params_fingerprint(const MatchParams& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_match_params(params)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path resolve_in_data_dir(const EngineConfig& config, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  return std::filesystem::path(config.data_dir) / p;
}

}  // namespace kanjidist
