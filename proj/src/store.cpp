#include "kanjidist/store.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace kanjidist {

namespace fs = std::filesystem;

UnknownKanjiError::UnknownKanjiError(char32_t cp)
    : std::out_of_range("unknown kanji " + utf8_encode(cp) + " (U+" + codepoint_hex(cp) + ")"), cp_(cp) {}

void KanjiStore::insert(KanjiDecomposition d) {
  const char32_t cp = d.codepoint;
  kanji_.insert_or_assign(cp, std::move(d));
}

const KanjiDecomposition& KanjiStore::at(char32_t cp) const {
  auto it = kanji_.find(cp);
  if (it == kanji_.end()) throw UnknownKanjiError(cp);
  return it->second;
}

std::vector<char32_t> KanjiStore::codepoints() const {
  std::vector<char32_t> out;
  out.reserve(kanji_.size());
  for (const auto& [cp, d] : kanji_) out.push_back(cp);
  return out;
}

std::string read_text_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + file.string());
  return ss.str();
}

void write_text_file(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
  if (!out) throw IoError("error while writing " + file.string());
}

KanjiDecomposition load_kanjivg_file(const fs::path& file, int max_level, std::vector<std::string>* notes) {
  return build_decomposition(parse_kanjivg(read_text_file(file)), max_level, notes);
}

IngestReport ingest_directory(const fs::path& dir, int max_level, const std::vector<char32_t>* filter) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a readable directory: " + dir.string());
  std::vector<fs::path> files;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->path().extension() == ".svg") files.push_back(it->path());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  std::set<std::string> wanted;
  if (filter) {
    for (char32_t cp : *filter) wanted.insert(kanjivg_filename(cp));
  }

  IngestReport report;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    if (filter && !wanted.count(name)) continue;
    try {
      std::vector<std::string> notes;
      KanjiDecomposition d = load_kanjivg_file(f, max_level, &notes);
      for (auto& n : notes) report.notes.push_back(name + ": " + n);
      report.store.insert(std::move(d));
    } catch (const std::exception& e) {
      report.failures.push_back({name, e.what()});
    }
  }
  return report;
}

void save_store(const KanjiStore& store, const fs::path& file) {
  std::string out;
  for (char32_t cp : store.codepoints()) {
    nlohmann::json j = store.at(cp);
    out += j.dump();
    out += '\n';
  }
  write_text_file(file, out);
}

KanjiStore load_store(const fs::path& file) {
  const std::string text = read_text_file(file);
  KanjiStore store;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      store.insert(nlohmann::json::parse(line).get<KanjiDecomposition>());
    } catch (const std::exception& e) {
      throw IoError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return store;
}

std::vector<char32_t> parse_kanji_list(const std::string& text) {
  std::vector<char32_t> out;
  std::set<char32_t> seen;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::string_view rest = line;
    while (!rest.empty()) {
      const unsigned char c = static_cast<unsigned char>(rest.front());
      const size_t len = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
      if (c >= 0x80) {
        const char32_t cp = utf8_decode_first(rest);
        if (seen.insert(cp).second) out.push_back(cp);
      }
      rest.remove_prefix(std::min(len, rest.size()));
    }
  }
  return out;
}

std::vector<char32_t> read_kanji_list(const fs::path& file) { return parse_kanji_list(read_text_file(file)); }

char32_t parse_kanji_arg(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty kanji argument");
  std::string_view v = s;
  if (static_cast<unsigned char>(v.front()) >= 0x80) {
    const char32_t cp = utf8_decode_first(v);
    if (utf8_encode(cp).size() != v.size()) throw std::invalid_argument("expected a single kanji: '" + s + "'");
    return cp;
  }
  if (v.size() > 2 && (v[0] == 'U' || v[0] == 'u') && v[1] == '+') v.remove_prefix(2);
  unsigned long value = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value, 16);
  if (ec != std::errc() || ptr != v.data() + v.size() || value == 0 || value > 0x10FFFF) {
    throw std::invalid_argument("not a kanji or hex codepoint: '" + s + "'");
  }
  return static_cast<char32_t>(value);
}

}  // namespace kanjidist
