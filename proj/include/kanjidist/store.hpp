#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "kanjidist/kanjivg.hpp"

namespace kanjidist {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownKanjiError : public std::out_of_range {
 public:
  explicit UnknownKanjiError(char32_t cp);
  char32_t codepoint() const { return cp_; }

 private:
  char32_t cp_;
};

/// Decompositions keyed by codepoint, iterated in codepoint order.
class KanjiStore {
 public:
  void insert(KanjiDecomposition d);
  bool contains(char32_t cp) const { return kanji_.count(cp) > 0; }
  const KanjiDecomposition& at(char32_t cp) const;
  std::vector<char32_t> codepoints() const;
  size_t size() const { return kanji_.size(); }

  friend bool operator==(const KanjiStore&, const KanjiStore&) = default;

 private:
  std::map<char32_t, KanjiDecomposition> kanji_;
};

struct IngestFailure {
  std::string file;
  std::string message;
};

struct IngestReport {
  KanjiStore store;
  std::vector<IngestFailure> failures;
  std::vector<std::string> notes;  // "<file>: <note>"
};

KanjiDecomposition load_kanjivg_file(const std::filesystem::path& file, int max_level = kDefaultMaxLevel,
                                     std::vector<std::string>* notes = nullptr);

/// Parses every *.svg in `dir` (sorted by name). With a filter, only files
/// named after one of its codepoints are read. Throws IoError if the
/// directory cannot be read; per-file problems land in `failures`.
IngestReport ingest_directory(const std::filesystem::path& dir, int max_level = kDefaultMaxLevel,
                              const std::vector<char32_t>* filter = nullptr);

/// One JSON decomposition per line, in codepoint order.
void save_store(const KanjiStore& store, const std::filesystem::path& file);
KanjiStore load_store(const std::filesystem::path& file);

/// Kanji listed one per line or run together; blank lines and '#' comments
/// are skipped. Duplicates are dropped, first occurrence wins.
std::vector<char32_t> read_kanji_list(const std::filesystem::path& file);
std::vector<char32_t> parse_kanji_list(const std::string& text);

/// Accepts a kanji character, "U+7C8B" or bare hex "7c8b".
char32_t parse_kanji_arg(const std::string& s);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

}  // namespace kanjidist
