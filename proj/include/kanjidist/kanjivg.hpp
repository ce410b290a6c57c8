#pragma once

#include "json.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kanjidist/geometry.hpp"

namespace kanjidist {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One <g> element of a kanjiVG file with the kvg attributes we use.
struct RawGroup {
  std::optional<std::string> element;
  std::optional<std::string> original;
  std::optional<std::string> part;
  std::optional<std::string> number;
  std::vector<int> own_strokes;  // 1-based, document order
  std::vector<RawGroup> subgroups;
};

struct RawKanjiTree {
  char32_t codepoint = 0;
  RawGroup root;
  std::vector<Stroke> strokes;  // document order, index = position + 1
};

/// Sorted, duplicate-free 1-based stroke numbers.
using StrokeSet = std::vector<int>;

struct Component {
  StrokeSet strokes;
  std::optional<std::string> label;

  friend bool operator==(const Component&, const Component&) = default;
};

/// Levels 0..L+1 of increasingly fine components: level 0 is the whole kanji,
/// level L+1 the single strokes.
struct KanjiDecomposition {
  char32_t codepoint = 0;
  std::vector<Stroke> strokes;
  std::vector<std::vector<Component>> levels;

  int max_level() const { return static_cast<int>(levels.size()) - 2; }
  int stroke_count() const { return static_cast<int>(strokes.size()); }
  const Component& component(int level, int index) const { return levels.at(level).at(index); }

  friend bool operator==(const KanjiDecomposition&, const KanjiDecomposition&) = default;
};

struct ComponentIndex {
  int level = 0;
  int index = 0;

  friend auto operator<=>(const ComponentIndex&, const ComponentIndex&) = default;
};

/// A vein holds one component index per level 0..L, nested downwards.
using Vein = std::vector<ComponentIndex>;

struct IndexSetAndVeins {
  std::vector<ComponentIndex> essential;  // levels 1..L
  std::vector<Vein> veins;
};

inline constexpr int kDefaultMaxLevel = 3;

/// Parses a kanjiVG SVG document. Throws ParseError on malformed XML (with
/// line information), unsupported path commands, or a file without strokes.
RawKanjiTree parse_kanjivg(std::string_view svg_text);

/// Parses the "d" attribute of a kanjiVG path (M/m, C/c, S/s commands).
BezierPath parse_path_data(std::string_view d);

/// Turns the raw group tree into a nested decomposition with levels 0..L+1.
/// Split parts are re-united, single-child wrappers flattened, and levels
/// beyond `max_level` dropped. Repairs are appended to `notes` when given.
/// Throws StructuralError if the result violates a structural invariant.
KanjiDecomposition build_decomposition(const RawKanjiTree& tree, int max_level = kDefaultMaxLevel,
                                       std::vector<std::string>* notes = nullptr);

/// Lists all violations of the decomposition invariants; empty when valid.
std::vector<std::string> find_structure_violations(const KanjiDecomposition& d);

/// Throws StructuralError listing every violation.
void validate_decomposition(const KanjiDecomposition& d);

IndexSetAndVeins index_and_veins(const KanjiDecomposition& d);

/// Unit-canvas geometry of the given strokes of a kanji.
ComponentGeometry component_geometry(const KanjiDecomposition& d, const StrokeSet& strokes);

void to_json(nlohmann::json& j, const KanjiDecomposition& d);
void from_json(const nlohmann::json& j, KanjiDecomposition& d);

std::string utf8_encode(char32_t cp);
/// Decodes the first scalar of a UTF-8 string; throws ParseError on bad input.
char32_t utf8_decode_first(std::string_view s);
/// Lowercase hex, zero-padded to five digits as in kanjiVG file names.
std::string codepoint_hex(char32_t cp);
std::string kanjivg_filename(char32_t cp);

}  // namespace kanjidist
