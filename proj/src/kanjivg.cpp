#include "kanjidist/kanjivg.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace kanjidist {

namespace pt = boost::property_tree;

// ---------------------------------------------------------------------------
// UTF-8 helpers

std::string utf8_encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

char32_t utf8_decode_first(std::string_view s) {
  if (s.empty()) throw ParseError("empty UTF-8 string");
  const auto b0 = static_cast<unsigned char>(s[0]);
  int len = 0;
  char32_t cp = 0;
  if (b0 < 0x80) return b0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    throw ParseError("invalid UTF-8 lead byte");
  }
  if (static_cast<int>(s.size()) < len) throw ParseError("truncated UTF-8 sequence");
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[k]);
    if ((b & 0xC0) != 0x80) throw ParseError("invalid UTF-8 continuation byte");
    cp = (cp << 6) | (b & 0x3F);
  }
  return cp;
}

std::string codepoint_hex(char32_t cp) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05x", static_cast<unsigned>(cp));
  return buf;
}

std::string kanjivg_filename(char32_t cp) { return codepoint_hex(cp) + ".svg"; }

// ---------------------------------------------------------------------------
// Path data

namespace {

class PathScanner {
 public:
  explicit PathScanner(std::string_view d) : d_(d) {}

  void skip_separators() {
    while (pos_ < d_.size() && (std::isspace(static_cast<unsigned char>(d_[pos_])) || d_[pos_] == ',')) ++pos_;
  }

  bool at_end() {
    skip_separators();
    return pos_ >= d_.size();
  }

  bool at_number() {
    skip_separators();
    if (pos_ >= d_.size()) return false;
    const char c = d_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }

  char command() {
    skip_separators();
    return d_[pos_++];
  }

  double number() {
    skip_separators();
    const size_t start = pos_;
    size_t i = pos_;
    if (i < d_.size() && (d_[i] == '-' || d_[i] == '+')) ++i;
    bool digits = false;
    while (i < d_.size() && std::isdigit(static_cast<unsigned char>(d_[i]))) ++i, digits = true;
    if (i < d_.size() && d_[i] == '.') {
      ++i;
      while (i < d_.size() && std::isdigit(static_cast<unsigned char>(d_[i]))) ++i, digits = true;
    }
    if (!digits) throw ParseError("malformed number in path data at offset " + std::to_string(start));
    if (i < d_.size() && (d_[i] == 'e' || d_[i] == 'E')) {
      size_t j = i + 1;
      if (j < d_.size() && (d_[j] == '-' || d_[j] == '+')) ++j;
      if (j < d_.size() && std::isdigit(static_cast<unsigned char>(d_[j]))) {
        while (j < d_.size() && std::isdigit(static_cast<unsigned char>(d_[j]))) ++j;
        i = j;
      }
    }
    std::string_view tok = d_.substr(start, i - start);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw ParseError("malformed number in path data at offset " + std::to_string(start));
    }
    pos_ = i;
    return v;
  }

  Point point() {
    const double x = number();
    const double y = number();
    return {x, y};
  }

 private:
  std::string_view d_;
  size_t pos_ = 0;
};

}  // namespace

BezierPath parse_path_data(std::string_view d) {
  PathScanner sc(d);
  BezierPath path;
  Point cur{0.0, 0.0};
  Point last_ctrl;
  bool has_ctrl = false;
  char cmd = 0;
  bool first = true;
  while (!sc.at_end()) {
    if (!sc.at_number()) {
      cmd = sc.command();
    } else if (cmd == 0) {
      throw ParseError("path data must start with a command");
    }
    const bool rel = std::islower(static_cast<unsigned char>(cmd)) != 0;
    const Point base = rel ? cur : Point{0.0, 0.0};
    auto offset = [&](Point p) { return Point{p.x + base.x, p.y + base.y}; };
    switch (cmd) {
      case 'M':
      case 'm': {
        // A leading relative moveto is absolute.
        Point p = sc.point();
        cur = (cmd == 'm' && !first) ? Point{cur.x + p.x, cur.y + p.y} : p;
        has_ctrl = false;
        break;
      }
      case 'C':
      case 'c': {
        const Point c1 = offset(sc.point());
        const Point c2 = offset(sc.point());
        const Point end = offset(sc.point());
        path.push_back({cur, c1, c2, end});
        last_ctrl = c2;
        has_ctrl = true;
        cur = end;
        break;
      }
      case 'S':
      case 's': {
        const Point c1 = has_ctrl ? Point{2.0 * cur.x - last_ctrl.x, 2.0 * cur.y - last_ctrl.y} : cur;
        const Point c2 = offset(sc.point());
        const Point end = offset(sc.point());
        path.push_back({cur, c1, c2, end});
        last_ctrl = c2;
        has_ctrl = true;
        cur = end;
        break;
      }
      default:
        throw ParseError(std::string("unsupported path command '") + cmd + "'");
    }
    if (first && cmd != 'M' && cmd != 'm') throw ParseError("path data must start with a moveto");
    first = false;
  }
  if (path.empty()) throw ParseError("path without curve segments");
  return path;
}

// ---------------------------------------------------------------------------
// XML

namespace {

std::optional<std::string> attribute(const pt::ptree& node, const std::string& name) {
  const auto attrs = node.get_child_optional("<xmlattr>");
  if (!attrs) return std::nullopt;
  const auto v = attrs->get_optional<std::string>(name);
  if (!v) return std::nullopt;
  return *v;
}

std::optional<std::string> nonempty_attribute(const pt::ptree& node, const std::string& name) {
  auto v = attribute(node, name);
  if (v && v->empty()) return std::nullopt;
  return v;
}

void read_group(const pt::ptree& node, RawGroup& group, std::vector<Stroke>& strokes) {
  group.element = nonempty_attribute(node, "kvg:element");
  group.original = nonempty_attribute(node, "kvg:original");
  group.part = nonempty_attribute(node, "kvg:part");
  group.number = nonempty_attribute(node, "kvg:number");
  for (const auto& [name, child] : node) {
    if (name == "g") {
      RawGroup sub;
      read_group(child, sub, strokes);
      group.subgroups.push_back(std::move(sub));
    } else if (name == "path") {
      const auto d = attribute(child, "d");
      if (!d) throw ParseError("path element without d attribute");
      Stroke s;
      s.index = static_cast<int>(strokes.size()) + 1;
      s.type_tag = nonempty_attribute(child, "kvg:type");
      try {
        s.path = parse_path_data(*d);
      } catch (const ParseError& e) {
        throw ParseError("stroke " + std::to_string(s.index) + ": " + e.what());
      }
      group.own_strokes.push_back(s.index);
      strokes.push_back(std::move(s));
    }
  }
}

std::optional<char32_t> codepoint_from_id(const std::string& id) {
  const auto us = id.rfind('_');
  if (us == std::string::npos) return std::nullopt;
  std::string hex = id.substr(us + 1);
  const auto dash = hex.find('-');
  if (dash != std::string::npos) hex.resize(dash);
  unsigned long v = 0;
  const auto res = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
  if (res.ec != std::errc() || res.ptr != hex.data() + hex.size() || hex.empty()) return std::nullopt;
  return static_cast<char32_t>(v);
}

}  // namespace

RawKanjiTree parse_kanjivg(std::string_view svg_text) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(svg_text)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed XML at line " + std::to_string(e.line()) + ": " + e.message());
  }
  const auto svg = doc.get_child_optional("svg");
  if (!svg) throw ParseError("document has no svg root element");

  const pt::ptree* paths_group = nullptr;
  std::optional<char32_t> cp;
  for (const auto& [name, child] : *svg) {
    if (name != "g") continue;
    const auto id = attribute(child, "id");
    if (id && id->rfind("kvg:StrokePaths_", 0) == 0) {
      paths_group = &child;
      cp = codepoint_from_id(*id);
      break;
    }
  }
  if (!paths_group) {
    for (const auto& [name, child] : *svg) {
      if (name == "g") {
        paths_group = &child;
        break;
      }
    }
  }
  if (!paths_group) throw ParseError("no stroke group found");

  RawKanjiTree tree;
  RawGroup outer;
  read_group(*paths_group, outer, tree.strokes);
  if (tree.strokes.empty()) throw ParseError("file contains no strokes");
  // The stroke-path container usually wraps exactly one element group.
  if (outer.own_strokes.empty() && outer.subgroups.size() == 1 && !outer.element) {
    tree.root = std::move(outer.subgroups.front());
  } else {
    tree.root = std::move(outer);
  }
  if (!cp && tree.root.element) cp = utf8_decode_first(*tree.root.element);
  if (!cp) throw ParseError("cannot determine the codepoint of the file");
  tree.codepoint = *cp;
  return tree;
}

// ---------------------------------------------------------------------------
// Decomposition

namespace {

StrokeSet set_union(const StrokeSet& a, const StrokeSet& b) {
  StrokeSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

StrokeSet set_intersection(const StrokeSet& a, const StrokeSet& b) {
  StrokeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

StrokeSet set_difference(const StrokeSet& a, const StrokeSet& b) {
  StrokeSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_subset(const StrokeSet& a, const StrokeSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

std::string describe(const StrokeSet& s) {
  std::string out = "{";
  for (size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k]);
  return out + "}";
}

// Group graph after part re-union. Node ids index into `nodes`.
struct Node {
  std::optional<std::string> label;
  std::vector<int> own;
  std::vector<int> children;
  StrokeSet strokes;
};

class GroupGraph {
 public:
  explicit GroupGraph(const RawGroup& root, std::vector<std::string>* notes) : notes_(notes) {
    root_ = add(root);
    merge_parts();
  }

  int root() const { return root_; }
  const Node& node(int id) const { return nodes_[id]; }

  // Follows single-child wrappers that add no partition of their own.
  int resolve(int id, std::optional<std::string>& label) const {
    label = nodes_[id].label;
    int guard = 0;
    while (nodes_[id].own.empty() && nodes_[id].children.size() == 1) {
      const int child = nodes_[id].children.front();
      if (nodes_[child].strokes != nodes_[id].strokes) break;
      if (!label) label = nodes_[child].label;
      id = child;
      if (++guard > static_cast<int>(nodes_.size())) throw StructuralError("cycle in group structure");
    }
    return id;
  }

 private:
  int add(const RawGroup& g) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    raw_.push_back(&g);
    StrokeSet strokes(g.own_strokes.begin(), g.own_strokes.end());
    std::sort(strokes.begin(), strokes.end());
    std::vector<int> children;
    for (const auto& sub : g.subgroups) {
      const int c = add(sub);
      children.push_back(c);
      strokes = set_union(strokes, nodes_[c].strokes);
    }
    Node& n = nodes_[id];
    n.label = g.element;
    n.own = g.own_strokes;
    n.children = std::move(children);
    n.strokes = std::move(strokes);
    return id;
  }

  void merge_parts() {
    using Key = std::tuple<std::string, std::string, std::string>;
    std::map<Key, std::vector<int>> groups;
    for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) {
      const RawGroup& g = *raw_[id];
      if (!g.part || !g.element) continue;
      groups[{*g.element, g.original.value_or(""), g.number.value_or("")}].push_back(id);
    }
    for (const auto& [key, ids] : groups) {
      std::vector<std::pair<int, int>> numbered;
      bool ok = true;
      for (int id : ids) {
        int part = 0;
        const std::string& s = *raw_[id]->part;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), part);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) ok = false;
        numbered.emplace_back(part, id);
      }
      std::sort(numbered.begin(), numbered.end());
      for (size_t k = 0; ok && k < numbered.size(); ++k) ok = numbered[k].first == static_cast<int>(k) + 1;
      if (!ok || numbered.size() < 2) {
        if (notes_) notes_->push_back("parts of '" + std::get<0>(key) + "' not re-united: numbers are not 1..k");
        continue;
      }
      std::vector<int> parts;
      for (const auto& np : numbered) parts.push_back(np.second);
      if (!merge(std::get<0>(key), parts) && notes_) {
        notes_->push_back("parts of '" + std::get<0>(key) + "' not re-united: interleaved with other parts");
      }
    }
  }

  // Replaces the given part nodes by one united node. Rolls back and returns
  // false if the union would make the group graph cyclic.
  bool merge(const std::string& label, const std::vector<int>& parts) {
    const std::vector<Node> saved = nodes_;
    const int saved_root = root_;
    const int merged = static_cast<int>(nodes_.size());
    Node m;
    m.label = label;
    for (int id : parts) {
      m.own.insert(m.own.end(), nodes_[id].own.begin(), nodes_[id].own.end());
      m.children.insert(m.children.end(), nodes_[id].children.begin(), nodes_[id].children.end());
      m.strokes = set_union(m.strokes, nodes_[id].strokes);
    }
    nodes_.push_back(std::move(m));
    raw_.push_back(nullptr);
    auto is_part = [&](int c) { return std::find(parts.begin(), parts.end(), c) != parts.end(); };
    for (auto& n : nodes_) {
      std::vector<int> children;
      for (int c : n.children) {
        const int r = is_part(c) ? merged : c;
        if (std::find(children.begin(), children.end(), r) == children.end()) children.push_back(r);
      }
      n.children = std::move(children);
    }
    if (is_part(root_)) root_ = merged;
    if (acyclic()) return true;
    nodes_ = saved;
    raw_.pop_back();
    root_ = saved_root;
    return false;
  }

  bool acyclic() const {
    std::vector<int> state(nodes_.size(), 0);
    std::function<bool(int)> visit = [&](int id) {
      if (state[id] == 1) return false;
      if (state[id] == 2) return true;
      state[id] = 1;
      for (int c : nodes_[id].children) {
        if (!visit(c)) return false;
      }
      state[id] = 2;
      return true;
    };
    return visit(root_);
  }

  std::vector<Node> nodes_;
  std::vector<const RawGroup*> raw_;
  int root_ = 0;
  std::vector<std::string>* notes_;
};

struct Item {
  StrokeSet strokes;
  std::optional<std::string> label;
  int node = -1;  // -1 for fragments that cannot be refined further
};

std::vector<Item> expand(const GroupGraph& graph, const Item& item) {
  if (item.node < 0) return {item};
  std::optional<std::string> ignored;
  const int id = graph.resolve(item.node, ignored);
  const Node& n = graph.node(id);
  if (n.children.empty()) return {{item.strokes, item.label, -1}};
  std::vector<Item> out;
  StrokeSet covered;
  for (int c : n.children) {
    StrokeSet s = set_intersection(graph.node(c).strokes, item.strokes);
    if (s.empty()) continue;
    covered = set_union(covered, s);
    if (s == graph.node(c).strokes) {
      std::optional<std::string> label;
      const int rc = graph.resolve(c, label);
      out.push_back({std::move(s), label, rc});
    } else {
      out.push_back({std::move(s), std::nullopt, -1});
    }
  }
  StrokeSet rest = set_difference(item.strokes, covered);
  if (!rest.empty()) out.push_back({std::move(rest), std::nullopt, -1});
  return out;
}

void tidy_level(std::vector<Item>& items, int level, std::vector<std::string>* notes) {
  // Identical stroke sets: keep one, preferring a label and a refinable node.
  std::vector<Item> unique;
  for (auto& it : items) {
    auto same = std::find_if(unique.begin(), unique.end(), [&](const Item& u) { return u.strokes == it.strokes; });
    if (same == unique.end()) {
      unique.push_back(std::move(it));
      continue;
    }
    if (!same->label && it.label) same->label = it.label;
    if (same->node < 0 && it.node >= 0) same->node = it.node;
  }
  std::vector<bool> contained(unique.size(), false);
  for (size_t i = 0; i < unique.size(); ++i) {
    for (size_t j = 0; j < unique.size() && !contained[i]; ++j) {
      contained[i] = i != j && is_subset(unique[i].strokes, unique[j].strokes);
    }
  }
  std::vector<Item> kept;
  for (size_t i = 0; i < unique.size(); ++i) {
    if (contained[i]) {
      if (notes) {
        notes->push_back("level " + std::to_string(level) + ": dropped " + describe(unique[i].strokes) +
                         " contained in another component");
      }
      continue;
    }
    kept.push_back(std::move(unique[i]));
  }
  std::sort(kept.begin(), kept.end(), [](const Item& a, const Item& b) { return a.strokes < b.strokes; });
  items = std::move(kept);
}

StrokeSet all_strokes(int n) {
  StrokeSet s(n);
  for (int k = 0; k < n; ++k) s[k] = k + 1;
  return s;
}

}  // namespace

KanjiDecomposition build_decomposition(const RawKanjiTree& tree, int max_level, std::vector<std::string>* notes) {
  if (max_level < 1) throw std::invalid_argument("max_level must be at least 1");
  const int n = static_cast<int>(tree.strokes.size());
  if (n == 0) throw StructuralError("kanji without strokes");
  const GroupGraph graph(tree.root, notes);
  const StrokeSet all = all_strokes(n);
  if (graph.node(graph.root()).strokes != all) throw StructuralError("root group does not hold every stroke");

  std::optional<std::string> root_label;
  const int root = graph.resolve(graph.root(), root_label);
  if (!root_label) root_label = utf8_encode(tree.codepoint);

  std::vector<std::vector<Item>> levels;
  levels.push_back({{all, root_label, root}});
  for (int l = 1; l <= max_level; ++l) {
    std::vector<Item> next;
    for (const auto& it : levels.back()) {
      auto children = expand(graph, it);
      next.insert(next.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
    }
    tidy_level(next, l, notes);
    levels.push_back(std::move(next));
  }

  // A component without any refinement below it cannot lie on a vein.
  for (int l = max_level - 1; l >= 1; --l) {
    auto& cur = levels[l];
    const auto& below = levels[l + 1];
    std::vector<Item> kept;
    for (auto& it : cur) {
      const bool refined =
          std::any_of(below.begin(), below.end(), [&](const Item& b) { return is_subset(b.strokes, it.strokes); });
      if (refined) {
        kept.push_back(std::move(it));
      } else if (notes) {
        notes->push_back("level " + std::to_string(l) + ": removed " + describe(it.strokes) + " without refinement");
      }
    }
    cur = std::move(kept);
  }

  KanjiDecomposition d;
  d.codepoint = tree.codepoint;
  d.strokes = tree.strokes;
  for (auto& level : levels) {
    std::vector<Component> comps;
    for (auto& it : level) comps.push_back({std::move(it.strokes), std::move(it.label)});
    d.levels.push_back(std::move(comps));
  }
  std::vector<Component> singletons;
  for (int s = 1; s <= n; ++s) singletons.push_back({{s}, std::nullopt});
  d.levels.push_back(std::move(singletons));
  validate_decomposition(d);
  return d;
}

std::vector<std::string> find_structure_violations(const KanjiDecomposition& d) {
  std::vector<std::string> out;
  const int n = d.stroke_count();
  if (n == 0) out.push_back("no strokes");
  if (d.levels.size() < 2) {
    out.push_back("fewer than two levels");
    return out;
  }
  for (int k = 0; k < n; ++k) {
    if (d.strokes[k].index != k + 1) out.push_back("stroke " + std::to_string(k + 1) + " has a wrong index");
    if (d.strokes[k].path.empty()) out.push_back("stroke " + std::to_string(k + 1) + " has an empty path");
  }
  const StrokeSet all = all_strokes(n);
  for (size_t l = 0; l < d.levels.size(); ++l) {
    const auto& level = d.levels[l];
    const std::string at = "level " + std::to_string(l);
    if (level.empty()) {
      out.push_back(at + " is empty");
      continue;
    }
    StrokeSet cover;
    for (size_t i = 0; i < level.size(); ++i) {
      const auto& s = level[i].strokes;
      if (s.empty()) out.push_back(at + " component " + std::to_string(i) + " is empty");
      if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end()) {
        out.push_back(at + " component " + std::to_string(i) + " is not a sorted set");
      }
      if (!s.empty() && (s.front() < 1 || s.back() > n)) {
        out.push_back(at + " component " + std::to_string(i) + " refers to a missing stroke");
      }
      if (level[i].label && level[i].label->empty()) out.push_back(at + " component has an empty label");
      cover = set_union(cover, s);
      for (size_t j = 0; j < level.size(); ++j) {
        if (i != j && is_subset(s, level[j].strokes)) {
          out.push_back(at + ": component " + describe(s) + " is contained in " + describe(level[j].strokes));
        }
      }
      if (l > 0) {
        const auto& up = d.levels[l - 1];
        const bool nested = std::any_of(up.begin(), up.end(), [&](const Component& c) { return is_subset(s, c.strokes); });
        if (!nested) out.push_back(at + ": component " + describe(s) + " has no superset one level up");
      }
    }
    if (cover != all) out.push_back(at + " does not cover every stroke");
  }
  if (d.levels.front().size() != 1 || d.levels.front().front().strokes != all) {
    out.push_back("level 0 is not the single all-strokes component");
  }
  const auto& last = d.levels.back();
  if (static_cast<int>(last.size()) != n) {
    out.push_back("last level is not the singletons");
  } else {
    for (int k = 0; k < n; ++k) {
      if (last[k].strokes != StrokeSet{k + 1}) {
        out.push_back("last level is not the singletons");
        break;
      }
    }
  }
  return out;
}

void validate_decomposition(const KanjiDecomposition& d) {
  const auto violations = find_structure_violations(d);
  if (violations.empty()) return;
  std::string msg = "invalid decomposition of U+" + codepoint_hex(d.codepoint) + ":";
  for (const auto& v : violations) msg += "\n  " + v;
  throw StructuralError(msg);
}

IndexSetAndVeins index_and_veins(const KanjiDecomposition& d) {
  IndexSetAndVeins out;
  const int L = d.max_level();
  for (int l = 1; l <= L; ++l) {
    for (int i = 0; i < static_cast<int>(d.levels[l].size()); ++i) out.essential.push_back({l, i});
  }
  Vein chain;
  std::function<void(int, int)> walk = [&](int l, int i) {
    chain.push_back({l, i});
    if (l == L) {
      out.veins.push_back(chain);
    } else {
      const auto& parent = d.levels[l][i].strokes;
      for (int j = 0; j < static_cast<int>(d.levels[l + 1].size()); ++j) {
        if (is_subset(d.levels[l + 1][j].strokes, parent)) walk(l + 1, j);
      }
    }
    chain.pop_back();
  };
  walk(0, 0);
  return out;
}

ComponentGeometry component_geometry(const KanjiDecomposition& d, const StrokeSet& strokes) {
  std::vector<Stroke> chosen;
  chosen.reserve(strokes.size());
  for (int s : strokes) chosen.push_back(d.strokes.at(s - 1));
  return to_unit_canvas(chosen);
}

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const KanjiDecomposition& d) {
  nlohmann::json strokes = nlohmann::json::array();
  for (const auto& s : d.strokes) {
    nlohmann::json beziers = nlohmann::json::array();
    for (const auto& c : s.path) beziers.push_back({c.p0.x, c.p0.y, c.p1.x, c.p1.y, c.p2.x, c.p2.y, c.p3.x, c.p3.y});
    nlohmann::json js = {{"index", s.index}, {"beziers", std::move(beziers)}};
    js["type"] = s.type_tag ? nlohmann::json(*s.type_tag) : nlohmann::json(nullptr);
    strokes.push_back(std::move(js));
  }
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : d.levels) {
    nlohmann::json jl = nlohmann::json::array();
    for (const auto& c : level) {
      nlohmann::json jc = {{"strokes", c.strokes}};
      if (c.label) jc["label"] = *c.label;
      jl.push_back(std::move(jc));
    }
    levels.push_back(std::move(jl));
  }
  j = nlohmann::json{{"codepoint", static_cast<std::uint32_t>(d.codepoint)}, {"strokes", std::move(strokes)},
                     {"levels", std::move(levels)}};
}

void from_json(const nlohmann::json& j, KanjiDecomposition& d) {
  d = {};
  d.codepoint = static_cast<char32_t>(j.at("codepoint").get<std::uint32_t>());
  for (const auto& js : j.at("strokes")) {
    Stroke s;
    s.index = js.at("index").get<int>();
    if (js.contains("type") && !js["type"].is_null()) s.type_tag = js["type"].get<std::string>();
    for (const auto& b : js.at("beziers")) {
      if (b.size() != 8) throw ParseError("bezier entry must have 8 numbers");
      s.path.push_back({{b[0].get<double>(), b[1].get<double>()},
                        {b[2].get<double>(), b[3].get<double>()},
                        {b[4].get<double>(), b[5].get<double>()},
                        {b[6].get<double>(), b[7].get<double>()}});
    }
    d.strokes.push_back(std::move(s));
  }
  for (const auto& jl : j.at("levels")) {
    std::vector<Component> level;
    for (const auto& jc : jl) {
      Component c;
      c.strokes = jc.at("strokes").get<StrokeSet>();
      if (jc.contains("label")) c.label = jc["label"].get<std::string>();
      level.push_back(std::move(c));
    }
    d.levels.push_back(std::move(level));
  }
}

}  // namespace kanjidist
