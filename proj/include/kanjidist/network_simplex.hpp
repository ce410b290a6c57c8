#pragma once

#include <cstdint>
#include <vector>

namespace kanjidist {

/// Primal network simplex for uncapacitated min-cost flow with integer
/// supplies and costs. Node supplies must sum to zero; a negative supply is a
/// demand. Arc costs must be nonnegative.
class NetworkSimplex {
 public:
  int add_node(std::int64_t supply);
  int add_arc(int from, int to, std::int64_t cost);

  /// Returns false if the supplies cannot be routed.
  bool solve();

  std::int64_t flow(int arc) const { return flow_[arc]; }
  int node_count() const { return static_cast<int>(supply_.size()); }
  int arc_count() const { return static_cast<int>(src_.size()); }
  std::int64_t pivots() const { return pivots_; }

 private:
  void rebuild_tree_data();

  std::vector<std::int64_t> supply_;
  std::vector<int> src_, dst_;
  std::vector<std::int64_t> cost_, flow_;

  // Spanning tree: parent node and the arc joining each node to its parent.
  std::vector<int> parent_, pred_, depth_;
  std::vector<std::int64_t> potential_;
  std::int64_t pivots_ = 0;
};

}  // namespace kanjidist
