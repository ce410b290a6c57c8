#include "kanjidist/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace kanjidist {

int NetworkSimplex::add_node(std::int64_t supply) {
  supply_.push_back(supply);
  return static_cast<int>(supply_.size()) - 1;
}

int NetworkSimplex::add_arc(int from, int to, std::int64_t cost) {
  if (from < 0 || to < 0 || from >= node_count() || to >= node_count()) {
    throw std::out_of_range("NetworkSimplex: arc endpoint out of range");
  }
  if (cost < 0) throw std::invalid_argument("NetworkSimplex: negative arc cost");
  src_.push_back(from);
  dst_.push_back(to);
  cost_.push_back(cost);
  return static_cast<int>(src_.size()) - 1;
}

void NetworkSimplex::rebuild_tree_data() {
  const int total = static_cast<int>(parent_.size());
  const int root = total - 1;
  std::vector<int> head(total, -1), next(total, -1);
  for (int v = 0; v < root; ++v) {
    next[v] = head[parent_[v]];
    head[parent_[v]] = v;
  }
  std::vector<int> stack{root};
  depth_[root] = 0;
  potential_[root] = 0;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = head[u]; v >= 0; v = next[v]) {
      const int a = pred_[v];
      depth_[v] = depth_[u] + 1;
      // Tree arcs have zero reduced cost: cost + pi(src) - pi(dst) = 0.
      potential_[v] = src_[a] == v ? potential_[u] - cost_[a] : potential_[u] + cost_[a];
      stack.push_back(v);
    }
  }
}

bool NetworkSimplex::solve() {
  const int n = node_count();
  const int m_real = arc_count();
  if (std::accumulate(supply_.begin(), supply_.end(), std::int64_t{0}) != 0) {
    throw std::invalid_argument("NetworkSimplex: supplies do not balance");
  }
  std::int64_t max_cost = 1;
  for (auto c : cost_) max_cost = std::max(max_cost, c);
  const std::int64_t big = max_cost * (n + 1) + 1;

  // Artificial root with one arc per node.
  const int root = n;
  flow_.assign(m_real, 0);
  parent_.assign(n + 1, root);
  pred_.assign(n + 1, -1);
  depth_.assign(n + 1, 0);
  potential_.assign(n + 1, 0);
  for (int v = 0; v < n; ++v) {
    int a;
    if (supply_[v] >= 0) {
      src_.push_back(v);
      dst_.push_back(root);
      flow_.push_back(supply_[v]);
    } else {
      src_.push_back(root);
      dst_.push_back(v);
      flow_.push_back(-supply_[v]);
    }
    cost_.push_back(big);
    a = static_cast<int>(src_.size()) - 1;
    pred_[v] = a;
  }
  parent_[root] = -1;
  rebuild_tree_data();

  const int m = static_cast<int>(src_.size());
  const int block = std::max(16, static_cast<int>(std::sqrt(static_cast<double>(m))));
  int next_arc = 0;
  std::vector<int> up_u, up_v;

  for (;;) {
    // Block pricing: most negative reduced cost within the first block that
    // contains an eligible arc.
    int entering = -1;
    std::int64_t best = 0;
    int scanned = 0;
    while (scanned < m) {
      const int end = std::min(block, m - scanned);
      for (int k = 0; k < end; ++k) {
        const int a = next_arc;
        next_arc = next_arc + 1 == m ? 0 : next_arc + 1;
        const std::int64_t rc = cost_[a] + potential_[src_[a]] - potential_[dst_[a]];
        if (rc < best) {
          best = rc;
          entering = a;
        }
      }
      scanned += end;
      if (entering >= 0) break;
    }
    if (entering < 0) break;
    ++pivots_;

    const int u = src_[entering];
    const int v = dst_[entering];
    // Cycle orientation: u -> v, then v up to the join, then join down to u.
    up_u.clear();
    up_v.clear();
    int x = u, y = v;
    while (x != y) {
      if (depth_[x] >= depth_[y]) {
        up_u.push_back(x);
        x = parent_[x];
      } else {
        up_v.push_back(y);
        y = parent_[y];
      }
    }
    // Opposite arcs lose flow; keep the last blocking one in cycle order.
    std::int64_t delta = std::numeric_limits<std::int64_t>::max();
    int leave_node = -1;
    bool leave_on_u_side = false;
    for (auto it = up_u.rbegin(); it != up_u.rend(); ++it) {
      const int w = *it;  // traversed parent(w) -> w
      const int a = pred_[w];
      if (src_[a] == w && flow_[a] <= delta) {
        delta = flow_[a];
        leave_node = w;
        leave_on_u_side = true;
      }
    }
    for (const int w : up_v) {  // traversed w -> parent(w)
      const int a = pred_[w];
      if (dst_[a] == w && flow_[a] <= delta) {
        delta = flow_[a];
        leave_node = w;
        leave_on_u_side = false;
      }
    }
    if (leave_node < 0) throw std::runtime_error("NetworkSimplex: unbounded cycle");

    if (delta > 0) {
      flow_[entering] += delta;
      for (const int w : up_u) {
        const int a = pred_[w];
        flow_[a] += src_[a] == w ? -delta : delta;
      }
      for (const int w : up_v) {
        const int a = pred_[w];
        flow_[a] += src_[a] == w ? delta : -delta;
      }
    }

    // Re-hang the detached subtree from the entering arc.
    const int inner = leave_on_u_side ? u : v;
    const int outer = leave_on_u_side ? v : u;
    int child = inner;
    int new_parent = outer;
    int new_pred = entering;
    for (;;) {
      const int old_parent = parent_[child];
      const int old_pred = pred_[child];
      parent_[child] = new_parent;
      pred_[child] = new_pred;
      if (child == leave_node) break;
      new_parent = child;
      new_pred = old_pred;
      child = old_parent;
    }
    rebuild_tree_data();
  }

  bool feasible = true;
  for (int a = m_real; a < m; ++a) {
    if (flow_[a] != 0) feasible = false;
  }
  src_.resize(m_real);
  dst_.resize(m_real);
  cost_.resize(m_real);
  flow_.resize(m_real);
  return feasible;
}

}  // namespace kanjidist
