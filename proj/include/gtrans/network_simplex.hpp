#pragma once

#include "gtrans/common.hpp"

#include <cstdint>
#include <vector>

namespace gtrans {

/// Primal network simplex for the balanced transportation problem
///
///   min <cost, pi>  s.t.  pi 1 = mu,  pi^T 1 = nu,  pi >= 0.
///
/// The basis is a strongly feasible spanning tree rooted at an artificial
/// node (one artificial arc per supply/demand node), which rules out
/// cycling under degeneracy. Entering arcs are chosen by block search in a
/// fixed scan order; ties keep the first candidate found.
///
/// The basis survives between calls to solve(): the feasible set depends only
/// on the marginals, so a new cost vector warm-starts from the previous
/// optimum. This is what makes repeated linearizations inside Frank-Wolfe cheap.
class TransportSimplex {
 public:
  TransportSimplex(const Vector& mu, const Vector& nu);

  /// Optimal plan for `cost` (rows x cols must match mu x nu).
  Matrix solve(const Matrix& cost);

  /// Pivot count of the most recent solve().
  std::int64_t last_pivots() const noexcept { return last_pivots_; }

 private:
  enum : std::int8_t { kTree = 0, kLower = 1 };
  enum : std::int8_t { kUp = 1, kDown = -1 };

  int arc(int i, int j) const { return i * cols_ + j; }
  void rebuild_tree();
  bool find_entering_arc(double tolerance);
  int find_join(int u, int v) const;
  void pivot(int in_arc, int join);
  void detach(int node, int arc_id);

  int rows_;
  int cols_;
  int node_count_;  // rows + cols + root
  int root_;
  int real_arcs_;
  int block_size_;
  int next_arc_ = 0;
  int in_arc_ = -1;
  std::int64_t last_pivots_ = 0;

  std::vector<int> source_;
  std::vector<int> target_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<std::int8_t> state_;

  std::vector<int> parent_;
  std::vector<int> pred_;
  std::vector<std::int8_t> pred_dir_;
  std::vector<int> depth_;
  std::vector<double> potential_;
  std::vector<std::vector<int>> tree_arcs_;  // incident basic arcs per node
  std::vector<int> dfs_stack_;
};

}  // namespace gtrans
