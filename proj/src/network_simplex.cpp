#include "gtrans/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gtrans {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TransportSimplex::TransportSimplex(const Vector& mu, const Vector& nu)
    : rows_(static_cast<int>(mu.size())), cols_(static_cast<int>(nu.size())) {
  require(rows_ > 0 && cols_ > 0, ErrorKind::EmptyInput, "transport marginals must be nonempty");
  require((mu.array() >= 0.0).all() && (nu.array() >= 0.0).all(), ErrorKind::Infeasible,
          "transport marginals must be nonnegative");
  const double total = mu.sum();
  require(std::abs(total - nu.sum()) <= 1e-12 * std::max(1.0, total), ErrorKind::Infeasible,
          "transport marginals have different total mass");

  node_count_ = rows_ + cols_ + 1;
  root_ = rows_ + cols_;
  real_arcs_ = rows_ * cols_;
  const int all_arcs = real_arcs_ + rows_ + cols_;
  block_size_ = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(real_arcs_))));

  source_.resize(all_arcs);
  target_.resize(all_arcs);
  cost_.assign(all_arcs, 0.0);
  flow_.assign(all_arcs, 0.0);
  state_.assign(all_arcs, kLower);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      source_[arc(i, j)] = i;
      target_[arc(i, j)] = rows_ + j;
    }
  }

  parent_.assign(node_count_, -1);
  pred_.assign(node_count_, -1);
  pred_dir_.assign(node_count_, kUp);
  depth_.assign(node_count_, 0);
  potential_.assign(node_count_, 0.0);
  tree_arcs_.assign(node_count_, {});

  // Initial basis: every node hangs off the root. Supply nodes push their mass
  // up to the root, demand nodes receive theirs from it.
  for (int u = 0; u < rows_ + cols_; ++u) {
    const int e = real_arcs_ + u;
    state_[e] = kTree;
    if (u < rows_) {
      source_[e] = u;
      target_[e] = root_;
      flow_[e] = mu(u);
    } else {
      source_[e] = root_;
      target_[e] = u;
      flow_[e] = nu(u - rows_);
    }
    tree_arcs_[u].push_back(e);
    tree_arcs_[root_].push_back(e);
  }
}

void TransportSimplex::rebuild_tree() {
  // Parent pointers, depths and potentials (reduced cost 0 on basic arcs).
  parent_[root_] = -1;
  pred_[root_] = -1;
  depth_[root_] = 0;
  potential_[root_] = 0.0;
  dfs_stack_.clear();
  dfs_stack_.push_back(root_);
  while (!dfs_stack_.empty()) {
    const int u = dfs_stack_.back();
    dfs_stack_.pop_back();
    for (int e : tree_arcs_[u]) {
      if (e == pred_[u]) continue;
      const int v = source_[e] == u ? target_[e] : source_[e];
      parent_[v] = u;
      pred_[v] = e;
      pred_dir_[v] = source_[e] == v ? kUp : kDown;
      depth_[v] = depth_[u] + 1;
      potential_[v] = potential_[u] - pred_dir_[v] * cost_[e];
      dfs_stack_.push_back(v);
    }
  }
}

bool TransportSimplex::find_entering_arc(double tolerance) {
  double best = -tolerance;
  int count = block_size_;
  int e = next_arc_;
  for (int scanned = 0; scanned < real_arcs_; ++scanned) {
    if (state_[e] == kLower) {
      const double rc = cost_[e] + potential_[source_[e]] - potential_[target_[e]];
      if (rc < best) {
        best = rc;
        in_arc_ = e;
      }
    }
    if (++e == real_arcs_) e = 0;
    if (--count == 0) {
      if (best < -tolerance) {
        next_arc_ = e;
        return true;
      }
      count = block_size_;
    }
  }
  if (best < -tolerance) {
    next_arc_ = e;
    return true;
  }
  return false;
}

int TransportSimplex::find_join(int u, int v) const {
  while (depth_[u] > depth_[v]) u = parent_[u];
  while (depth_[v] > depth_[u]) v = parent_[v];
  while (u != v) {
    u = parent_[u];
    v = parent_[v];
  }
  return u;
}

void TransportSimplex::detach(int node, int arc_id) {
  auto& arcs = tree_arcs_[node];
  auto it = std::find(arcs.begin(), arcs.end(), arc_id);
  *it = arcs.back();
  arcs.pop_back();
}

void TransportSimplex::pivot(int in_arc, int join) {
  const int first = source_[in_arc];
  const int second = target_[in_arc];

  // Leaving arc: strict on the first side, non-strict on the second, so the
  // last blocking arc in cycle orientation leaves and the tree stays
  // strongly feasible.
  double delta = kInf;
  int u_out = -1;
  for (int u = first; u != join; u = parent_[u]) {
    const double d = pred_dir_[u] == kUp ? flow_[pred_[u]] : kInf;
    if (d < delta) {
      delta = d;
      u_out = u;
    }
  }
  for (int u = second; u != join; u = parent_[u]) {
    const double d = pred_dir_[u] == kDown ? flow_[pred_[u]] : kInf;
    if (d <= delta) {
      delta = d;
      u_out = u;
    }
  }
  if (u_out < 0) {
    throw Error(ErrorKind::Infeasible, "transportation problem is unbounded");
  }

  if (delta > 0.0) {
    flow_[in_arc] += delta;
    for (int u = first; u != join; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * delta;
    for (int u = second; u != join; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * delta;
  }

  const int out_arc = pred_[u_out];
  flow_[out_arc] = 0.0;
  state_[out_arc] = kLower;
  detach(source_[out_arc], out_arc);
  detach(target_[out_arc], out_arc);

  state_[in_arc] = kTree;
  tree_arcs_[first].push_back(in_arc);
  tree_arcs_[second].push_back(in_arc);
  rebuild_tree();
}

Matrix TransportSimplex::solve(const Matrix& cost) {
  require(cost.rows() == rows_ && cost.cols() == cols_, ErrorKind::DimensionMismatch,
          "transport cost does not match marginals");
  require(cost.allFinite(), ErrorKind::InvalidArgument, "transport cost must be finite");

  const double max_cost = cost.cwiseAbs().maxCoeff();
  const double art_cost = (max_cost + 1.0) * static_cast<double>(node_count_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) cost_[arc(i, j)] = cost(i, j);
  }
  for (int u = 0; u < rows_ + cols_; ++u) cost_[real_arcs_ + u] = u < rows_ ? 0.0 : art_cost;

  const double tolerance =
      64.0 * std::numeric_limits<double>::epsilon() * art_cost;
  rebuild_tree();
  last_pivots_ = 0;
  while (find_entering_arc(tolerance)) {
    pivot(in_arc_, find_join(source_[in_arc_], target_[in_arc_]));
    ++last_pivots_;
  }

  double artificial = 0.0;
  for (int u = 0; u < rows_ + cols_; ++u) artificial += flow_[real_arcs_ + u];
  require(artificial <= 1e-12, ErrorKind::Infeasible,
          "transportation problem left mass on artificial arcs");

  Matrix plan(rows_, cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) plan(i, j) = flow_[arc(i, j)];
  }
  return plan;
}

}  // namespace gtrans
