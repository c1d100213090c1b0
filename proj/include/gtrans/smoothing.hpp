#pragma once

#include "gtrans/common.hpp"
#include "gtrans/graphon.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace gtrans {

struct SmootherConfig {
  /// h = min(1, quantile_constant * sqrt(log n / n)).
  double quantile_constant = 1.0;
  bool symmetrize = true;
  std::optional<std::pair<double, double>> clamp_range = std::make_pair(0.0, 1.0);

  double quantile_level(Index n) const;
  static SmootherConfig unclamped();
};

/// Row-profile dissimilarity: Delta(i,i')^2 = max_{k != i,i'} |<X_i - X_i', X_k>| / n.
/// Binary and real-valued symmetric inputs use the same formula. Requires n >= 3.
Matrix ns_dissimilarity(const Matrix& x);

struct NeighborhoodStructure {
  Matrix delta;
  double h = 0.0;
  std::vector<std::vector<Index>> neighborhoods;  // N_i, never contains i
};

/// N_i = { i' != i : Delta(i,i') <= nearest-rank h-quantile of row i }. Ties are all admitted.
NeighborhoodStructure ns_neighborhoods(const Matrix& x, double h);

/// Neighborhood-smoothing estimate of a symmetric n x n input (n >= 3).
Matrix ns_estimate(const Matrix& x, const SmootherConfig& cfg = {});
inline Matrix ns_estimate(const AdjMatrix& a, const SmootherConfig& cfg = {}) {
  return ns_estimate(a.matrix(), cfg);
}

/// Universal singular value thresholding: keep singular values above (2 + eta) sqrt(n).
Matrix usvt_estimate(const AdjMatrix& a, double eta = 0.01);

}  // namespace gtrans
