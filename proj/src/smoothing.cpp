#include "gtrans/smoothing.hpp"

#include <algorithm>
#include <cmath>

namespace gtrans {

double SmootherConfig::quantile_level(Index n) const {
  require(quantile_constant > 0.0, ErrorKind::InvalidArgument,
          "smoother quantile constant must be positive");
  const double nn = static_cast<double>(n);
  const double h = quantile_constant * std::sqrt(std::log(nn) / nn);
  return std::clamp(h, 1e-12, 1.0);
}

SmootherConfig SmootherConfig::unclamped() {
  SmootherConfig cfg;
  cfg.clamp_range.reset();
  return cfg;
}

namespace {

void require_smoothable(const Matrix& x) {
  require(x.rows() == x.cols(), ErrorKind::DimensionMismatch, "smoothing input must be square");
  require(x.rows() >= 3, ErrorKind::TooFewNodes,
          "neighborhood smoothing needs at least 3 nodes, got " + std::to_string(x.rows()));
}

// max_k |a_k - b_k| over k outside {skip1, skip2}
double max_abs_diff_excluding(const double* a, const double* b, Index n, Index skip1,
                              Index skip2) {
  const Index lo = std::min(skip1, skip2);
  const Index hi = std::max(skip1, skip2);
  double m = 0.0;
  for (Index k = 0; k < lo; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  for (Index k = lo + 1; k < hi; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  for (Index k = hi + 1; k < n; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

Matrix ns_dissimilarity(const Matrix& x) {
  require_smoothable(x);
  const Index n = x.rows();

  // Gram matrix of rows, exactly symmetric.
  Matrix gram = Matrix::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
  gram = gram.selfadjointView<Eigen::Lower>();

  Matrix delta = Matrix::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Index i = 0; i < n; ++i) {
    const double* gi = gram.col(i).data();
    for (Index j = i + 1; j < n; ++j) {
      const double m = max_abs_diff_excluding(gi, gram.col(j).data(), n, i, j);
      delta(j, i) = std::sqrt(m / static_cast<double>(n));
    }
  }
  delta.triangularView<Eigen::StrictlyUpper>() = delta.transpose();
  return delta;
}

NeighborhoodStructure ns_neighborhoods(const Matrix& x, double h) {
  require(h > 0.0 && h <= 1.0, ErrorKind::InvalidArgument, "quantile level must lie in (0, 1]");
  NeighborhoodStructure out;
  out.delta = ns_dissimilarity(x);
  out.h = h;
  const Index n = x.rows();
  const Index others = n - 1;
  const Index rank = std::clamp<Index>(static_cast<Index>(std::ceil(h * others)), 1, others);

  out.neighborhoods.resize(n);
  std::vector<double> row(others);
  for (Index i = 0; i < n; ++i) {
    Index c = 0;
    for (Index j = 0; j < n; ++j) {
      if (j != i) row[c++] = out.delta(i, j);
    }
    std::nth_element(row.begin(), row.begin() + (rank - 1), row.end());
    const double threshold = row[rank - 1];
    auto& nb = out.neighborhoods[i];
    for (Index j = 0; j < n; ++j) {
      if (j != i && out.delta(i, j) <= threshold) nb.push_back(j);
    }
  }
  return out;
}

Matrix ns_estimate(const Matrix& x, const SmootherConfig& cfg) {
  require_smoothable(x);
  const Index n = x.rows();
  const NeighborhoodStructure nbs = ns_neighborhoods(x, cfg.quantile_level(n));

  // Row-stochastic neighborhood averaging operator.
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& nb = nbs.neighborhoods[i];
    const double weight = 1.0 / static_cast<double>(nb.size());
    for (Index k : nb) w(i, k) = weight;
  }

  const Matrix y = w * x;
  Matrix p;
  if (cfg.symmetrize) {
    p = 0.5 * (y + y.transpose());
  } else {
    p = 0.5 * (y + x * w.transpose());
  }
  if (cfg.clamp_range) clamp_inplace(p, cfg.clamp_range->first, cfg.clamp_range->second);
  return p;
}

Matrix usvt_estimate(const AdjMatrix& a, double eta) {
  require(eta >= 0.0, ErrorKind::InvalidArgument, "usvt eta must be nonnegative");
  const Index n = a.size();
  if (n == 0) return Matrix(0, 0);

  // Symmetric input: singular values are |eigenvalues|.
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(a.matrix());
  const double threshold = (2.0 + eta) * std::sqrt(static_cast<double>(n));
  Matrix p = Matrix::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    const double lambda = eig.eigenvalues()(k);
    if (std::abs(lambda) > threshold) {
      const Vector& v = eig.eigenvectors().col(k);
      p.noalias() += lambda * v * v.transpose();
    }
  }
  p = 0.5 * (p + p.transpose());
  clamp_inplace(p, 0.0, 1.0);
  return p;
}

}  // namespace gtrans
