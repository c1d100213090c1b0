#pragma once

#include "gtrans/common.hpp"
#include "gtrans/graphon.hpp"
#include "gtrans/rng.hpp"
#include "gtrans/transfer.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace gtrans {

/// ||P - P_hat||_F^2 / n^2, diagonal included.
template <typename DA, typename DB>
double mse(const Eigen::MatrixBase<DA>& p_hat, const Eigen::MatrixBase<DB>& p) {
  require_same_shape(p_hat, p, "mse");
  require(p.rows() == p.cols() && p.rows() > 0, ErrorKind::DimensionMismatch,
          "mse expects nonempty square matrices");
  const double n = static_cast<double>(p.rows());
  return (p - p_hat).squaredNorm() / (n * n);
}

/// Observation mask: 1 = observed, 0 = held out. Symmetric with unit diagonal.
struct MaskMatrix {
  Matrix m;
  double p = 0.0;  // nominal held-out ratio

  Index size() const noexcept { return m.rows(); }
  bool held_out(Index i, Index j) const { return m(i, j) == 0.0; }
  Index held_out_pairs() const;  // over i < j
  Index observed_pairs() const;
};

struct MaskedGraph {
  AdjMatrix masked;
  MaskMatrix mask;
};

/// M_ij ~ Ber(1 - p) for i < j, mirrored; the observed graph is M o A.
MaskedGraph mask_edges(const AdjMatrix& a, double p, Rng& rng);

/// Mask that holds out exactly the listed (i, j) pairs.
MaskMatrix mask_from_pairs(Index n, const std::vector<std::pair<Index, Index>>& held_out);

/// Area under the ROC curve on held-out upper-triangle entries, by the
/// rank statistic (ties count one half). Throws ErrorKind::UndefinedAuc when
/// the held-out set lacks a positive or a negative.
double link_auc(const Matrix& p_hat, const AdjMatrix& a_true, const MaskMatrix& mask);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

/// ROC points for predicting "edge" when p_hat > t, for t running over the
/// distinct held-out scores (descending) and finally below the minimum.
std::vector<RocPoint> roc_curve(const Matrix& p_hat, const AdjMatrix& a_true,
                                const MaskMatrix& mask);
double trapezoid_auc(const std::vector<RocPoint>& roc);

/// Low-rank completion: observed entries rescaled by the inverse observed
/// fraction, truncated eigendecomposition, clamp to [0, 1]. An empty rank
/// selects the largest spectral gap among the top ten eigenvalue magnitudes.
Matrix matrix_complete(const Matrix& a_masked, const MaskMatrix& mask,
                       std::optional<Index> rank = std::nullopt);

struct CvConfig {
  std::vector<double> candidates = default_candidates();
  int folds = 5;
  std::optional<Index> completion_rank;  // empty = auto

  static std::vector<double> default_candidates();  // 0.10, 0.11, ..., 0.50
};

struct CvResult {
  double delta_hat = 0.0;
  std::vector<double> candidates;
  std::vector<double> mean_loss;                // per candidate, over successful folds
  std::vector<std::vector<double>> fold_loss;   // [fold][candidate]; empty row = failed fold
  std::vector<double> fold_distance;            // d per fold (NaN when failed)
  int folds_used = 0;
};

/// Edge-sampling cross-validation of the debiasing threshold. Index pairs of
/// the target's upper triangle are split into K folds; each fold is held out,
/// the remainder completed, the pipeline run, and squared error scored on the
/// held-out entries. Ties go to the smallest candidate.
CvResult cv_select_delta(const AdjMatrix& a_s, const AdjMatrix& a_t, const CvConfig& cv,
                         const TransferConfig& base, Rng& rng);

}  // namespace gtrans
