#pragma once

#include "gtrans/common.hpp"
#include "gtrans/graphon.hpp"
#include "gtrans/ot.hpp"
#include "gtrans/smoothing.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gtrans {

/// Which parts of the pipeline run. Full is the method itself; the others are
/// the ablations: no debiasing step, no smoothing of the initial or
/// transferred estimates, and raw adjacencies as the initial estimates.
enum class Variant { Full, NonDebias, NonSmooth, Adj };

const char* to_string(Variant v);

struct TransferConfig {
  GwSolverOptions solver;
  double delta = 0.15;  // debias when d > delta
  SmootherConfig smoother;
  bool clamp_final = true;
  Variant variant = Variant::Full;

  /// Defaults: exact GW with delta 0.15, entropic GW (eps 0.01) with delta 0.18.
  static TransferConfig exact_gw();
  static TransferConfig entropic_gw(double epsilon = 0.01);
};

struct TransferResult {
  Matrix p_s_ini;
  Matrix p_t_ini;
  Coupling pi;
  Matrix pi_tilde;
  double d = 0.0;
  Matrix p_trans;
  Matrix p_trans2;
  bool debiased = false;
  std::optional<Matrix> residual;
  std::optional<Matrix> p_res;
  Matrix p_final;
  std::vector<std::string> warnings;
};

/// pi_tilde^T P_s pi_tilde.
template <typename DA, typename DP>
Eigen::Matrix<typename DP::Scalar, Eigen::Dynamic, Eigen::Dynamic> project_source(
    const Eigen::MatrixBase<DA>& pi_tilde, const Eigen::MatrixBase<DP>& p_s) {
  require(p_s.rows() == p_s.cols() && pi_tilde.rows() == p_s.rows(),
          ErrorKind::DimensionMismatch, "project_source: alignment rows must match source size");
  return pi_tilde.transpose() * p_s * pi_tilde;
}

struct DebiasResult {
  Matrix residual;
  Matrix p_res;
  Matrix p_final;
};

/// residual = p_t_ini - p_trans2; p_res = unclamped smoothing of the residual;
/// p_final = p_trans2 + p_res, clamped to [0, 1] when clamp_final.
DebiasResult debias(const Matrix& p_t_ini, const Matrix& p_trans2, const SmootherConfig& smoother,
                    bool clamp_final = true);

/// Steps 2-3 from precomputed initial estimates (both symmetric, n >= 3).
TransferResult transfer_from_initial(Matrix p_s_ini, Matrix p_t_ini, const TransferConfig& cfg);

/// Full pipeline on a source adjacency and a symmetric target matrix. The
/// target may be real-valued (e.g. a completed adjacency during cross-validation).
TransferResult gtrans(const Matrix& source, const Matrix& target, const TransferConfig& cfg);

inline TransferResult gtrans(const AdjMatrix& a_s, const AdjMatrix& a_t,
                             const TransferConfig& cfg) {
  return gtrans(a_s.matrix(), a_t.matrix(), cfg);
}

}  // namespace gtrans
