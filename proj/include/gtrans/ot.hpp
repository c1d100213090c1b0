#pragma once

#include "gtrans/common.hpp"

#include <optional>
#include <vector>

namespace gtrans {

struct Marginals {
  Vector mu;
  Vector nu;

  static Marginals uniform(Index source_size, Index target_size);
  /// Nonnegative, each summing to 1 within 1e-12; throws ErrorKind::Infeasible.
  void validate() const;
};

struct Coupling {
  Matrix plan;
  double objective = 0.0;            // squared-loss GW value at plan
  double entropic_objective = 0.0;   // objective + eps * KL(plan | mu x nu); equals objective for exact GW
  bool converged = false;
  int iterations = 0;
  std::vector<double> history;       // objective after each accepted outer iteration
};

struct GwSolverOptions {
  enum class Kind { ExactGw, EntropicGw };

  Kind kind = Kind::ExactGw;
  double epsilon = 0.01;
  int max_outer = 200;
  int max_sinkhorn = 10000;
  double tol_objective = 1e-8;
  double tol_sinkhorn = 1e-9;
  std::optional<Matrix> init;  // product measure when empty

  static GwSolverOptions exact() { return {}; }
  static GwSolverOptions entropic(double epsilon) {
    GwSolverOptions o;
    o.kind = Kind::EntropicGw;
    o.epsilon = epsilon;
    return o;
  }
};

/// G_ij = sum_{k,l} (C_ik - D_jl)^2 pi_kl, through the factorization
/// (C.C) r 1^T + 1 c^T (D.D)^T - 2 C pi D^T with r, c the marginals of pi.
/// The gradient of the GW objective is 2 G for symmetric C, D.
template <typename DC, typename DD, typename DP>
Eigen::Matrix<typename DP::Scalar, Eigen::Dynamic, Eigen::Dynamic> gw_gradient(
    const Eigen::MatrixBase<DC>& c, const Eigen::MatrixBase<DD>& d,
    const Eigen::MatrixBase<DP>& pi) {
  using Scalar = typename DP::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  require(c.rows() == c.cols() && d.rows() == d.cols(), ErrorKind::DimensionMismatch,
          "gw_gradient: C and D must be square");
  require(pi.rows() == c.rows() && pi.cols() == d.rows(), ErrorKind::DimensionMismatch,
          "gw_gradient: coupling shape does not match C and D");
  const Vec r = pi.rowwise().sum();
  const Vec col = pi.colwise().sum().transpose();
  const Vec cr = c.cwiseAbs2() * r;
  const Vec dc = d.cwiseAbs2() * col;
  Mat g = -2 * (c * pi * d.transpose());
  g.colwise() += cr;
  g.rowwise() += dc.transpose();
  return g;
}

template <typename DC, typename DD, typename DP>
typename DP::Scalar gw_objective(const Eigen::MatrixBase<DC>& c, const Eigen::MatrixBase<DD>& d,
                                 const Eigen::MatrixBase<DP>& pi) {
  return gw_gradient(c, d, pi).cwiseProduct(pi).sum();
}

/// Scales every column to sum to one. Throws ErrorKind::DegenerateColumn on a zero column.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> column_normalize(
    const Eigen::MatrixBase<Derived>& pi) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat out = pi;
  for (Index j = 0; j < out.cols(); ++j) {
    const auto s = out.col(j).sum();
    if (!(s > 0)) {
      throw Error(ErrorKind::DegenerateColumn,
                  "coupling column " + std::to_string(j) + " has no mass");
    }
    out.col(j) /= s;
  }
  return out;
}

/// KL(pi | mu x nu) with 0 log 0 = 0.
double kl_to_product(const Matrix& pi, const Marginals& m);

/// Exact minimizer of <cost, pi> over couplings of m (network simplex).
Matrix exact_linear_ot(const Matrix& cost, const Marginals& m);

/// Log-domain Sinkhorn for min <cost, pi> + eps KL(pi | mu x nu).
/// Throws ConvergenceError when the marginal violation stays above tol.
Matrix sinkhorn(const Matrix& cost, const Marginals& m, double eps, double tol = 1e-9,
                int max_iter = 10000);

/// Frank-Wolfe with exact linear minimization and closed-form line search.
Coupling solve_gw(const Matrix& c, const Matrix& d, const Marginals& m,
                  const GwSolverOptions& opts = {});

/// Mirror descent: repeated Sinkhorn projections of the doubled GW gradient.
Coupling solve_egw(const Matrix& c, const Matrix& d, const Marginals& m,
                   const GwSolverOptions& opts);

/// Dispatches on opts.kind.
Coupling solve_coupling(const Matrix& c, const Matrix& d, const Marginals& m,
                        const GwSolverOptions& opts);

}  // namespace gtrans
