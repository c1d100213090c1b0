#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gtrans {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorKind {
  UnknownGraphon,
  EmptyInput,
  InvalidArgument,
  TooFewNodes,
  DimensionMismatch,
  Infeasible,
  Convergence,
  DegenerateColumn,
  UndefinedAuc,
  Input,
  Usage,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by iterative solvers; carries the last measured residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double residual)
      : Error(ErrorKind::Convergence, message), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

template <typename A, typename B>
void require_same_shape(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                        const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

template <typename Derived>
void clamp_inplace(Eigen::MatrixBase<Derived>& m, double lo, double hi) {
  m = m.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace gtrans
