#include "gtrans/ot.hpp"

#include "gtrans/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gtrans {

Marginals Marginals::uniform(Index source_size, Index target_size) {
  require(source_size > 0 && target_size > 0, ErrorKind::EmptyInput,
          "marginals need at least one point on each side");
  return {Vector::Constant(source_size, 1.0 / static_cast<double>(source_size)),
          Vector::Constant(target_size, 1.0 / static_cast<double>(target_size))};
}

void Marginals::validate() const {
  require(mu.size() > 0 && nu.size() > 0, ErrorKind::EmptyInput, "marginals must be nonempty");
  require((mu.array() >= 0.0).all() && (nu.array() >= 0.0).all(), ErrorKind::Infeasible,
          "marginals must be nonnegative");
  require(std::abs(mu.sum() - 1.0) <= 1e-12 && std::abs(nu.sum() - 1.0) <= 1e-12,
          ErrorKind::Infeasible, "marginals must each sum to 1");
}

double kl_to_product(const Matrix& pi, const Marginals& m) {
  double kl = 0.0;
  for (Index j = 0; j < pi.cols(); ++j) {
    for (Index i = 0; i < pi.rows(); ++i) {
      const double p = pi(i, j);
      if (p > 0.0) kl += p * std::log(p / (m.mu(i) * m.nu(j)));
    }
  }
  return kl;
}

Matrix exact_linear_ot(const Matrix& cost, const Marginals& m) {
  TransportSimplex simplex(m.mu, m.nu);
  return simplex.solve(cost);
}

namespace {

// log sum_k exp(v_k), -inf entries allowed
double log_sum_exp(const Eigen::Ref<const Eigen::ArrayXd>& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v - mx).exp().sum());
}

}  // namespace

Matrix sinkhorn(const Matrix& cost, const Marginals& m, double eps, double tol, int max_iter) {
  require(eps > 0.0, ErrorKind::InvalidArgument, "sinkhorn epsilon must be positive");
  require(cost.rows() == m.mu.size() && cost.cols() == m.nu.size(), ErrorKind::DimensionMismatch,
          "sinkhorn cost does not match marginals");
  require(cost.allFinite(), ErrorKind::InvalidArgument, "sinkhorn cost must be finite");
  const Index rows = cost.rows();
  const Index cols = cost.cols();

  // pi_ij = mu_i nu_j exp((f_i + g_j - C_ij) / eps). The potentials f, g are in
  // cost units, so they carry over unchanged when eps changes.
  const Eigen::ArrayXd log_mu = m.mu.array().log();
  const Eigen::ArrayXd log_nu = m.nu.array().log();
  const Eigen::ArrayXXd c = cost.array();
  Eigen::ArrayXd f = Eigen::ArrayXd::Zero(rows);
  Eigen::ArrayXd g = Eigen::ArrayXd::Zero(cols);
  Eigen::ArrayXd row_buf(cols);
  Eigen::ArrayXd col_buf(rows);

  auto sweep = [&](double e) {
    for (Index i = 0; i < rows; ++i) {
      row_buf = (g - c.row(i).transpose()) / e + log_nu;
      f(i) = -e * log_sum_exp(row_buf);
    }
    for (Index j = 0; j < cols; ++j) {
      col_buf = (f - c.col(j)) / e + log_mu;
      g(j) = -e * log_sum_exp(col_buf);
    }
  };
  auto plan = [&](double e) {
    Matrix p(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      p.col(j) = ((f + g(j) - c.col(j)) / e + log_mu + log_nu(j)).exp().matrix();
    }
    return p;
  };
  // Column sums are exact after a sweep; the rows carry the violation.
  auto row_violation = [&](double e) {
    return (plan(e).rowwise().sum() - m.mu).cwiseAbs().maxCoeff();
  };

  // eps-scaling: anneal from the cost range down to eps, a few sweeps per stage.
  const double range = c.maxCoeff() - c.minCoeff();
  for (double e = range / 2.0; e > 2.0 * eps; e /= 2.0) {
    for (int k = 0; k < 20; ++k) sweep(e);
  }

  // Newton on the dual, used once plain sweeps stall. Near-degenerate plans make
  // the sweep contraction factor indistinguishable from 1 at small eps; Newton
  // converges quadratically to the same fixed point.
  auto dual_value = [&](const Eigen::ArrayXd& ff, const Eigen::ArrayXd& gg) {
    double mass = 0.0;
    for (Index j = 0; j < cols; ++j) {
      mass += ((ff + gg(j) - c.col(j)) / eps + log_mu + log_nu(j)).exp().sum();
    }
    return ff.matrix().dot(m.mu) + gg.matrix().dot(m.nu) - eps * mass;
  };
  auto newton_polish = [&](int steps) {
    const Index k = rows + cols - 1;  // g(cols - 1) fixed to remove the shift invariance
    for (int s = 0; s < steps; ++s) {
      const Matrix p = plan(eps);
      const Vector r = p.rowwise().sum();
      const Vector q = p.colwise().sum().transpose();
      const double v = std::max((r - m.mu).cwiseAbs().maxCoeff(), (q - m.nu).cwiseAbs().maxCoeff());
      if (v < tol) return;
      Matrix h = Matrix::Zero(k, k);
      h.topLeftCorner(rows, rows).diagonal() = r;
      h.topRightCorner(rows, cols - 1) = p.leftCols(cols - 1);
      h.bottomLeftCorner(cols - 1, rows) = p.leftCols(cols - 1).transpose();
      h.bottomRightCorner(cols - 1, cols - 1).diagonal() = q.head(cols - 1);
      h.diagonal().array() += 1e-13 * h.diagonal().maxCoeff();
      Vector grad(k);
      grad.head(rows) = m.mu - r;
      grad.tail(cols - 1) = (m.nu - q).head(cols - 1);
      const Vector step = eps * h.ldlt().solve(grad);
      if (!step.allFinite()) return;
      const double base = dual_value(f, g);
      const double slope = grad.dot(step);
      Eigen::ArrayXd f_new = f, g_new = g;
      double t = 1.0;
      for (; t > 1e-12; t *= 0.5) {
        f_new = f + t * step.head(rows).array();
        g_new.head(cols - 1) = g.head(cols - 1) + t * step.tail(cols - 1).array();
        if (dual_value(f_new, g_new) >= base + 1e-4 * t * slope) break;
      }
      if (t <= 1e-12) return;
      f = f_new;
      g = g_new;
      sweep(eps);
    }
  };

  constexpr int kNewtonAfter = 500;
  double violation = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    sweep(eps);
    if (it % 5 == 4 || it + 1 == max_iter) {
      violation = row_violation(eps);
      if (violation < tol) return plan(eps);
    }
    if (it + 1 == kNewtonAfter) {
      newton_polish(50);
      violation = row_violation(eps);
      if (violation < tol) return plan(eps);
    }
  }
  throw ConvergenceError("sinkhorn did not reach marginal tolerance after " +
                             std::to_string(max_iter) + " iterations (residual " +
                             std::to_string(violation) + ")",
                         violation);
}

namespace {

void check_gw_inputs(const Matrix& c, const Matrix& d, const Marginals& m) {
  require(c.rows() == c.cols() && d.rows() == d.cols(), ErrorKind::DimensionMismatch,
          "GW inputs must be square");
  require(c.rows() == m.mu.size() && d.rows() == m.nu.size(), ErrorKind::DimensionMismatch,
          "GW inputs do not match marginals");
  m.validate();
}

Matrix initial_plan(const Marginals& m, const GwSolverOptions& opts) {
  if (!opts.init) return m.mu * m.nu.transpose();
  require(opts.init->rows() == m.mu.size() && opts.init->cols() == m.nu.size(),
          ErrorKind::DimensionMismatch, "initial coupling has the wrong shape");
  return *opts.init;
}

bool small_relative_change(double before, double after, double tol) {
  return std::abs(before - after) <= tol * std::max(std::abs(before), 1e-300);
}

}  // namespace

Coupling solve_gw(const Matrix& c, const Matrix& d, const Marginals& m,
                  const GwSolverOptions& opts) {
  check_gw_inputs(c, d, m);
  TransportSimplex simplex(m.mu, m.nu);

  Coupling out;
  out.plan = initial_plan(m, opts);
  Matrix g = gw_gradient(c, d, out.plan);
  double objective = g.cwiseProduct(out.plan).sum();
  out.history.push_back(objective);

  for (int it = 0; it < opts.max_outer; ++it) {
    out.iterations = it + 1;
    if (objective <= 0.0) {
      out.converged = true;
      break;
    }
    const Matrix vertex = simplex.solve(2.0 * g);
    const Matrix direction = vertex - out.plan;
    const Matrix g_dir = gw_gradient(c, d, direction);

    // objective(plan + t dir) = objective + b t + a t^2
    const double a = g_dir.cwiseProduct(direction).sum();
    const double b = 2.0 * g.cwiseProduct(direction).sum();
    double t;
    if (a > 0.0) {
      t = std::clamp(-b / (2.0 * a), 0.0, 1.0);
    } else {
      t = (a + b < 0.0) ? 1.0 : 0.0;
    }
    if (t <= 0.0) {
      out.converged = true;
      break;
    }

    Matrix next_plan = out.plan + t * direction;
    Matrix next_g = g + t * g_dir;
    const double next_objective = next_g.cwiseProduct(next_plan).sum();
    if (!(next_objective <= objective)) {
      out.converged = true;
      break;
    }
    const bool done = small_relative_change(objective, next_objective, opts.tol_objective);
    out.plan = std::move(next_plan);
    g = std::move(next_g);
    objective = next_objective;
    out.history.push_back(objective);
    if (done) {
      out.converged = true;
      break;
    }
  }

  // Recompute from scratch so accumulated rank-one updates do not drift.
  out.objective = gw_objective(c, d, out.plan);
  out.entropic_objective = out.objective;
  return out;
}

Coupling solve_egw(const Matrix& c, const Matrix& d, const Marginals& m,
                   const GwSolverOptions& opts) {
  check_gw_inputs(c, d, m);
  require(opts.epsilon > 0.0, ErrorKind::InvalidArgument, "entropic GW needs epsilon > 0");

  Coupling out;
  out.plan = initial_plan(m, opts);
  double objective = gw_objective(c, d, out.plan);
  double entropic = objective + opts.epsilon * kl_to_product(out.plan, m);
  out.history.push_back(objective);

  for (int it = 0; it < opts.max_outer; ++it) {
    out.iterations = it + 1;
    const Matrix grad = 2.0 * gw_gradient(c, d, out.plan);
    out.plan = sinkhorn(grad, m, opts.epsilon, opts.tol_sinkhorn, opts.max_sinkhorn);
    const double next_objective = gw_objective(c, d, out.plan);
    const double next_entropic = next_objective + opts.epsilon * kl_to_product(out.plan, m);
    out.history.push_back(next_objective);
    const bool done = small_relative_change(entropic, next_entropic, opts.tol_objective);
    objective = next_objective;
    entropic = next_entropic;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.objective = objective;
  out.entropic_objective = entropic;
  return out;
}

Coupling solve_coupling(const Matrix& c, const Matrix& d, const Marginals& m,
                        const GwSolverOptions& opts) {
  return opts.kind == GwSolverOptions::Kind::ExactGw ? solve_gw(c, d, m, opts)
                                                     : solve_egw(c, d, m, opts);
}

}  // namespace gtrans
