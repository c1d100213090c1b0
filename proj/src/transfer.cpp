#include "gtrans/transfer.hpp"

#include "gtrans/log.hpp"

#include <utility>

namespace gtrans {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NonDebias: return "non-debias";
    case Variant::NonSmooth: return "non-smooth";
    case Variant::Adj: return "adj";
  }
  return "?";
}

TransferConfig TransferConfig::exact_gw() { return {}; }

TransferConfig TransferConfig::entropic_gw(double epsilon) {
  TransferConfig cfg;
  cfg.solver = GwSolverOptions::entropic(epsilon);
  cfg.delta = 0.18;
  return cfg;
}

DebiasResult debias(const Matrix& p_t_ini, const Matrix& p_trans2, const SmootherConfig& smoother,
                    bool clamp_final) {
  require_same_shape(p_t_ini, p_trans2, "debias");
  DebiasResult out;
  out.residual = p_t_ini - p_trans2;
  SmootherConfig residual_cfg = smoother;
  residual_cfg.clamp_range.reset();
  out.p_res = ns_estimate(out.residual, residual_cfg);
  out.p_final = p_trans2 + out.p_res;
  if (clamp_final) clamp_inplace(out.p_final, 0.0, 1.0);
  return out;
}

namespace {

// Column normalization that substitutes a uniform column for an unmatched
// target node instead of aborting.
Matrix normalize_alignment(const Matrix& plan, std::vector<std::string>& warnings) {
  Matrix out = plan;
  const double uniform = 1.0 / static_cast<double>(plan.rows());
  for (Index j = 0; j < out.cols(); ++j) {
    const double s = out.col(j).sum();
    if (s > 0.0) {
      out.col(j) /= s;
    } else {
      out.col(j).setConstant(uniform);
      warnings.push_back("coupling column " + std::to_string(j) +
                         " had no mass; substituted a uniform column");
    }
  }
  return out;
}

}  // namespace

TransferResult transfer_from_initial(Matrix p_s_ini, Matrix p_t_ini, const TransferConfig& cfg) {
  require(cfg.delta == cfg.delta, ErrorKind::InvalidArgument, "delta must not be NaN");
  TransferResult r;
  r.p_s_ini = std::move(p_s_ini);
  r.p_t_ini = std::move(p_t_ini);
  const Index ns = r.p_s_ini.rows();
  const Index nt = r.p_t_ini.rows();
  require(ns >= 3 && nt >= 3, ErrorKind::TooFewNodes, "transfer needs at least 3 nodes per graph");
  if (ns <= nt) {
    r.warnings.push_back("source graph (" + std::to_string(ns) +
                         " nodes) is not larger than the target (" + std::to_string(nt) + ")");
  }

  try {
    r.pi = solve_coupling(r.p_s_ini, r.p_t_ini, Marginals::uniform(ns, nt), cfg.solver);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string("alignment: ") + e.what(), e.residual());
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("alignment: ") + e.what());
  }
  r.d = r.pi.objective;
  r.pi_tilde = normalize_alignment(r.pi.plan, r.warnings);
  r.p_trans = project_source(r.pi_tilde, r.p_s_ini);
  r.p_trans = 0.5 * (r.p_trans + r.p_trans.transpose());

  const bool smooth_transferred = cfg.variant != Variant::NonSmooth;
  r.p_trans2 = smooth_transferred ? ns_estimate(r.p_trans, cfg.smoother) : r.p_trans;

  const bool may_debias = cfg.variant != Variant::NonDebias;
  r.debiased = may_debias && r.d > cfg.delta;
  if (r.debiased) {
    DebiasResult db = debias(r.p_t_ini, r.p_trans2, cfg.smoother, cfg.clamp_final);
    r.residual = std::move(db.residual);
    r.p_res = std::move(db.p_res);
    r.p_final = std::move(db.p_final);
  } else {
    r.p_final = r.p_trans2;
    if (cfg.clamp_final) clamp_inplace(r.p_final, 0.0, 1.0);
  }
  for (const auto& w : r.warnings) log_warn(w);
  return r;
}

TransferResult gtrans(const Matrix& source, const Matrix& target, const TransferConfig& cfg) {
  require(is_symmetric(source) && is_symmetric(target), ErrorKind::InvalidArgument,
          "gtrans inputs must be symmetric");
  const bool smooth_initial = cfg.variant == Variant::Full || cfg.variant == Variant::NonDebias;
  Matrix p_s_ini = smooth_initial ? ns_estimate(source, cfg.smoother) : source;
  Matrix p_t_ini = smooth_initial ? ns_estimate(target, cfg.smoother) : target;
  return transfer_from_initial(std::move(p_s_ini), std::move(p_t_ini), cfg);
}

}  // namespace gtrans
