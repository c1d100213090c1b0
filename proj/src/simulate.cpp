#include "gtrans/simulate.hpp"

#include "gtrans/log.hpp"

#include <cmath>
#include <exception>
#include <map>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gtrans {

const char* to_string(Method m) {
  switch (m) {
    case Method::GtransGw: return "gtrans-gw";
    case Method::GtransEgw: return "gtrans-egw";
    case Method::Ns: return "ns";
    case Method::Usvt: return "usvt";
    case Method::NonDebias: return "gtrans-nondebias";
    case Method::NonSmooth: return "gtrans-nonsmooth";
    case Method::Adj: return "gtrans-adj";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  for (Method m : {Method::GtransGw, Method::GtransEgw, Method::Ns, Method::Usvt,
                   Method::NonDebias, Method::NonSmooth, Method::Adj}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + name + "'");
}

const char* Scenario::kind_name(Kind k) {
  switch (k) {
    case Kind::SourceSizeSweep: return "source-size-sweep";
    case Kind::CrossGraphon: return "cross-graphon";
    case Kind::DensityShift: return "density-shift";
    case Kind::Ablation: return "ablation";
  }
  return "?";
}

TransferConfig MethodSettings::transfer_config(Method m) const {
  TransferConfig cfg;
  cfg.smoother = smoother;
  cfg.delta = delta_gw;
  switch (m) {
    case Method::GtransEgw:
      cfg.solver = GwSolverOptions::entropic(epsilon);
      cfg.delta = delta_egw;
      break;
    case Method::NonDebias: cfg.variant = Variant::NonDebias; break;
    case Method::NonSmooth: cfg.variant = Variant::NonSmooth; break;
    case Method::Adj: cfg.variant = Variant::Adj; break;
    default: break;
  }
  return cfg;
}

MethodOutput run_method(Method m, const Matrix& source, const Matrix& target,
                        const MethodSettings& settings, const std::pair<Matrix, Matrix>* initial) {
  MethodOutput out;
  switch (m) {
    case Method::Ns:
      out.estimate = initial ? initial->second : ns_estimate(target, settings.smoother);
      return out;
    case Method::Usvt:
      out.estimate = usvt_estimate(AdjMatrix(target), settings.usvt_eta);
      return out;
    default: break;
  }
  const TransferConfig cfg = settings.transfer_config(m);
  const bool uses_smoothed_initial = cfg.variant == Variant::Full || cfg.variant == Variant::NonDebias;
  TransferResult r = (initial && uses_smoothed_initial)
                         ? transfer_from_initial(initial->first, initial->second, cfg)
                         : gtrans(source, target, cfg);
  out.estimate = std::move(r.p_final);
  out.d = r.d;
  out.debiased = r.debiased;
  return out;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return {mean, sd};
}

const CellSummary& ScenarioResult::find(int cell, Method m) const {
  for (const auto& s : summary) {
    if (s.cell == cell && s.method == m) return s;
  }
  throw Error(ErrorKind::InvalidArgument, "no summary for cell " + std::to_string(cell) +
                                              " method " + to_string(m));
}

std::vector<CellSummary> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::pair<int, int>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[{r.cell, static_cast<int>(r.method)}].push_back(&r);
  std::vector<CellSummary> out;
  for (const auto& [key, group] : groups) {
    std::vector<double> values;
    for (const auto* r : group) values.push_back(r->mse);
    const auto [mean, sd] = mean_std(values);
    CellSummary s;
    s.cell = key.first;
    s.method = static_cast<Method>(key.second);
    s.n_s = group.front()->n_s;
    s.lambda = group.front()->lambda;
    s.count = static_cast<int>(values.size());
    s.mean = mean;
    s.std = sd;
    out.push_back(s);
  }
  return out;
}

namespace {

// Runs body(task) for task in [0, count) on `workers` threads, rethrowing the
// first exception after the loop.
template <typename Body>
void parallel_tasks(int count, int workers, Body&& body) {
  std::exception_ptr failure;
  std::mutex mu;
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#else
  (void)workers;
#endif
  for (int task = 0; task < count; ++task) {
    try {
      body(task);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

struct Cell {
  Index n_s;
  double lambda;
};

std::vector<Cell> cells_of(const Scenario& s) {
  std::vector<Cell> cells;
  if (s.kind == Scenario::Kind::DensityShift) {
    require(!s.lambdas.empty(), ErrorKind::InvalidArgument, "density-shift needs lambdas");
    require(s.source_sizes.size() == 1, ErrorKind::InvalidArgument,
            "density-shift takes a single source size");
    for (double l : s.lambdas) cells.push_back({s.source_sizes.front(), l});
  } else {
    for (Index n : s.source_sizes) cells.push_back({n, 0.0});
  }
  return cells;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s) {
  require(s.reps >= 1, ErrorKind::InvalidArgument, "scenario needs reps >= 1");
  require(!s.source_sizes.empty(), ErrorKind::InvalidArgument, "scenario needs source sizes");
  require(!s.methods.empty(), ErrorKind::InvalidArgument, "scenario needs methods");
  require(s.target_size >= 3, ErrorKind::TooFewNodes, "target size must be >= 3");
  for (Index n : s.source_sizes) require(n >= 3, ErrorKind::TooFewNodes, "source size must be >= 3");
  const Graphon fs(s.source_graphon);
  const Graphon ft(s.target_graphon);
  const std::vector<Cell> cells = cells_of(s);
  const int num_cells = static_cast<int>(cells.size());
  const std::size_t num_methods = s.methods.size();
  const Rng root(s.seed);

  std::vector<ResultRow> rows(static_cast<std::size_t>(num_cells) * s.reps * num_methods);
  parallel_tasks(num_cells * s.reps, s.workers, [&](int task) {
    const int cell = task / s.reps;
    const int rep = task % s.reps;
    const Cell& c = cells[cell];

    Rng target_rng = root.split(0).split(static_cast<std::uint64_t>(rep));
    Rng source_rng = root.split(1).split(static_cast<std::uint64_t>(cell)).split(
        static_cast<std::uint64_t>(rep));

    Rng t_lat = target_rng.split(0), t_noise = target_rng.split(1), t_adj = target_rng.split(2);
    Matrix p_t = build_prob_matrix(ft, sample_latents(s.target_size, false, t_lat));
    if (s.target_noise && s.kind != Scenario::Kind::DensityShift) {
      p_t = perturb(p_t, *s.target_noise, t_noise);
    }
    const AdjMatrix a_t = sample_adjacency(p_t, t_adj);

    Rng s_lat = source_rng.split(0), s_noise = source_rng.split(1), s_adj = source_rng.split(2);
    Matrix p_s = build_prob_matrix(fs, sample_latents(c.n_s, false, s_lat));
    if (s.kind == Scenario::Kind::DensityShift) {
      p_s = perturb(p_s, PerturbationSpec::density_shift(c.lambda), s_noise);
    }
    const AdjMatrix a_s = sample_adjacency(p_s, s_adj);

    std::pair<Matrix, Matrix> initial;
    bool have_initial = false;
    for (Method m : s.methods) {
      if (m == Method::GtransGw || m == Method::GtransEgw || m == Method::NonDebias ||
          m == Method::Ns) {
        initial = {ns_estimate(a_s, s.settings.smoother), ns_estimate(a_t, s.settings.smoother)};
        have_initial = true;
        break;
      }
    }

    for (std::size_t k = 0; k < num_methods; ++k) {
      const Method m = s.methods[k];
      const MethodOutput out = run_method(m, a_s.matrix(), a_t.matrix(), s.settings,
                                          have_initial ? &initial : nullptr);
      ResultRow& row = rows[(static_cast<std::size_t>(cell) * s.reps + rep) * num_methods + k];
      row.scenario = s.name;
      row.cell = cell;
      row.n_s = c.n_s;
      row.n_t = s.target_size;
      row.source_graphon = s.source_graphon;
      row.target_graphon = s.target_graphon;
      row.lambda = c.lambda;
      row.method = m;
      row.rep = rep;
      row.mse = mse(out.estimate, p_t);
      row.d = out.d;
      row.debiased = out.debiased;
    }
    log_debug("scenario " + s.name + " cell " + std::to_string(cell) + " rep " +
              std::to_string(rep) + " done");
  });

  ScenarioResult result;
  result.rows = std::move(rows);
  result.summary = summarize(result.rows);
  return result;
}

LinkPredictionRun run_link_prediction(const AdjMatrix& source, const AdjMatrix& target, double p,
                                      int seeds, std::uint64_t base_seed,
                                      const std::vector<Method>& methods,
                                      const MethodSettings& settings, int workers) {
  require(seeds >= 1, ErrorKind::InvalidArgument, "link prediction needs seeds >= 1");
  LinkPredictionRun run;
  run.methods = methods;
  run.auc.assign(seeds, std::vector<double>(methods.size(), 0.0));
  const Rng root(base_seed);
  const Matrix p_s_ini = ns_estimate(source, settings.smoother);

  parallel_tasks(seeds, workers, [&](int seed) {
    // Redraw (on a fresh sub-stream) until the held-out set has both classes.
    Rng seed_rng = root.split(static_cast<std::uint64_t>(seed));
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng rng = seed_rng.split(attempt);
      MaskedGraph mg = mask_edges(target, p, rng);
      const Index held = mg.mask.held_out_pairs();
      Index held_edges = 0;
      for (Index j = 1; j < target.size(); ++j) {
        for (Index i = 0; i < j; ++i) held_edges += mg.mask.held_out(i, j) && target.edge(i, j);
      }
      if (held_edges == 0 || held_edges == held) {
        require(attempt < 1000, ErrorKind::UndefinedAuc, "could not draw a usable mask");
        continue;
      }
      const std::pair<Matrix, Matrix> initial{p_s_ini, ns_estimate(mg.masked, settings.smoother)};
      for (std::size_t k = 0; k < methods.size(); ++k) {
        const MethodOutput out =
            run_method(methods[k], source.matrix(), mg.masked.matrix(), settings, &initial);
        run.auc[seed][k] = link_auc(out.estimate, target, mg.mask);
      }
      break;
    }
  });

  for (std::size_t k = 0; k < methods.size(); ++k) {
    std::vector<double> col;
    for (const auto& row : run.auc) col.push_back(row[k]);
    const auto [mean, sd] = mean_std(col);
    run.mean.push_back(mean);
    run.std.push_back(sd);
  }
  return run;
}

}  // namespace gtrans
