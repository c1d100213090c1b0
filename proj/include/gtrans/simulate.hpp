#pragma once

#include "gtrans/common.hpp"
#include "gtrans/eval.hpp"
#include "gtrans/graphon.hpp"
#include "gtrans/transfer.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gtrans {

enum class Method { GtransGw, GtransEgw, Ns, Usvt, NonDebias, NonSmooth, Adj };

const char* to_string(Method m);
Method method_from_string(const std::string& name);  // throws ErrorKind::InvalidArgument

struct MethodSettings {
  double delta_gw = 0.15;
  double delta_egw = 0.18;
  double epsilon = 0.01;
  double usvt_eta = 0.01;
  SmootherConfig smoother;

  TransferConfig transfer_config(Method m) const;
};

/// Estimate of the target probability matrix by one method. When `initial`
/// is supplied it must hold (NS(source), NS(target)) and is reused.
struct MethodOutput {
  Matrix estimate;
  double d = std::numeric_limits<double>::quiet_NaN();
  bool debiased = false;
};
MethodOutput run_method(Method m, const Matrix& source, const Matrix& target,
                        const MethodSettings& settings,
                        const std::pair<Matrix, Matrix>* initial = nullptr);

struct Scenario {
  enum class Kind { SourceSizeSweep, CrossGraphon, DensityShift, Ablation };

  std::string name = "scenario";
  Kind kind = Kind::SourceSizeSweep;
  int source_graphon = 6;
  int target_graphon = 6;
  std::vector<Index> source_sizes{500};
  Index target_size = 50;
  int reps = 50;
  /// Source-size sweep / ablation / cross-graphon: noise added to the target matrix.
  std::optional<PerturbationSpec> target_noise;
  /// Density shift: one grid cell per lambda, applied to the source matrix.
  std::vector<double> lambdas;
  std::vector<Method> methods{Method::GtransGw, Method::Ns};
  std::uint64_t seed = 1;
  MethodSettings settings;
  int workers = 0;  // 0 = all available

  static const char* kind_name(Kind k);
};

struct ResultRow {
  std::string scenario;
  int cell = 0;
  Index n_s = 0;
  Index n_t = 0;
  int source_graphon = 0;
  int target_graphon = 0;
  double lambda = 0.0;
  Method method = Method::Ns;
  int rep = 0;
  double mse = 0.0;
  double d = 0.0;  // NaN for target-only methods
  bool debiased = false;
};

struct CellSummary {
  int cell = 0;
  Index n_s = 0;
  double lambda = 0.0;
  Method method = Method::Ns;
  int count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
};

struct ScenarioResult {
  std::vector<ResultRow> rows;        // ordered by (cell, rep, method)
  std::vector<CellSummary> summary;   // ordered by (cell, method)

  const CellSummary& find(int cell, Method m) const;
};

/// Runs every grid cell and replicate. Target-side randomness depends only on
/// (seed, rep), so all cells of one replicate share the same target graph.
ScenarioResult run_scenario(const Scenario& s);

std::vector<CellSummary> summarize(const std::vector<ResultRow>& rows);

struct LinkPredictionRun {
  std::vector<Method> methods;
  std::vector<std::vector<double>> auc;  // [seed][method]
  std::vector<double> mean;
  std::vector<double> std;
};

/// Masks the target with test ratio p, estimates from the masked target with
/// each method, and scores AUC on the held-out entries; one row per seed.
LinkPredictionRun run_link_prediction(const AdjMatrix& source, const AdjMatrix& target, double p,
                                      int seeds, std::uint64_t base_seed,
                                      const std::vector<Method>& methods,
                                      const MethodSettings& settings, int workers = 0);

/// Mean and sample standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& v);

}  // namespace gtrans
