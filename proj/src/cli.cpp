#include "gtrans/cli.hpp"

#include "gtrans/eval.hpp"
#include "gtrans/io.hpp"
#include "gtrans/log.hpp"
#include "gtrans/simulate.hpp"
#include "gtrans/transfer.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

namespace gtrans {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return kExitUsage;
    case ErrorKind::Convergence: return kExitConvergence;
    case ErrorKind::Infeasible:
    case ErrorKind::DegenerateColumn: return kExitInternal;
    default: return kExitInput;
  }
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  json j = {{"error", kind}, {"message", message}, {"exit_code", code}};
  err << j.dump() << '\n';
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::Input,
          "cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Input, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

// Wall-clock data lives here so the result files stay byte-identical across runs.
void write_metadata(const fs::path& dir, const std::vector<std::string>& args) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  write_json(dir / "metadata.json", {{"created_at", stamp}, {"argv", args}});
}

std::optional<Index> opt_nodes(long long v) {
  if (v <= 0) return std::nullopt;
  return static_cast<Index>(v);
}

AdjMatrix load_graph(const std::string& path, long long nodes) {
  EdgeListLoad load = load_edge_list(path, opt_nodes(nodes));
  log_info(path + ": " + std::to_string(load.adjacency.size()) + " nodes, " +
           std::to_string(load.adjacency.edge_count()) + " edges");
  return std::move(load.adjacency);
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(method_from_string(n));
  require(!out.empty(), ErrorKind::InvalidArgument, "no methods given");
  return out;
}

// ---- scenario files ------------------------------------------------------

template <typename T>
T take(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  require(j.is_object(), ErrorKind::Input, where + " must be a JSON object");
  for (const auto& item : j.items()) {
    require(allowed.count(item.key()) > 0, ErrorKind::Input,
            "unknown key '" + item.key() + "' in " + where);
  }
}

Scenario::Kind kind_from_string(const std::string& s) {
  for (auto k : {Scenario::Kind::SourceSizeSweep, Scenario::Kind::CrossGraphon,
                 Scenario::Kind::DensityShift, Scenario::Kind::Ablation}) {
    if (s == Scenario::kind_name(k)) return k;
  }
  throw Error(ErrorKind::Input, "unknown scenario kind '" + s + "'");
}

Scenario scenario_from_json(const json& j) {
  reject_unknown(j,
                 {"schema", "name", "kind", "source_graphon", "target_graphon", "source_sizes",
                  "target_size", "reps", "target_noise", "lambdas", "methods", "seed", "workers",
                  "settings"},
                 "scenario");
  require(j.contains("schema") && j.at("schema") == 1, ErrorKind::Input,
          "scenario must declare \"schema\": 1");
  Scenario s;
  s.name = take<std::string>(j, "name", s.name);
  if (j.contains("kind")) s.kind = kind_from_string(j.at("kind").get<std::string>());
  s.source_graphon = take<int>(j, "source_graphon", s.source_graphon);
  s.target_graphon = take<int>(j, "target_graphon", s.target_graphon);
  Graphon check_s(s.source_graphon), check_t(s.target_graphon);
  if (j.contains("source_sizes")) s.source_sizes = j.at("source_sizes").get<std::vector<Index>>();
  s.target_size = take<Index>(j, "target_size", s.target_size);
  s.reps = take<int>(j, "reps", s.reps);
  if (j.contains("target_noise")) {
    const json& t = j.at("target_noise");
    reject_unknown(t, {"lo", "hi"}, "target_noise");
    s.target_noise = PerturbationSpec::uniform_noise(t.at("lo").get<double>(), t.at("hi").get<double>());
  }
  if (j.contains("lambdas")) s.lambdas = j.at("lambdas").get<std::vector<double>>();
  if (j.contains("methods")) s.methods = parse_methods(j.at("methods").get<std::vector<std::string>>());
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  s.workers = take<int>(j, "workers", s.workers);
  if (j.contains("settings")) {
    const json& t = j.at("settings");
    reject_unknown(t, {"delta_gw", "delta_egw", "epsilon", "usvt_eta", "quantile_constant"},
                   "settings");
    s.settings.delta_gw = take<double>(t, "delta_gw", s.settings.delta_gw);
    s.settings.delta_egw = take<double>(t, "delta_egw", s.settings.delta_egw);
    s.settings.epsilon = take<double>(t, "epsilon", s.settings.epsilon);
    s.settings.usvt_eta = take<double>(t, "usvt_eta", s.settings.usvt_eta);
    s.settings.smoother.quantile_constant =
        take<double>(t, "quantile_constant", s.settings.smoother.quantile_constant);
  }
  return s;
}

// ---- commands ------------------------------------------------------------

struct EstimateArgs {
  std::string edges, matrix, method = "ns", truth, out_dir;
  long long nodes = 0;
  double quantile_constant = 1.0, eta = 0.01;
};

int cmd_estimate(const EstimateArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  require(a.edges.empty() != a.matrix.empty(), ErrorKind::Usage,
          "estimate needs exactly one of --edges or --matrix");
  SmootherConfig smoother;
  smoother.quantile_constant = a.quantile_constant;
  Matrix estimate;
  Index n = 0;
  if (!a.edges.empty()) {
    const AdjMatrix g = load_graph(a.edges, a.nodes);
    n = g.size();
    estimate = a.method == "ns" ? ns_estimate(g, smoother) : usvt_estimate(g, a.eta);
  } else {
    const Matrix x = read_matrix_csv(a.matrix);
    require(x.rows() == x.cols() && is_symmetric(x), ErrorKind::Input,
            "--matrix must be a symmetric square matrix");
    n = x.rows();
    require(a.method == "ns", ErrorKind::Usage, "usvt needs a binary --edges input");
    estimate = ns_estimate(x, smoother);
  }
  const fs::path dir = prepare_dir(a.out_dir);
  write_matrix_csv((dir / "p_hat.csv").string(), estimate);
  json result = {{"command", "estimate"}, {"method", a.method}, {"n", n}};
  if (a.method == "ns") result["quantile_constant"] = a.quantile_constant;
  else result["eta"] = a.eta;
  if (!a.truth.empty()) result["mse_to_truth"] = mse(estimate, read_matrix_csv(a.truth));
  write_json(dir / "result.json", result);
  write_metadata(dir, argv);
  out << result.dump() << '\n';
  return kExitOk;
}

struct TransferArgs {
  std::string source_edges, target_edges, solver = "gw", truth, out_dir;
  long long source_nodes = 0, target_nodes = 0;
  double epsilon = 0.01, quantile_constant = 1.0;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  bool no_clamp_final = false;
};

int cmd_transfer(const TransferArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const AdjMatrix a_s = load_graph(a.source_edges, a.source_nodes);
  const AdjMatrix a_t = load_graph(a.target_edges, a.target_nodes);
  TransferConfig cfg = a.solver == "egw" ? TransferConfig::entropic_gw(a.epsilon) : TransferConfig::exact_gw();
  if (a.delta) cfg.delta = *a.delta;
  cfg.smoother.quantile_constant = a.quantile_constant;
  cfg.clamp_final = !a.no_clamp_final;

  const TransferResult r = gtrans::gtrans(a_s, a_t, cfg);
  const fs::path dir = prepare_dir(a.out_dir);
  write_matrix_csv((dir / "p_s_ini.csv").string(), r.p_s_ini);
  write_matrix_csv((dir / "p_t_ini.csv").string(), r.p_t_ini);
  write_matrix_csv((dir / "coupling.csv").string(), r.pi.plan);
  write_matrix_csv((dir / "alignment.csv").string(), r.pi_tilde);
  write_matrix_csv((dir / "p_trans.csv").string(), r.p_trans);
  write_matrix_csv((dir / "p_trans2.csv").string(), r.p_trans2);
  if (r.p_res) write_matrix_csv((dir / "p_res.csv").string(), *r.p_res);
  write_matrix_csv((dir / "p_final.csv").string(), r.p_final);

  json coupling = {{"solver", a.solver},
                   {"objective", r.pi.objective},
                   {"iterations", r.pi.iterations},
                   {"converged", r.pi.converged}};
  if (a.solver == "egw") {
    coupling["epsilon"] = a.epsilon;
    coupling["entropic_objective"] = r.pi.entropic_objective;
  }
  write_json(dir / "coupling.json", coupling);

  json result = {{"command", "transfer"},
                 {"source_edges", a.source_edges},
                 {"target_edges", a.target_edges},
                 {"n_s", a_s.size()},
                 {"n_t", a_t.size()},
                 {"solver", a.solver},
                 {"delta", cfg.delta},
                 {"d", r.d},
                 {"debiased", r.debiased},
                 {"clamp_final", cfg.clamp_final},
                 {"warnings", r.warnings}};
  if (a.solver == "egw") result["epsilon"] = a.epsilon;
  if (a.seed) result["seed"] = *a.seed;
  if (!a.truth.empty()) result["mse_to_truth"] = mse(r.p_final, read_matrix_csv(a.truth));
  write_json(dir / "result.json", result);
  write_metadata(dir, argv);
  out << result.dump() << '\n';
  return kExitOk;
}

struct SimulateArgs {
  std::string scenario, out_dir;
  std::optional<int> reps, workers;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  std::ifstream in(a.scenario);
  require(static_cast<bool>(in), ErrorKind::Input, "cannot read scenario '" + a.scenario + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Input, a.scenario + ": " + e.what());
  }
  require(j.contains("seed") || a.seed.has_value(), ErrorKind::Usage,
          "simulate needs a seed (scenario \"seed\" or --seed)");
  Scenario s = scenario_from_json(j);
  if (a.reps) s.reps = *a.reps;
  if (a.seed) s.seed = *a.seed;
  if (a.workers) s.workers = *a.workers;

  const ScenarioResult r = run_scenario(s);
  const fs::path dir = prepare_dir(a.out_dir);
  {
    std::ofstream csv(dir / "results.csv");
    require(static_cast<bool>(csv), ErrorKind::Input, "cannot write results.csv");
    csv << "scenario,cell,n_s,n_t,source_graphon,target_graphon,lambda,method,rep,mse,d,debiased\n";
    for (const auto& row : r.rows) {
      csv << row.scenario << ',' << row.cell << ',' << row.n_s << ',' << row.n_t << ','
          << row.source_graphon << ',' << row.target_graphon << ',' << format_double(row.lambda)
          << ',' << to_string(row.method) << ',' << row.rep << ',' << format_double(row.mse) << ','
          << (std::isnan(row.d) ? std::string() : format_double(row.d)) << ','
          << (row.debiased ? 1 : 0) << '\n';
    }
  }
  json cells = json::array();
  for (const auto& c : r.summary) {
    cells.push_back({{"cell", c.cell},
                     {"n_s", c.n_s},
                     {"lambda", c.lambda},
                     {"method", to_string(c.method)},
                     {"count", c.count},
                     {"mean_mse", c.mean},
                     {"std_mse", c.std}});
  }
  json summary = {{"scenario", s.name},
                  {"kind", Scenario::kind_name(s.kind)},
                  {"source_graphon", s.source_graphon},
                  {"target_graphon", s.target_graphon},
                  {"target_size", s.target_size},
                  {"reps", s.reps},
                  {"seed", s.seed},
                  {"cells", cells}};
  write_json(dir / "summary.json", summary);
  write_metadata(dir, argv);
  out << summary.dump() << '\n';
  return kExitOk;
}

struct LinkPredArgs {
  std::string source_edges, target_edges, out_dir;
  long long source_nodes = 0, target_nodes = 0;
  double p = 0.1, quantile_constant = 1.0;
  int seeds = 50;
  std::uint64_t seed = 0;
  std::optional<int> workers;
  std::vector<std::string> methods{"gtrans-gw", "gtrans-egw", "ns", "usvt"};
};

int cmd_linkpred(const LinkPredArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const AdjMatrix a_s = load_graph(a.source_edges, a.source_nodes);
  const AdjMatrix a_t = load_graph(a.target_edges, a.target_nodes);
  MethodSettings settings;
  settings.smoother.quantile_constant = a.quantile_constant;
  const std::vector<Method> methods = parse_methods(a.methods);
  const LinkPredictionRun r =
      run_link_prediction(a_s, a_t, a.p, a.seeds, a.seed, methods, settings, a.workers.value_or(0));

  const fs::path dir = prepare_dir(a.out_dir);
  {
    std::ofstream csv(dir / "auc.csv");
    require(static_cast<bool>(csv), ErrorKind::Input, "cannot write auc.csv");
    csv << "seed,method,auc\n";
    for (std::size_t s = 0; s < r.auc.size(); ++s) {
      for (std::size_t k = 0; k < methods.size(); ++k) {
        csv << s << ',' << to_string(methods[k]) << ',' << format_double(r.auc[s][k]) << '\n';
      }
    }
  }
  json per_method = json::array();
  for (std::size_t k = 0; k < methods.size(); ++k) {
    per_method.push_back({{"method", to_string(methods[k])}, {"mean_auc", r.mean[k]}, {"std_auc", r.std[k]}});
  }
  json summary = {{"command", "linkpred"}, {"n_s", a_s.size()}, {"n_t", a_t.size()},
                  {"p", a.p}, {"seeds", a.seeds}, {"seed", a.seed}, {"methods", per_method}};
  write_json(dir / "summary.json", summary);
  write_metadata(dir, argv);
  out << summary.dump() << '\n';
  return kExitOk;
}

struct CvArgs {
  std::string source_edges, target_edges, solver = "gw", out_dir;
  long long source_nodes = 0, target_nodes = 0;
  double epsilon = 0.01;
  int folds = 5;
  std::vector<double> candidates;
  std::optional<long long> completion_rank;
  std::uint64_t seed = 0;
};

int cmd_cv(const CvArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const AdjMatrix a_s = load_graph(a.source_edges, a.source_nodes);
  const AdjMatrix a_t = load_graph(a.target_edges, a.target_nodes);
  const TransferConfig base =
      a.solver == "egw" ? TransferConfig::entropic_gw(a.epsilon) : TransferConfig::exact_gw();
  CvConfig cv;
  if (!a.candidates.empty()) cv.candidates = a.candidates;
  cv.folds = a.folds;
  if (a.completion_rank) cv.completion_rank = static_cast<Index>(*a.completion_rank);
  Rng rng(a.seed);
  const CvResult r = cv_select_delta(a_s, a_t, cv, base, rng);

  json fold_loss = json::array();
  for (const auto& row : r.fold_loss) fold_loss.push_back(row);
  json fold_distance = json::array();
  for (double d : r.fold_distance) fold_distance.push_back(std::isnan(d) ? json() : json(d));
  json result = {{"command", "cv"},       {"solver", a.solver},       {"folds", a.folds},
                 {"seed", a.seed},        {"delta_hat", r.delta_hat}, {"candidates", r.candidates},
                 {"mean_loss", r.mean_loss}, {"fold_loss", fold_loss}, {"fold_distance", fold_distance},
                 {"folds_used", r.folds_used}};
  const fs::path dir = prepare_dir(a.out_dir);
  write_json(dir / "cv.json", result);
  write_metadata(dir, argv);
  out << result.dump() << '\n';
  return kExitOk;
}

int cmd_graphon_table(const std::string& out_dir, int size, std::ostream& out) {
  require(size >= 1, ErrorKind::InvalidArgument, "--size must be positive");
  const fs::path dir = prepare_dir(out_dir);
  // Sorted midpoint grid u_i = (i + 1/2) / size.
  Vector u(size);
  for (int i = 0; i < size; ++i) u(i) = (i + 0.5) / size;
  json averages = json::array();
  for (int id = 1; id <= Graphon::kCount; ++id) {
    const Graphon g(id);
    const Matrix p = build_prob_matrix(g, u);
    char name[32];
    std::snprintf(name, sizeof name, "graphon_%02d.csv", id);
    write_matrix_csv((dir / name).string(), p);
    averages.push_back({{"id", id}, {"formula", g.description()}, {"file", name}, {"average", p.mean()}});
  }
  json result = {{"command", "graphon-table"}, {"size", size}, {"graphons", averages}};
  write_json(dir / "averages.json", result);
  out << result.dump() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graphon estimation with transfer learning across networks", "gtrans"};
  app.require_subcommand(1);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Target-only estimate (NS or USVT)");
  estimate->add_option("--edges", est.edges, "Edge list of the graph");
  estimate->add_option("--matrix", est.matrix, "Dense symmetric CSV matrix (NS only)");
  estimate->add_option("--nodes", est.nodes, "Node count (default: max id + 1)");
  estimate->add_option("--method", est.method)->check(CLI::IsMember({"ns", "usvt"}));
  estimate->add_option("--quantile-constant", est.quantile_constant)->check(CLI::PositiveNumber);
  estimate->add_option("--eta", est.eta, "USVT threshold slack")->check(CLI::NonNegativeNumber);
  estimate->add_option("--truth", est.truth, "CSV probability matrix to score against");
  estimate->add_option("--out-dir", est.out_dir)->required();

  TransferArgs tr;
  auto* transfer = app.add_subcommand("transfer", "Transfer a source graph into a target estimate");
  transfer->add_option("--source-edges", tr.source_edges)->required();
  transfer->add_option("--target-edges", tr.target_edges)->required();
  transfer->add_option("--source-nodes", tr.source_nodes);
  transfer->add_option("--target-nodes", tr.target_nodes);
  transfer->add_option("--solver", tr.solver)->check(CLI::IsMember({"gw", "egw"}));
  transfer->add_option("--epsilon", tr.epsilon)->check(CLI::PositiveNumber);
  transfer->add_option("--delta", tr.delta, "Debias threshold (default 0.15 gw, 0.18 egw)");
  transfer->add_option("--quantile-constant", tr.quantile_constant)->check(CLI::PositiveNumber);
  transfer->add_option("--truth", tr.truth, "CSV probability matrix to score against");
  transfer->add_option("--seed", tr.seed, "Recorded only; the pipeline is deterministic");
  transfer->add_flag("--no-clamp-final", tr.no_clamp_final);
  transfer->add_option("--out-dir", tr.out_dir)->required();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation scenario");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON (schema 1)")->required();
  simulate->add_option("--reps", sim.reps)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed);
  simulate->add_option("--workers", sim.workers)->check(CLI::NonNegativeNumber);
  simulate->add_option("--out-dir", sim.out_dir)->required();

  LinkPredArgs lp;
  auto* linkpred = app.add_subcommand("linkpred", "Link-prediction AUC on a masked target");
  linkpred->add_option("--source-edges", lp.source_edges)->required();
  linkpred->add_option("--target-edges", lp.target_edges)->required();
  linkpred->add_option("--source-nodes", lp.source_nodes);
  linkpred->add_option("--target-nodes", lp.target_nodes);
  linkpred->add_option("--p", lp.p, "Held-out ratio")->check(CLI::Range(0.0, 1.0));
  linkpred->add_option("--seeds", lp.seeds, "Number of random masks")->check(CLI::PositiveNumber);
  linkpred->add_option("--seed", lp.seed)->required();
  linkpred->add_option("--methods", lp.methods)->delimiter(',');
  linkpred->add_option("--quantile-constant", lp.quantile_constant)->check(CLI::PositiveNumber);
  linkpred->add_option("--workers", lp.workers)->check(CLI::NonNegativeNumber);
  linkpred->add_option("--out-dir", lp.out_dir)->required();

  CvArgs cva;
  auto* cv = app.add_subcommand("cv", "Cross-validate the debias threshold");
  cv->add_option("--source-edges", cva.source_edges)->required();
  cv->add_option("--target-edges", cva.target_edges)->required();
  cv->add_option("--source-nodes", cva.source_nodes);
  cv->add_option("--target-nodes", cva.target_nodes);
  cv->add_option("--solver", cva.solver)->check(CLI::IsMember({"gw", "egw"}));
  cv->add_option("--epsilon", cva.epsilon)->check(CLI::PositiveNumber);
  cv->add_option("--folds", cva.folds)->check(CLI::Range(2, 1000000));
  cv->add_option("--candidates", cva.candidates)->delimiter(',');
  cv->add_option("--completion-rank", cva.completion_rank)->check(CLI::PositiveNumber);
  cv->add_option("--seed", cva.seed)->required();
  cv->add_option("--out-dir", cva.out_dir)->required();

  std::string table_dir;
  int table_size = 500;
  auto* table = app.add_subcommand("graphon-table", "Write the ten benchmark graphons on a sorted grid");
  table->add_option("--out", table_dir)->required();
  table->add_option("--size", table_size)->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    if (estimate->parsed()) return cmd_estimate(est, args, out);
    if (transfer->parsed()) return cmd_transfer(tr, args, out);
    if (simulate->parsed()) return cmd_simulate(sim, args, out);
    if (linkpred->parsed()) return cmd_linkpred(lp, args, out);
    if (cv->parsed()) return cmd_cv(cva, args, out);
    if (table->parsed()) return cmd_graphon_table(table_dir, table_size, out);
    print_error(err, "usage", "no command given", kExitUsage);
    return kExitUsage;
  } catch (const ConvergenceError& e) {
    json j = {{"error", to_string(e.kind())}, {"message", e.what()},
              {"residual", e.residual()}, {"exit_code", kExitConvergence}};
    err << j.dump() << '\n';
    return kExitConvergence;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    print_error(err, to_string(e.kind()), e.what(), code);
    return code;
  } catch (const json::exception& e) {
    print_error(err, "input", e.what(), kExitInput);
    return kExitInput;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what(), kExitInternal);
    return kExitInternal;
  }
}

}  // namespace gtrans
