// Acceptance run: one PASS/FAIL line per criterion, measured values alongside.
// Exit status is 0 once every criterion has been evaluated; --strict makes any
// FAIL fatal.

#include "gtrans/eval.hpp"
#include "gtrans/io.hpp"
#include "gtrans/network_simplex.hpp"
#include "gtrans/ot.hpp"
#include "gtrans/simulate.hpp"
#include "gtrans/smoothing.hpp"
#include "gtrans/transfer.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

using namespace gtrans;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double marginal_error(const Matrix& pi, const Marginals& m) {
  return std::max((pi.rowwise().sum() - m.mu).cwiseAbs().maxCoeff(),
                  (pi.colwise().sum().transpose() - m.nu).cwiseAbs().maxCoeff());
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double below = 0, equal = 0;
    for (double x : v) {
      below += x < v[i];
      equal += x == v[i];
    }
    r[i] = below + (equal + 1) / 2;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  Eigen::Map<const Vector> a(rx.data(), rx.size()), b(ry.data(), ry.size());
  const Vector ca = a.array() - a.mean(), cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

Outcome solver_correctness() {
  Rng rng(101);
  double grad_err = 0, ot_err = 0, sk_err = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 1 + rng.below(4), n = 1 + rng.below(4);
    const Matrix c = oracle::random_symmetric(m, rng), d = oracle::random_symmetric(n, rng);
    Matrix pi(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) pi(i, j) = rng.uniform();
    pi /= pi.sum();
    grad_err = std::max(grad_err, (gw_gradient(c, d, pi) - oracle::gw_gradient(c, d, pi)).cwiseAbs().maxCoeff());

    Matrix cost(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) cost(i, j) = rng.uniform(-1, 1);
    const Marginals marg{oracle::random_simplex(m, rng), oracle::random_simplex(n, rng)};
    const Matrix plan = exact_linear_ot(cost, marg);
    const double got = (cost.array() * plan.array()).sum();
    const double best = oracle::transport_vertex_min(cost, marg.mu, marg.nu);
    ot_err = std::max({ot_err, std::abs(got - best), marginal_error(plan, marg)});

    sk_err = std::max(sk_err, marginal_error(sinkhorn(cost.cwiseAbs(), marg, 0.01), marg));
  }
  return {grad_err <= 1e-12 && ot_err <= 1e-12 && sk_err <= 1e-9,
          "max |grad err| " + fmt("%.2e", grad_err) + ", max ot err " + fmt("%.2e", ot_err) +
              ", max sinkhorn marginal err " + fmt("%.2e", sk_err)};
}

Outcome gw_self_distance() {
  Rng rng(102);
  double worst_exact = 0, worst_entropic = 0;
  for (int k = 1; k <= 10; ++k) {
    const Index n = 3 * k;
    Matrix c = oracle::random_symmetric(n, rng);
    c.diagonal().setZero();
    const Marginals m = Marginals::uniform(n, n);
    worst_exact = std::max(worst_exact, solve_gw(c, c, m).objective);
    worst_entropic = std::max(worst_entropic, solve_egw(c, c, m, GwSolverOptions::entropic(0.01)).objective);
  }
  return {worst_exact <= 1e-8 && worst_entropic <= 0.02,
          "max exact objective " + fmt("%.2e", worst_exact) + ", max entropic quadratic part " +
              fmt("%.2e", worst_entropic)};
}

Outcome projection_bound() {
  int ok = 0, total = 0;
  double worst_ratio = 0;
  for (int id : {1, 6, 8}) {
    for (int seed = 0; seed < 10; ++seed) {
      Rng rng(1030 + 100 * id + seed);
      const Matrix ps = build_prob_matrix(Graphon(id), sample_latents(200, false, rng));
      const Matrix pt = build_prob_matrix(Graphon(id), sample_latents(50, false, rng));
      const Coupling cp = solve_gw(ps, pt, Marginals::uniform(200, 50));
      const double lhs = (project_source(column_normalize(cp.plan), ps) - pt).squaredNorm() / (50.0 * 50.0);
      ok += lhs <= cp.objective * 1.10;
      ++total;
      if (cp.objective > 0) worst_ratio = std::max(worst_ratio, lhs / cp.objective);
    }
  }
  return {ok == total,
          std::to_string(ok) + "/" + std::to_string(total) + " runs, max lhs/objective " + fmt("%.3f", worst_ratio)};
}

Outcome sandwich() {
  int ok = 0;
  double tightest = 1e300;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(1040 + seed);
    const Matrix ps = build_prob_matrix(Graphon(6), sample_latents(300, false, rng));
    const Matrix pt = build_prob_matrix(Graphon(6), sample_latents(60, false, rng));
    const Matrix hs = ns_estimate(sample_adjacency(ps, rng));
    const Matrix ht = ns_estimate(sample_adjacency(pt, rng));
    const Marginals m = Marginals::uniform(300, 60);
    const double gw_true = solve_gw(ps, pt, m).objective;
    const double gw_hat = solve_gw(hs, ht, m).objective;
    const double delta_n = mse(hs, ps) + mse(ht, pt);
    const bool upper = gw_true <= 4 * (gw_hat + delta_n);
    const bool lower = gw_hat <= 4 * (gw_true + delta_n);
    ok += upper && lower;
    tightest = std::min({tightest, 4 * (gw_hat + delta_n) - gw_true, 4 * (gw_true + delta_n) - gw_hat});
  }
  return {ok == 10, std::to_string(ok) + "/10 seeds, smallest slack " + fmt("%.3e", tightest)};
}

Scenario cross(int from, int to, int reps, std::uint64_t seed) {
  Scenario s;
  s.name = std::to_string(from) + "->" + std::to_string(to);
  s.kind = Scenario::Kind::CrossGraphon;
  s.source_graphon = from;
  s.target_graphon = to;
  s.source_sizes = {500};
  s.target_size = 50;
  s.reps = reps;
  s.methods = {Method::GtransGw, Method::Ns};
  s.seed = seed;
  return s;
}

struct Row {
  double gtrans, ns;
  double mean_d = 0, debias_rate = 0;
};

Row run_row(int from, int to, std::uint64_t seed) {
  const ScenarioResult r = run_scenario(cross(from, to, 50, seed));
  Row row{r.find(0, Method::GtransGw).mean, r.find(0, Method::Ns).mean};
  int count = 0;
  for (const ResultRow& x : r.rows) {
    if (x.method != Method::GtransGw) continue;
    row.mean_d += x.d;
    row.debias_rate += x.debiased;
    ++count;
  }
  row.mean_d /= count;
  row.debias_rate /= count;
  return row;
}

std::string gate(const Row& row) {
  return " [mean d " + fmt("%.4f", row.mean_d) + ", debiased " + fmt("%.0f%%", 100 * row.debias_rate) + "]";
}

Outcome table_rows(std::vector<Row>& rows) {
  const int pairs[4][2] = {{7, 6}, {7, 8}, {10, 5}, {8, 9}};
  const double reported[4] = {0.9e-3, 1.6e-3, 1.6e-3, 1.9e-3};
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 4; ++k) {
    const Row row = run_row(pairs[k][0], pairs[k][1], 105 + k);
    rows.push_back(row);
    const double rel = row.gtrans / reported[k];
    const bool within = std::abs(rel - 1.0) <= 0.5;
    const bool similar_ok = k == 3 || row.gtrans <= row.ns;
    pass = pass && within && similar_ok;
    detail += (k ? "; " : "") + std::to_string(pairs[k][0]) + "->" + std::to_string(pairs[k][1]) +
              " gtrans " + fmt("%.4g", row.gtrans) + " (x" + fmt("%.2f", rel) + " of reported) ns " +
              fmt("%.4g", row.ns) + gate(row);
  }
  return {pass, detail};
}

Outcome source_size_trend() {
  Scenario s;
  s.name = "sweep";
  s.source_sizes = {100, 300, 500, 1000};
  s.target_size = 50;
  s.reps = 20;
  s.methods = {Method::GtransGw, Method::Ns};
  s.seed = 106;
  const ScenarioResult r = run_scenario(s);
  std::vector<double> sizes, gt, ns;
  for (int c = 0; c < 4; ++c) {
    sizes.push_back(static_cast<double>(s.source_sizes[c]));
    gt.push_back(r.find(c, Method::GtransGw).mean);
    ns.push_back(r.find(c, Method::Ns).mean);
  }
  const double rho = spearman(sizes, gt);
  const double ns_spread = (*std::max_element(ns.begin(), ns.end()) - *std::min_element(ns.begin(), ns.end())) /
                           *std::min_element(ns.begin(), ns.end());
  std::string detail = "spearman " + fmt("%.3f", rho) + ", ns spread " + fmt("%.1f%%", 100 * ns_spread) +
                       ", gtrans means";
  for (double g : gt) detail += " " + fmt("%.4g", g);
  return {rho <= -0.8 && ns_spread < 0.10, detail};
}

Outcome density_shift() {
  Scenario s;
  s.name = "shift";
  s.kind = Scenario::Kind::DensityShift;
  s.source_graphon = s.target_graphon = 2;
  s.source_sizes = {500};
  s.target_size = 50;
  s.reps = 20;
  s.lambdas = {-0.4, -0.2, 0.0, 0.2, 0.4};
  s.methods = {Method::GtransGw};
  s.seed = 107;
  const ScenarioResult r = run_scenario(s);
  std::vector<double> means;
  for (int c = 0; c < 5; ++c) means.push_back(r.find(c, Method::GtransGw).mean);
  const bool pass = std::min_element(means.begin(), means.end()) - means.begin() == 2;
  std::string detail = "means by lambda";
  for (double m : means) detail += " " + fmt("%.4g", m);
  return {pass, detail};
}

Outcome no_negative_transfer(const Row& eight_nine) {
  const Row nine_eight = run_row(9, 8, 108);
  const double r89 = eight_nine.gtrans / eight_nine.ns, r98 = nine_eight.gtrans / nine_eight.ns;
  return {r89 <= 1.15 && r98 <= 1.15, "gtrans/ns 8->9 " + fmt("%.3f", r89) + gate(eight_nine) + ", 9->8 " +
                                           fmt("%.3f", r98) + gate(nine_eight)};
}

Outcome link_prediction(const std::string& data_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(data_dir);
  std::string missing;
  for (const char* f : {"wiki-vote.txt", "karate.txt", "dolphins.txt"})
    if (!fs::exists(dir / f)) missing += std::string(missing.empty() ? "" : ", ") + f;
  if (!missing.empty()) return {false, "dataset(s) not available in " + data_dir + ": " + missing};

  const AdjMatrix source = load_edge_list((dir / "wiki-vote.txt").string()).adjacency;
  const struct {
    const char* file;
    double mean, sd;
  } targets[2] = {{"karate.txt", 0.8247, 0.1036}, {"dolphins.txt", 0.7596, 0.0853}};
  bool pass = true;
  std::string detail;
  for (const auto& t : targets) {
    const AdjMatrix target = load_edge_list((dir / t.file).string()).adjacency;
    const LinkPredictionRun run =
        run_link_prediction(source, target, 0.1, 50, 109, {Method::GtransGw, Method::Ns}, MethodSettings{});
    const bool ok = std::abs(run.mean[0] - t.mean) <= t.sd && run.mean[0] >= run.mean[1] - 0.02;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : "; ") + t.file + " gtrans " + fmt("%.4f", run.mean[0]) + " ns " +
              fmt("%.4f", run.mean[1]);
  }
  return {pass, detail};
}

Outcome cv_sanity() {
  int inside = 0;
  std::string picks;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(1100 + seed);
    const AdjMatrix as = sample_adjacency(build_prob_matrix(Graphon(6), sample_latents(300, false, rng)), rng);
    const AdjMatrix at = sample_adjacency(build_prob_matrix(Graphon(6), sample_latents(50, false, rng)), rng);
    const CvResult r = cv_select_delta(as, at, CvConfig{}, TransferConfig::exact_gw(), rng);
    inside += r.delta_hat >= 0.12 - 1e-12 && r.delta_hat <= 0.20 + 1e-12;
    double d_mean = 0;
    for (double d : r.fold_distance) d_mean += d / r.fold_distance.size();
    picks += " " + fmt("%.2f", r.delta_hat) + "(d~" + fmt("%.3f", d_mean) + ")";
  }
  return {inside >= 6, std::to_string(inside) + "/10 in [0.12, 0.20]; picks" + picks};
}

Outcome ablation() {
  Scenario s;
  s.name = "ablation";
  s.kind = Scenario::Kind::Ablation;
  s.source_sizes = {500};
  s.target_size = 50;
  s.reps = 20;
  s.methods = {Method::GtransGw, Method::NonDebias, Method::NonSmooth, Method::Adj};
  s.seed = 111;
  const ScenarioResult r = run_scenario(s);
  const double full = r.find(0, Method::GtransGw).mean;
  bool pass = true;
  std::string detail = "full " + fmt("%.4g", full);
  for (Method m : {Method::NonDebias, Method::NonSmooth, Method::Adj}) {
    const double v = r.find(0, m).mean;
    pass = pass && full <= v;
    detail += std::string(", ") + to_string(m) + " " + fmt("%.4g", v);
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string data_dir = "data";
  bool strict = false;
  app.add_option("--data-dir", data_dir, "Directory with karate.txt, dolphins.txt, wiki-vote.txt");
  app.add_flag("--strict", strict, "Exit 1 when any criterion fails");
  CLI11_PARSE(app, argc, argv);

  std::vector<Row> table;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"solver correctness", solver_correctness},
      {"GW self-distance", gw_self_distance},
      {"projection error bounded by GW objective", projection_bound},
      {"estimated/true GW sandwich", sandwich},
      {"cross-graphon table rows", [&] { return table_rows(table); }},
      {"source-size trend", source_size_trend},
      {"density-shift minimum at lambda 0", density_shift},
      {"no negative transfer", [&] { return no_negative_transfer(table.at(3)); }},
      {"link prediction", [&] { return link_prediction(data_dir); }},
      {"CV threshold selection", cv_sanity},
      {"ablation ordering", ablation},
  };

  int passed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    passed += o.pass;
    std::printf("criterion %2zu: %s  %s | %s (%.1fs)\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%zu passed\n", passed, criteria.size());
  return strict && passed != static_cast<int>(criteria.size()) ? 1 : 0;
}
