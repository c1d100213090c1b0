#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gtrans/graphon.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace gtrans;

TEST_CASE("graphon formulas at hand-computed points") {
  CHECK(Graphon(1)(0.0, 0.0) == doctest::Approx(1.0));
  CHECK(Graphon(1)(1.0, 1.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(Graphon(2)(0.3, 1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(Graphon(3)(0.25, 1.0) == doctest::Approx(std::exp(-0.5 * (0.25 + 0.5 + 1.0))));
  CHECK(Graphon(4)(0.0, 0.0) == doctest::Approx(0.5));
  CHECK(Graphon(5)(0.2, 0.9) == doctest::Approx(0.7));
  CHECK(Graphon(6)(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(Graphon(6)(0.4, 0.5) == doctest::Approx(0.1));
  CHECK(Graphon(7)(1.0, 0.0) == doctest::Approx(std::cos(1.0) / 3.0 + 0.15));
  CHECK(Graphon(8)(0.5, 0.5) == doctest::Approx(std::cos(1.0) / 3.0 + 0.15));
  CHECK(Graphon(9)(0.05, 0.0) == doctest::Approx(std::sin(10.0 * std::numbers::pi * -4.95) / 5.0 + 0.5));
  const double a = std::exp(std::sin(6.0 / (0.25 + 0.25)));
  CHECK(Graphon(10)(0.5, 0.5) == doctest::Approx(0.25 * a));
}

TEST_CASE("singular points stay finite and inside [0,1]") {
  for (int id = 1; id <= Graphon::kCount; ++id) {
    const Graphon g(id);
    for (double x : {0.0, 1e-9, 0.5, 1.0 - 1e-9, 1.0}) {
      for (double y : {0.0, 1e-9, 0.5, 1.0}) {
        const double v = g(x, y);
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v == g(y, x));
      }
    }
  }
}

TEST_CASE("unknown graphon ids are rejected") {
  CHECK_THROWS_AS(Graphon(0), Error);
  CHECK_THROWS_AS(Graphon(11), Error);
  try {
    Graphon g(42);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownGraphon);
  }
}

TEST_CASE("average connectivity matches numerical integration") {
  // Graphon 6: exactly 1/8. Graphon 2: E exp(-M^0.75), M = max(U,V) with density 2m.
  CHECK(average_connectivity(Graphon(6)) == doctest::Approx(0.125).epsilon(1e-5));
  const double g2 = oracle::simpson([](double m) { return 2.0 * m * std::exp(-std::pow(m, 0.75)); }, 0.0, 1.0);
  CHECK(average_connectivity(Graphon(2)) == doctest::Approx(g2).epsilon(1e-4));
  CHECK(std::abs(g2 - 0.5) < 0.02);
  CHECK(std::abs(average_connectivity(Graphon(6)) - 0.125) < 0.02);
  const double g1 = oracle::simpson2([](double x, double y) { return Graphon(1)(x, y); }, 200);
  CHECK(average_connectivity(Graphon(1)) == doctest::Approx(g1).epsilon(1e-4));
}

TEST_CASE("latents and probability matrices") {
  Rng rng(3);
  CHECK_THROWS_AS(sample_latents(0, false, rng), Error);
  const Vector u = sample_latents(200, true, rng);
  for (Index i = 1; i < u.size(); ++i) CHECK(u(i - 1) <= u(i));
  CHECK(u.minCoeff() >= 0.0);
  CHECK(u.maxCoeff() < 1.0);
  const Matrix p = build_prob_matrix(Graphon(6), u);
  CHECK(is_symmetric(p));
  CHECK(p(3, 3) == doctest::Approx(u(3) * u(3) / 2));  // diagonal populated
}

TEST_CASE("adjacency sampling is symmetric, hollow and binary") {
  Rng rng(11);
  const Matrix p = build_prob_matrix(Graphon(1), sample_latents(80, false, rng));
  const AdjMatrix a = sample_adjacency(p, rng);
  const Matrix& m = a.matrix();
  CHECK(is_symmetric(m, 0.0));
  CHECK(m.diagonal().isZero());
  CHECK(((m.array() == 0.0) || (m.array() == 1.0)).all());
  CHECK(a.edge_count() == static_cast<Index>(m.sum() / 2));
}

TEST_CASE("adjacency density tracks the probability matrix") {
  Rng rng(5);
  const Matrix p = Matrix::Constant(300, 300, 0.3);
  const AdjMatrix a = sample_adjacency(p, rng);
  const double density = static_cast<double>(a.edge_count()) / (300.0 * 299.0 / 2.0);
  CHECK(std::abs(density - 0.3) < 0.01);
}

TEST_CASE("AdjMatrix validation") {
  Matrix bad = Matrix::Zero(3, 3);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(AdjMatrix{bad}, Error);
  bad(1, 0) = 1.0;
  CHECK_NOTHROW(AdjMatrix{bad});
  bad(2, 2) = 1.0;
  CHECK_THROWS_AS(AdjMatrix{bad}, Error);
  Matrix half = Matrix::Zero(2, 2);
  half(0, 1) = half(1, 0) = 0.5;
  CHECK_THROWS_AS(AdjMatrix{half}, Error);
  AdjMatrix a(4);
  CHECK_THROWS_AS(a.set_edge(2, 2, true), Error);
}

TEST_CASE("perturbation: identity, clamping and spec validation") {
  Rng rng(1);
  const Matrix p = build_prob_matrix(Graphon(2), sample_latents(40, false, rng));
  CHECK(perturb(p, PerturbationSpec::density_shift(0.0), rng) == p);
  CHECK(perturb(p, PerturbationSpec::uniform_noise(0.0, 0.0), rng) == p);
  CHECK_THROWS_AS(PerturbationSpec::density_shift(1.5), Error);

  const Matrix up = perturb(p, PerturbationSpec::density_shift(0.5), rng);
  CHECK(is_symmetric(up, 0.0));
  CHECK(up.maxCoeff() <= 1.0);
  CHECK((up.array() >= p.array()).all());
  const Matrix down = perturb(p, PerturbationSpec::density_shift(-0.5), rng);
  CHECK(down.minCoeff() >= 0.0);
  CHECK((down.array() <= p.array()).all());
}

TEST_CASE("density shift on graphon 6 adds exactly lambda/2 on average") {
  // xy/2 + xi <= 0.5 + 0.5, so lambda = 0.5 never clamps: the expected
  // increase is E[xi] = 0.25.
  const double lambda = 0.5;
  const Graphon g(6);
  const double expected = oracle::simpson2([&](double x, double y) {
    return oracle::simpson([&](double xi) { return std::min(1.0, g(x, y) + xi) / lambda; }, 0.0, lambda, 40) -
           g(x, y);
  }, 60);
  CHECK(expected == doctest::Approx(0.25).epsilon(1e-6));

  Rng rng(17);
  double total = 0.0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    const Matrix p = build_prob_matrix(g, sample_latents(50, false, rng));
    total += (perturb(p, PerturbationSpec::density_shift(lambda), rng) - p).mean();
  }
  CHECK(std::abs(total / reps - expected) < 0.01);
}

TEST_CASE("density shift on graphon 2 loses mass to clamping") {
  const double lambda = 0.5;
  const Graphon g(2);
  const double expected = oracle::simpson2([&](double x, double y) {
    return oracle::simpson([&](double xi) { return std::min(1.0, g(x, y) + xi) / lambda; }, 0.0, lambda, 40) -
           g(x, y);
  }, 60);
  CHECK(expected < 0.25);

  Rng rng(23);
  double total = 0.0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    const Matrix p = build_prob_matrix(g, sample_latents(100, false, rng));
    total += (perturb(p, PerturbationSpec::density_shift(lambda), rng) - p).mean();
  }
  CHECK(std::abs(total / reps - expected) < 0.01);
}

TEST_CASE("rng streams are reproducible and split independently") {
  Rng a(99), b(99);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  const Rng root(7);
  Rng s1 = root.split(1), s1b = root.split(1), s2 = root.split(2);
  const auto x = s1();
  CHECK(x == s1b());
  CHECK(x != s2());
  Rng c(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(c.below(7) < 7);
  }
}
