#include "gtrans/graphon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gtrans {

namespace {

constexpr double kDenominatorFloor = 1e-12;

double floored(double d) { return std::max(d, kDenominatorFloor); }

double raw_value(int id, double x, double y) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  switch (id) {
    case 1:
      return std::exp(-std::pow(x, 0.7) - std::pow(y, 0.7));
    case 2:
      return std::exp(-std::pow(hi, 0.75));
    case 3:
      return std::exp(-0.5 * (lo + std::sqrt(x) + std::sqrt(y)));
    case 4:
      return 1.0 / (1.0 + std::exp(-(hi * hi + lo * lo * lo * lo)));
    case 5:
      return std::abs(x - y);
    case 6:
      return x * y / 2.0;
    case 7: {
      const double r = x * x + y * y;
      return r / 3.0 * std::cos(1.0 / floored(r)) + 0.15;
    }
    case 8: {
      const double s = x + y;
      return s / 3.0 * std::cos(1.0 / floored(s)) + 0.15;
    }
    case 9:
      return std::sin(10.0 * std::numbers::pi * (x + y - 5.0)) / 5.0 + 0.5;
    case 10: {
      const double a = std::exp(std::sin(6.0 / floored((1.0 - x) * (1.0 - x) + y * y)));
      const double b = std::exp(std::sin(6.0 / floored(x * x + (1.0 - y) * (1.0 - y))));
      return 0.25 * std::min(a, b);
    }
    default:
      throw Error(ErrorKind::UnknownGraphon, "unknown graphon id " + std::to_string(id));
  }
}

}  // namespace

Graphon::Graphon(int id) : id_(id) {
  require(id >= 1 && id <= kCount, ErrorKind::UnknownGraphon,
          "unknown graphon id " + std::to_string(id) + " (expected 1..10)");
}

std::string Graphon::description() const {
  static const char* const kFormulas[kCount] = {
      "exp(-x^0.7 - y^0.7)",
      "exp(-max(x,y)^0.75)",
      "exp(-0.5*(min(x,y) + sqrt(x) + sqrt(y)))",
      "1/(1 + exp(-(max(x,y)^2 + min(x,y)^4)))",
      "|x - y|",
      "x*y/2",
      "(x^2 + y^2)/3 * cos(1/(x^2 + y^2)) + 0.15",
      "(x + y)/3 * cos(1/(x + y)) + 0.15",
      "sin(10*pi*(x + y - 5))/5 + 0.5",
      "1/4 * min(exp(sin(6/((1-x)^2 + y^2))), exp(sin(6/(x^2 + (1-y)^2))))",
  };
  return kFormulas[id_ - 1];
}

double Graphon::operator()(double x, double y) const {
  // Canonical argument order keeps f(x, y) == f(y, x) bit-for-bit.
  return std::clamp(raw_value(id_, std::min(x, y), std::max(x, y)), 0.0, 1.0);
}

Vector sample_latents(Index n, bool sorted, Rng& rng) {
  require(n >= 1, ErrorKind::EmptyInput, "sample_latents: n must be >= 1");
  Vector u(n);
  for (Index i = 0; i < n; ++i) u(i) = rng.uniform();
  if (sorted) std::sort(u.begin(), u.end());
  return u;
}

Matrix build_prob_matrix(const Graphon& g, const Vector& u) {
  const Index n = u.size();
  Matrix p(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      const double v = g(u(i), u(j));
      p(i, j) = v;
      p(j, i) = v;
    }
  }
  return p;
}

AdjMatrix::AdjMatrix(Matrix values) : values_(std::move(values)) {
  require(values_.rows() == values_.cols(), ErrorKind::InvalidArgument,
          "adjacency must be square");
  const Index n = values_.rows();
  for (Index j = 0; j < n; ++j) {
    require(values_(j, j) == 0.0, ErrorKind::InvalidArgument, "adjacency diagonal must be 0");
    for (Index i = 0; i < n; ++i) {
      const double v = values_(i, j);
      require(v == 0.0 || v == 1.0, ErrorKind::InvalidArgument, "adjacency must be binary");
      require(v == values_(j, i), ErrorKind::InvalidArgument, "adjacency must be symmetric");
    }
  }
}

void AdjMatrix::set_edge(Index i, Index j, bool present) {
  require(i != j, ErrorKind::InvalidArgument, "self-loops are not allowed");
  values_(i, j) = values_(j, i) = present ? 1.0 : 0.0;
}

Index AdjMatrix::edge_count() const {
  return static_cast<Index>(values_.sum() / 2.0);
}

AdjMatrix sample_adjacency(const Matrix& p, Rng& rng) {
  require(p.rows() == p.cols(), ErrorKind::DimensionMismatch, "probability matrix must be square");
  const Index n = p.rows();
  AdjMatrix a(n);
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      if (rng.bernoulli(p(i, j))) a.set_edge(i, j, true);
    }
  }
  return a;
}

PerturbationSpec PerturbationSpec::uniform_noise(double lo, double hi) {
  require(lo <= hi, ErrorKind::InvalidArgument, "uniform-noise requires lo <= hi");
  PerturbationSpec s;
  s.kind = Kind::UniformNoise;
  s.lo = lo;
  s.hi = hi;
  return s;
}

PerturbationSpec PerturbationSpec::density_shift(double lambda) {
  require(std::abs(lambda) <= 1.0, ErrorKind::InvalidArgument,
          "density shift |lambda| must be <= 1");
  PerturbationSpec s;
  s.kind = Kind::DensityShift;
  s.lambda = lambda;
  return s;
}

bool PerturbationSpec::is_identity() const {
  return kind == Kind::UniformNoise ? (lo == 0.0 && hi == 0.0) : lambda == 0.0;
}

Matrix perturb(const Matrix& p, const PerturbationSpec& spec, Rng& rng) {
  double lo = spec.lo;
  double hi = spec.hi;
  if (spec.kind == PerturbationSpec::Kind::DensityShift) {
    require(std::abs(spec.lambda) <= 1.0, ErrorKind::InvalidArgument,
            "density shift |lambda| must be <= 1");
    lo = std::min(0.0, spec.lambda);
    hi = std::max(0.0, spec.lambda);
  }
  require(lo <= hi, ErrorKind::InvalidArgument, "perturbation requires lo <= hi");
  if (spec.is_identity()) return p;

  const Index n = p.rows();
  Matrix out(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = std::clamp(p(i, j) + rng.uniform(lo, hi), 0.0, 1.0);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

double average_connectivity(const Graphon& g, int m) {
  double sum = 0.0;
  for (int a = 0; a < m; ++a) {
    const double x = (a + 0.5) / m;
    for (int b = 0; b < m; ++b) sum += g(x, (b + 0.5) / m);
  }
  return sum / (static_cast<double>(m) * m);
}

}  // namespace gtrans
