#pragma once

#include "gtrans/common.hpp"
#include "gtrans/rng.hpp"

#include <string>

namespace gtrans {

/// One of the ten closed-form benchmark graphons, identified by 1..10.
class Graphon {
 public:
  static constexpr int kCount = 10;

  /// Throws ErrorKind::UnknownGraphon for ids outside 1..10.
  explicit Graphon(int id);

  int id() const noexcept { return id_; }
  std::string description() const;

  /// Formula value clamped to [0, 1]. Singular denominators (graphons 7, 8
  /// and 10) are floored at 1e-12 before dividing.
  double operator()(double x, double y) const;

 private:
  int id_;
};

inline double eval_graphon(const Graphon& g, double x, double y) { return g(x, y); }

/// n i.i.d. Unif[0,1] latent positions, optionally sorted ascending.
Vector sample_latents(Index n, bool sorted, Rng& rng);

/// P_ij = f(u_i, u_j), diagonal included.
Matrix build_prob_matrix(const Graphon& g, const Vector& u);

/// Symmetric, hollow, binary adjacency with A_ij ~ Ber(P_ij) for i < j.
class AdjMatrix {
 public:
  AdjMatrix() = default;
  explicit AdjMatrix(Index n) : values_(Matrix::Zero(n, n)) {}
  /// Validates binary/symmetric/hollow; throws ErrorKind::InvalidArgument.
  explicit AdjMatrix(Matrix values);

  Index size() const noexcept { return values_.rows(); }
  const Matrix& matrix() const noexcept { return values_; }
  bool edge(Index i, Index j) const { return values_(i, j) != 0.0; }
  void set_edge(Index i, Index j, bool present);
  Index edge_count() const;

 private:
  Matrix values_;
};

AdjMatrix sample_adjacency(const Matrix& p, Rng& rng);

struct PerturbationSpec {
  enum class Kind { UniformNoise, DensityShift };

  Kind kind = Kind::UniformNoise;
  double lo = 0.0;      // uniform-noise bounds
  double hi = 0.0;
  double lambda = 0.0;  // density-shift: xi ~ U(0, lambda) or U(lambda, 0)

  static PerturbationSpec uniform_noise(double lo, double hi);
  static PerturbationSpec density_shift(double lambda);
  bool is_identity() const;
};

/// Adds one independent draw per entry i <= j (mirrored) and clamps to [0, 1].
Matrix perturb(const Matrix& p, const PerturbationSpec& spec, Rng& rng);

/// Mean of f over a uniform midpoint grid of size m x m.
double average_connectivity(const Graphon& g, int m = 1000);

}  // namespace gtrans
