#include "gtrans/eval.hpp"

#include "gtrans/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gtrans {

Index MaskMatrix::held_out_pairs() const {
  Index count = 0;
  for (Index j = 1; j < m.cols(); ++j) {
    for (Index i = 0; i < j; ++i) count += m(i, j) == 0.0;
  }
  return count;
}

Index MaskMatrix::observed_pairs() const {
  const Index n = size();
  return n * (n - 1) / 2 - held_out_pairs();
}

MaskedGraph mask_edges(const AdjMatrix& a, double p, Rng& rng) {
  require(p > 0.0 && p < 1.0, ErrorKind::InvalidArgument, "test ratio p must lie in (0, 1)");
  const Index n = a.size();
  MaskMatrix mask{Matrix::Ones(n, n), p};
  AdjMatrix masked = a;
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      if (!rng.bernoulli(1.0 - p)) {
        mask.m(i, j) = mask.m(j, i) = 0.0;
        masked.set_edge(i, j, false);
      }
    }
  }
  return {std::move(masked), std::move(mask)};
}

MaskMatrix mask_from_pairs(Index n, const std::vector<std::pair<Index, Index>>& held_out) {
  MaskMatrix mask{Matrix::Ones(n, n), 0.0};
  for (const auto& [i, j] : held_out) {
    require(i != j && i < n && j < n, ErrorKind::InvalidArgument, "invalid held-out pair");
    mask.m(i, j) = mask.m(j, i) = 0.0;
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  mask.p = pairs > 0 ? static_cast<double>(mask.held_out_pairs()) / pairs : 0.0;
  return mask;
}

namespace {

struct Scored {
  double score;
  bool positive;
};

std::vector<Scored> held_out_scores(const Matrix& p_hat, const AdjMatrix& a_true,
                                    const MaskMatrix& mask) {
  require_same_shape(p_hat, a_true.matrix(), "link_auc");
  require_same_shape(mask.m, a_true.matrix(), "link_auc mask");
  std::vector<Scored> out;
  const Index n = a_true.size();
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      if (mask.held_out(i, j)) out.push_back({p_hat(i, j), a_true.edge(i, j)});
    }
  }
  const auto positives = std::count_if(out.begin(), out.end(), [](const Scored& s) { return s.positive; });
  require(positives > 0 && positives < static_cast<std::ptrdiff_t>(out.size()),
          ErrorKind::UndefinedAuc,
          "AUC needs at least one held-out edge and one held-out non-edge");
  return out;
}

}  // namespace

double link_auc(const Matrix& p_hat, const AdjMatrix& a_true, const MaskMatrix& mask) {
  std::vector<Scored> s = held_out_scores(p_hat, a_true, mask);
  std::sort(s.begin(), s.end(), [](const Scored& a, const Scored& b) { return a.score < b.score; });

  // Mann-Whitney with midranks.
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j].score == s[i].score) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (s[k].positive) {
        positive_rank_sum += midrank;
        positives += 1.0;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(s.size()) - positives;
  return (positive_rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

std::vector<RocPoint> roc_curve(const Matrix& p_hat, const AdjMatrix& a_true,
                                const MaskMatrix& mask) {
  std::vector<Scored> s = held_out_scores(p_hat, a_true, mask);
  std::sort(s.begin(), s.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });
  double total_pos = 0.0;
  for (const auto& x : s) total_pos += x.positive;
  const double total_neg = static_cast<double>(s.size()) - total_pos;

  std::vector<RocPoint> roc;
  double tp = 0.0;
  double fp = 0.0;
  std::size_t i = 0;
  // t = largest score: nothing is strictly above it.
  roc.push_back({s.front().score, 0.0, 0.0});
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j].score == s[i].score) {
      (s[j].positive ? tp : fp) += 1.0;
      ++j;
    }
    const double next = j < s.size() ? s[j].score : -std::numeric_limits<double>::infinity();
    roc.push_back({next, fp / total_neg, tp / total_pos});
    i = j;
  }
  return roc;
}

double trapezoid_auc(const std::vector<RocPoint>& roc) {
  double area = 0.0;
  for (std::size_t k = 1; k < roc.size(); ++k) {
    area += (roc[k].fpr - roc[k - 1].fpr) * 0.5 * (roc[k].tpr + roc[k - 1].tpr);
  }
  return area;
}

Matrix matrix_complete(const Matrix& a_masked, const MaskMatrix& mask, std::optional<Index> rank) {
  require_same_shape(a_masked, mask.m, "matrix_complete");
  const Index n = a_masked.rows();
  require(n >= 2, ErrorKind::TooFewNodes, "matrix completion needs at least 2 nodes");
  if (rank) {
    require(*rank >= 1 && *rank < n, ErrorKind::InvalidArgument,
            "completion rank must lie in [1, n)");
  }
  const double off_diagonal = static_cast<double>(n) * static_cast<double>(n - 1);
  const double observed = (mask.m.sum() - mask.m.diagonal().sum()) / off_diagonal;
  require(observed > 0.0, ErrorKind::InvalidArgument, "no observed entries to complete from");

  const Matrix scaled = a_masked.cwiseProduct(mask.m) / observed;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(scaled);
  const Vector& values = eig.eigenvalues();

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(values(a)) > std::abs(values(b));
  });

  Index r;
  if (rank) {
    r = *rank;
  } else {
    const Index top = std::min<Index>(10, n);
    r = 1;
    double best_gap = -1.0;
    for (Index k = 0; k + 1 < top; ++k) {
      const double gap = std::abs(values(order[k])) - std::abs(values(order[k + 1]));
      if (gap > best_gap) {
        best_gap = gap;
        r = k + 1;
      }
    }
  }

  Matrix completed = Matrix::Zero(n, n);
  for (Index k = 0; k < r; ++k) {
    const Index idx = order[k];
    const Vector v = eig.eigenvectors().col(idx);
    completed.noalias() += values(idx) * v * v.transpose();
  }
  completed = 0.5 * (completed + completed.transpose());
  clamp_inplace(completed, 0.0, 1.0);
  return completed;
}

std::vector<double> CvConfig::default_candidates() {
  std::vector<double> c;
  for (int k = 10; k <= 50; ++k) c.push_back(k / 100.0);
  return c;
}

CvResult cv_select_delta(const AdjMatrix& a_s, const AdjMatrix& a_t, const CvConfig& cv,
                         const TransferConfig& base, Rng& rng) {
  require(!cv.candidates.empty(), ErrorKind::InvalidArgument, "CV needs at least one candidate");
  require(cv.folds >= 2, ErrorKind::InvalidArgument, "CV needs at least 2 folds");
  const Index n = a_t.size();
  std::vector<std::pair<Index, Index>> pairs;
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) pairs.emplace_back(i, j);
  }
  require(static_cast<std::size_t>(cv.folds) <= pairs.size(), ErrorKind::InvalidArgument,
          "more folds than target index pairs");
  rng.shuffle(pairs.begin(), pairs.end());

  CvResult out;
  out.candidates = cv.candidates;
  const std::size_t num_candidates = cv.candidates.size();
  out.fold_loss.assign(cv.folds, {});
  out.fold_distance.assign(cv.folds, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> total(num_candidates, 0.0);

  TransferConfig cfg = base;
  cfg.delta = std::numeric_limits<double>::infinity();
  const Matrix p_s_ini = ns_estimate(a_s, cfg.smoother);

  for (int k = 0; k < cv.folds; ++k) {
    std::vector<std::pair<Index, Index>> held;
    for (std::size_t idx = static_cast<std::size_t>(k); idx < pairs.size();
         idx += static_cast<std::size_t>(cv.folds)) {
      held.push_back(pairs[idx]);
    }
    try {
      const MaskMatrix mask = mask_from_pairs(n, held);
      const Matrix masked = a_t.matrix().cwiseProduct(mask.m);
      const Matrix completed = matrix_complete(masked, mask, cv.completion_rank);
      const TransferResult r =
          transfer_from_initial(p_s_ini, ns_estimate(completed, cfg.smoother), cfg);
      const DebiasResult db = debias(r.p_t_ini, r.p_trans2, cfg.smoother, cfg.clamp_final);

      auto held_loss = [&](const Matrix& est) {
        double s = 0.0;
        for (const auto& [i, j] : held) {
          const double e = est(i, j) - a_t.matrix()(i, j);
          s += e * e;
        }
        return s / static_cast<double>(held.size());
      };
      const double loss_transfer = held_loss(r.p_trans2);
      const double loss_debiased = held_loss(db.p_final);

      auto& row = out.fold_loss[k];
      for (std::size_t c = 0; c < num_candidates; ++c) {
        row.push_back(r.d > cv.candidates[c] ? loss_debiased : loss_transfer);
        total[c] += row.back();
      }
      out.fold_distance[k] = r.d;
      ++out.folds_used;
    } catch (const Error& e) {
      log_warn("cv fold " + std::to_string(k) + " failed: " + e.what());
      out.fold_loss[k].clear();
    }
  }
  require(out.folds_used > 0, ErrorKind::Convergence, "every CV fold failed");

  out.mean_loss.resize(num_candidates);
  std::size_t best = 0;
  for (std::size_t c = 0; c < num_candidates; ++c) {
    out.mean_loss[c] = total[c] / out.folds_used;
    const bool better = out.mean_loss[c] < out.mean_loss[best];
    const bool tie_smaller = out.mean_loss[c] == out.mean_loss[best] &&
                             cv.candidates[c] < cv.candidates[best];
    if (better || tie_smaller) best = c;
  }
  out.delta_hat = cv.candidates[best];
  return out;
}

}  // namespace gtrans
