#pragma once

#include <numeric>

#include "contropt/surrogate.hpp"

namespace contropt {

/// Cross-validated residual statistics of a surrogate fit.
struct ErrorStats {
  double mean = 0.0;
  double stddev = 0.0;
  int folds = 0;
  std::vector<double> residuals;  // indexed like the training set
  bool fallback_used = false;     // some fold fell back to value - global mean
};

/// Random partition of {0..n-1} into s folds whose sizes differ by at most 1.
inline std::vector<std::vector<std::size_t>> partition_folds(std::size_t n, std::size_t s,
                                                             Rng& rng) {
  if (s < 2 || s > n) throw std::domain_error("partition_folds: need 2 <= s <= n");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<std::size_t>> folds(s);
  for (std::size_t i = 0; i < n; ++i) folds[i % s].push_back(idx[i]);
  return folds;
}

/// s-fold cross validation with frozen hyperparameters: each fold is predicted
/// by a model built on the complement, and the prediction-minus-value
/// residuals are summarized by their sample mean and standard deviation.
inline ErrorStats cv_error_stats(const Matrix& points, const Vector& values,
                                 const Hyperparameters& hyper, std::size_t s, Rng& rng) {
  hyper.validate();
  const std::size_t n = static_cast<std::size_t>(points.rows());
  if (n < s || s < 2) throw std::domain_error("cv_error_stats: need N >= s >= 2");

  ErrorStats stats;
  stats.folds = static_cast<int>(s);
  stats.residuals.assign(n, 0.0);
  const double global_mean = values.mean();
  auto folds = partition_folds(n, s, rng);

  for (const auto& fold : folds) {
    std::vector<char> in_fold(n, 0);
    for (std::size_t i : fold) in_fold[i] = 1;
    Matrix cp(n - fold.size(), points.cols());
    Vector cv(n - fold.size());
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!in_fold[i]) {
        cp.row(r) = points.row(static_cast<Eigen::Index>(i));
        cv[r] = values[static_cast<Eigen::Index>(i)];
        ++r;
      }
    const double range = cv.maxCoeff() - cv.minCoeff();
    const double max_noise = 1e-4 * (range > 0.0 ? range * range : 1e-2);
    try {
      KernelModel m(hyper, cp, cv, max_noise);
      Matrix held(fold.size(), points.cols());
      for (std::size_t k = 0; k < fold.size(); ++k)
        held.row(static_cast<Eigen::Index>(k)) = points.row(static_cast<Eigen::Index>(fold[k]));
      Vector pred = m.predict_mean_batch(held);
      for (std::size_t k = 0; k < fold.size(); ++k)
        stats.residuals[fold[k]] = pred[static_cast<Eigen::Index>(k)] -
                                   values[static_cast<Eigen::Index>(fold[k])];
    } catch (const IllConditionedError&) {
      for (std::size_t i : fold)
        stats.residuals[i] = values[static_cast<Eigen::Index>(i)] - global_mean;
      stats.fallback_used = true;
    }
  }

  double sum = std::accumulate(stats.residuals.begin(), stats.residuals.end(), 0.0);
  stats.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double rres : stats.residuals) ss += (rres - stats.mean) * (rres - stats.mean);
  stats.stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  return stats;
}

/// Distribution-free bound |mu| + t * sigma. The Chebyshev chain behind it is
/// only claimed for t >= 2; smaller t is accepted but flagged.
struct ErrorBound {
  double value = 0.0;
  bool low_confidence = false;
};

inline ErrorBound chebyshev_bound(const ErrorStats& stats, double t) {
  return ErrorBound{std::abs(stats.mean) + t * stats.stddev, t < 2.0};
}

/// Probability floor 1 - 1/t^2 for |eps - mu| <= t sigma.
inline double coverage_floor(double t) {
  if (!(t > 0.0)) throw std::domain_error("coverage_floor: t must be positive");
  return 1.0 - 1.0 / (t * t);
}

/// Exponential minorant exp(-1.2/t^2) of the floor, valid for t >= 2; used
/// for union-bound accounting across a confidence schedule.
inline double coverage_floor_exp(double t) {
  if (!(t > 0.0)) throw std::domain_error("coverage_floor_exp: t must be positive");
  return std::exp(-1.2 / (t * t));
}

/// 1 - prod_k exp(-1.2/t_k^2): failure budget implied by a whole schedule.
inline double schedule_failure_bound(const std::vector<double>& ts) {
  double sum = 0.0;
  for (double t : ts)
    if (t > 0.0) sum += 1.0 / (t * t);
  return 1.0 - std::exp(-1.2 * sum);
}

}  // namespace contropt
