#pragma once

#include <Eigen/Cholesky>

#include <cmath>
#include <optional>

#include "contropt/sampling.hpp"

namespace contropt {

/// Gaussian-kernel hyperparameters: phi(x,y) = signal_var * exp(-inv_lengthscale_sq * |x-y|^2),
/// plus observation noise on the diagonal.
struct Hyperparameters {
  double signal_var = 1.0;
  double inv_lengthscale_sq = 1.0;
  double noise_var = 1e-10;

  void validate() const {
    if (!(signal_var > 0.0) || !(inv_lengthscale_sq > 0.0) || !(noise_var >= 0.0))
      throw std::domain_error("Hyperparameters: values out of range");
  }
};

inline double kernel_eval(const Vector& x, const Vector& y, const Hyperparameters& h) {
  if (x.size() != y.size()) throw std::domain_error("kernel_eval: dimension mismatch");
  return h.signal_var * std::exp(-h.inv_lengthscale_sq * (x - y).squaredNorm());
}

namespace detail {

inline Matrix pairwise_sqdist(const Matrix& a, const Matrix& b) {
  Vector na = a.rowwise().squaredNorm();
  Vector nb = b.rowwise().squaredNorm();
  Matrix d = (-2.0 * a * b.transpose());
  d.colwise() += na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

// Attempts the Cholesky factor of signal_var*exp(-s2*D2) + noise*I, escalating
// the diagonal by 10x per failure up to max_noise. Returns the noise actually
// used, or nullopt when even max_noise fails.
inline std::optional<double> factor_with_jitter(const Matrix& sqdist, const Hyperparameters& h,
                                                double max_noise, Eigen::LLT<Matrix>& llt) {
  Matrix phi = (h.signal_var * (-h.inv_lengthscale_sq * sqdist.array()).exp()).matrix();
  double noise = h.noise_var;
  while (true) {
    Matrix psi = phi;
    psi.diagonal().array() += noise;
    llt.compute(psi);
    if (llt.info() == Eigen::Success) return noise;
    if (noise >= max_noise) return std::nullopt;
    noise = std::min(noise * 10.0, max_noise);
  }
}

}  // namespace detail

/// Log marginal likelihood -f'Psi^{-1}f/2 - log|Psi|/2 - N log(2 pi)/2 at the
/// given hyperparameters, through one Cholesky factorization.
inline double log_marginal_likelihood(const Hyperparameters& h, const Matrix& points,
                                      const Vector& values) {
  h.validate();
  const Eigen::Index n = points.rows();
  if (n < 1 || values.size() != n)
    throw std::domain_error("log_marginal_likelihood: bad data shapes");
  Matrix d2 = detail::pairwise_sqdist(points, points);
  Eigen::LLT<Matrix> llt;
  auto used = detail::factor_with_jitter(d2, h, h.noise_var, llt);
  if (!used)
    throw IllConditionedError("log_marginal_likelihood: factorization failed", h.noise_var);
  Vector alpha = llt.solve(values);
  double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * values.dot(alpha) - 0.5 * logdet -
         0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

/// Fitted Gaussian-kernel regression model; immutable after construction.
class KernelModel {
 public:
  KernelModel(Hyperparameters h, Matrix points, Vector values, double max_noise)
      : hyper_(h), points_(std::move(points)), values_(std::move(values)) {
    hyper_.validate();
    Matrix d2 = detail::pairwise_sqdist(points_, points_);
    auto used = detail::factor_with_jitter(d2, hyper_, std::max(max_noise, hyper_.noise_var), llt_);
    if (!used)
      throw IllConditionedError("KernelModel: factorization failed at max jitter",
                                std::max(max_noise, hyper_.noise_var));
    hyper_.noise_var = *used;
    alpha_ = llt_.solve(values_);
  }

  const Hyperparameters& hyper() const { return hyper_; }
  const Matrix& train_points() const { return points_; }
  const Vector& train_values() const { return values_; }
  const Vector& alpha() const { return alpha_; }
  Eigen::Index size() const { return points_.rows(); }
  int dim() const { return static_cast<int>(points_.cols()); }

  double predict_mean(const Vector& x) const {
    return kernel_row(x).dot(alpha_);
  }

  /// Posterior means for row-stacked query points in one pass.
  Vector predict_mean_batch(const Matrix& xs) const {
    if (xs.cols() != points_.cols()) throw std::domain_error("predict_mean_batch: dimension mismatch");
    Matrix d2 = detail::pairwise_sqdist(xs, points_);
    return (hyper_.signal_var * (-hyper_.inv_lengthscale_sq * d2.array()).exp()).matrix() * alpha_;
  }

  double predict_variance(const Vector& x) const {
    Vector k = kernel_row(x);
    Vector v = llt_.solve(k);
    return std::max(0.0, hyper_.signal_var - k.dot(v));
  }

  /// Gradient of the posterior mean: sum_i alpha_i * (-2 s2) (x - x_i) phi_i.
  Vector mean_gradient(const Vector& x) const {
    if (x.size() != points_.cols()) throw std::domain_error("mean_gradient: dimension mismatch");
    Matrix diff = (-points_).rowwise() + x.transpose();  // N x n, rows x - x_i
    Vector phi = (hyper_.signal_var *
                  (-hyper_.inv_lengthscale_sq * diff.rowwise().squaredNorm().array()).exp())
                     .matrix();
    return -2.0 * hyper_.inv_lengthscale_sq * diff.transpose() * phi.cwiseProduct(alpha_);
  }

 private:
  Vector kernel_row(const Vector& x) const {
    if (x.size() != points_.cols()) throw std::domain_error("predict: dimension mismatch");
    Vector d2 = ((-points_).rowwise() + x.transpose()).rowwise().squaredNorm();
    return (hyper_.signal_var * (-hyper_.inv_lengthscale_sq * d2.array()).exp()).matrix();
  }

  Hyperparameters hyper_;
  Matrix points_;
  Vector values_;
  Eigen::LLT<Matrix> llt_;
  Vector alpha_;
};

/// Hyperparameter search configuration for fit().
struct FitConfig {
  int starts = 8;
  int max_sweeps = 30;        // coordinate-ascent sweeps per start
  double step_tol = 0.05;     // log-space step below which a start stops
  double initial_step = 1.0;  // first step of the warm start, when one is given
  std::optional<Hyperparameters> warm_start;
};

namespace detail {

struct FitScale {
  double value_range = 0.0;
  double value_var = 0.0;
  double noise_floor = 0.0;
  double max_noise = 0.0;
  double diam_sq = 0.0;
};

inline FitScale fit_scale(const Matrix& points, const Vector& values) {
  FitScale s;
  s.value_range = values.maxCoeff() - values.minCoeff();
  const double mean = values.mean();
  s.value_var = values.size() > 1
                    ? (values.array() - mean).square().sum() / static_cast<double>(values.size() - 1)
                    : 0.0;
  const double r2 = s.value_range > 0.0 ? s.value_range * s.value_range : 1e-2;
  s.noise_floor = 1e-10 * r2;
  s.max_noise = 1e-4 * r2;
  Vector widths = points.colwise().maxCoeff() - points.colwise().minCoeff();
  s.diam_sq = std::max(widths.squaredNorm(), 1e-12);
  return s;
}

}  // namespace detail

/// Multi-start coordinate ascent on the log marginal likelihood over
/// log-hyperparameters, bounded relative to the data scale. Deterministic for
/// a fixed rng; starts that trail far behind the incumbent are cut short.
inline KernelModel fit(const Matrix& points, const Vector& values, const FitConfig& cfg, Rng& rng) {
  const Eigen::Index n = points.rows();
  if (n < 2 || values.size() != n) throw std::domain_error("fit: needs at least 2 samples");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if ((points.row(i) - points.row(j)).norm() == 0.0)
        throw std::domain_error("fit: training points must be pairwise distinct");

  const auto scale = detail::fit_scale(points, values);
  if (scale.value_var <= 0.0) {
    // Constant data: any kernel reproduces it up to regression shrinkage.
    Hyperparameters h{1.0, 4.0 / scale.diam_sq, std::max(scale.noise_floor, 1e-12)};
    return KernelModel(h, points, values, std::max(scale.max_noise, 1e-6));
  }

  const double lo[3] = {std::log(1e-4 * scale.value_var), std::log(1.0 / scale.diam_sq),
                        std::log(scale.noise_floor)};
  const double hi[3] = {std::log(1e4 * scale.value_var), std::log(1e6 / scale.diam_sq),
                        std::log(std::max(scale.value_var, scale.noise_floor * 10.0))};

  Matrix d2 = detail::pairwise_sqdist(points, points);
  Eigen::LLT<Matrix> llt;
  auto eval = [&](const double* lp) -> std::optional<std::pair<double, double>> {
    Hyperparameters h{std::exp(lp[0]), std::exp(lp[1]), std::exp(lp[2])};
    auto used = detail::factor_with_jitter(d2, h, scale.max_noise, llt);
    if (!used) return std::nullopt;
    Vector alpha = llt.solve(values);
    double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    double lml = -0.5 * values.dot(alpha) - 0.5 * logdet -
                 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
    return std::make_pair(lml, *used);
  };

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double best_lml = -std::numeric_limits<double>::infinity();
  double best_lp[3] = {0, 0, 0};
  double best_noise = 0.0;
  bool any = false;

  for (int start = 0; start < std::max(1, cfg.starts); ++start) {
    double lp[3];
    if (start == 0 && cfg.warm_start) {
      lp[0] = std::log(cfg.warm_start->signal_var);
      lp[1] = std::log(cfg.warm_start->inv_lengthscale_sq);
      lp[2] = std::log(std::max(cfg.warm_start->noise_var, scale.noise_floor));
    } else if (start == 0) {
      lp[0] = std::log(scale.value_var);
      lp[1] = std::log(16.0 / scale.diam_sq);
      lp[2] = std::log(std::max(scale.noise_floor, 1e-6 * scale.value_var));
    } else {
      for (int i = 0; i < 3; ++i) lp[i] = lo[i] + unif(rng) * (hi[i] - lo[i]);
    }
    for (int i = 0; i < 3; ++i) lp[i] = std::clamp(lp[i], lo[i], hi[i]);

    auto cur = eval(lp);
    if (!cur) continue;
    double cur_lml = cur->first;
    double cur_noise = cur->second;
    double step = start == 0 && cfg.warm_start ? cfg.initial_step : 1.0;
    for (int sweep = 0; sweep < cfg.max_sweeps && step >= cfg.step_tol; ++sweep) {
      bool improved = false;
      for (int i = 0; i < 3; ++i) {
        for (double sgn : {+1.0, -1.0}) {
          double trial[3] = {lp[0], lp[1], lp[2]};
          trial[i] = std::clamp(trial[i] + sgn * step, lo[i], hi[i]);
          if (trial[i] == lp[i]) continue;
          auto r = eval(trial);
          if (r && r->first > cur_lml) {
            lp[i] = trial[i];
            cur_lml = r->first;
            cur_noise = r->second;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
      // Abandon starts that lag hopelessly behind the incumbent.
      if (any && sweep >= 2 && cur_lml < best_lml - 50.0) break;
    }
    if (!any || cur_lml > best_lml) {
      any = true;
      best_lml = cur_lml;
      best_noise = cur_noise;
      for (int i = 0; i < 3; ++i) best_lp[i] = lp[i];
    }
  }
  if (!any) throw FitError("fit: every start failed factorization at max jitter");

  Hyperparameters h{std::exp(best_lp[0]), std::exp(best_lp[1]), best_noise};
  return KernelModel(h, points, values, scale.max_noise);
}

/// Outcome of minimizing a model mean over a constrained domain.
struct MinimizeReport {
  Vector argmin;
  double value = 0.0;
  int starts_used = 0;
  bool converged = false;
};

/// Minimizes the posterior mean over `d`: scores the candidate cloud plus the
/// member training points, then refines the best seeds by projected gradient
/// descent with backtracking. Iterates are clamped to the box and rejected if
/// they violate the constraint chain. Never returns worse than the best
/// evaluated candidate; ties keep the earliest candidate.
inline MinimizeReport minimize_model(const KernelModel& m, const ConstrainedDomain& d,
                                     const std::vector<Vector>& candidates, int starts = 5,
                                     int max_iters = 60) {
  if (candidates.empty()) throw std::domain_error("minimize_model: empty candidate list");

  std::vector<Vector> pool = candidates;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    Vector p = m.train_points().row(i).transpose();
    if (d.contains(p)) pool.push_back(p);
  }
  Matrix pm(pool.size(), d.dim());
  for (std::size_t i = 0; i < pool.size(); ++i) pm.row(i) = pool[i].transpose();
  Vector means = m.predict_mean_batch(pm);

  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return means[a] < means[b]; });

  MinimizeReport rep;
  std::size_t best_idx = order[0];
  rep.argmin = pool[best_idx];
  rep.value = means[best_idx];

  const double diam = d.box().diameter();
  const double grad_tol = 1e-9 * std::max(1.0, std::abs(rep.value)) / std::max(diam, 1e-12);
  const int n_starts = static_cast<int>(std::min<std::size_t>(std::max(1, starts), pool.size()));
  rep.starts_used = n_starts;

  for (int s = 0; s < n_starts; ++s) {
    Vector x = pool[order[static_cast<std::size_t>(s)]];
    double fx = means[order[static_cast<std::size_t>(s)]];
    double t = 0.0;
    for (int it = 0; it < max_iters; ++it) {
      Vector g = m.mean_gradient(x);
      const double gn = g.norm();
      if (gn <= grad_tol) {
        rep.converged = true;
        break;
      }
      if (t <= 0.0) t = 0.1 * diam / gn;
      bool accepted = false;
      for (int bt = 0; bt < 25; ++bt) {
        Vector y = d.box().clamp(x - t * g);
        if (d.contains(y)) {
          double fy = m.predict_mean(y);
          if (fy < fx - 1e-4 * t * gn * gn) {
            x = y;
            fx = fy;
            t *= 2.0;
            accepted = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!accepted) {
        rep.converged = true;  // no descent direction at line-search resolution
        break;
      }
    }
    if (fx < rep.value) {
      rep.value = fx;
      rep.argmin = x;
    }
  }
  return rep;
}

}  // namespace contropt
