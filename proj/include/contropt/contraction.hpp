#pragma once

#include <functional>
#include <memory>

#include "contropt/error_estimation.hpp"

namespace contropt {

using ObjectiveFn = std::function<double(const Vector&)>;

/// Linear-interpolation percentile: index c/100*(N-1) into the sorted values.
inline double percentile(std::vector<double> values, double c) {
  if (values.empty()) throw std::domain_error("percentile: empty input");
  if (!(c >= 0.0 && c <= 100.0)) throw std::domain_error("percentile: c out of [0,100]");
  std::sort(values.begin(), values.end());
  const double pos = c / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

/// Contraction gate: the CV error bound must fit within omega * (u - f_min).
inline bool error_gate(const ErrorStats& stats, double t, double omega, double u, double f_min) {
  if (u < f_min) throw std::domain_error("error_gate: threshold below best value");
  return chebyshev_bound(stats, t).value <= omega * (u - f_min);
}

struct RunConfig {
  int levels = 10;                   // contractions to perform
  int batch_size = 2;                // points added per detection
  int min_inner_iters = 1;           // detections required before contracting
  int max_inner_iters = 100;         // safety cap on a single level
  double bound_factor = 1.0;         // omega in (0,1]
  std::vector<double> percentile_schedule;  // c_k per level, in (0,100)
  std::vector<double> confidence_schedule;  // t_k per level
  WalkParams walk;
  int candidate_cap = 800;           // per-iteration cloud size; n_c shrinks as N grows
  int cv_folds = 10;
  std::uint64_t seed = 0;
  std::optional<long long> max_evaluations;
  FitConfig fit;
  int refit_starts = 2;              // starts when a warm hyperparameter guess exists
  int minimize_starts = 5;

  static std::vector<double> constant_schedule(int k, double v) {
    return std::vector<double>(static_cast<std::size_t>(k), v);
  }
  /// t_k = t_bar * k / K, the ramp used for valley-shaped objectives.
  static std::vector<double> ramp_schedule(int k, double t_bar) {
    std::vector<double> t(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) t[static_cast<std::size_t>(i)] = t_bar * i / k;
    return t;
  }

  void validate() const {
    if (levels < 1 || batch_size < 1 || min_inner_iters < 1 ||
        max_inner_iters < min_inner_iters)
      throw std::domain_error("RunConfig: bad iteration counts");
    if (!(bound_factor > 0.0 && bound_factor <= 1.0))
      throw std::domain_error("RunConfig: bound_factor must be in (0,1]");
    if (percentile_schedule.size() != static_cast<std::size_t>(levels) ||
        confidence_schedule.size() != static_cast<std::size_t>(levels))
      throw std::domain_error("RunConfig: schedules must have one entry per level");
    for (double c : percentile_schedule)
      if (!(c > 0.0 && c < 100.0)) throw std::domain_error("RunConfig: percentile out of (0,100)");
    if (cv_folds < 2) throw std::domain_error("RunConfig: cv_folds must be >= 2");
    walk.validate();
  }
};

/// Mutable loop state: the current domain, the in-domain samples, and the
/// evaluation accounting.
struct ContractionState {
  ConstrainedDomain domain;
  SampleSet samples;
  double f_best = std::numeric_limits<double>::infinity();
  long long n_total = 0;
  int level = 0;
};

struct ContractionRecord {
  int level = 0;
  int model_size = 0;
  double threshold = 0.0;
  double error_bound = 0.0;
  int inner_iters = 0;
  double f_best_after = 0.0;
  std::optional<double> est_factor;  // Monte-Carlo contraction factor, if probed
  std::optional<double> q_diag;
  bool incumbent_retained = false;   // best sample kept despite failing the filter
};

struct TraceEntry {
  long long eval_index = 0;
  double f_best = 0.0;
  int level = 0;
  int model_size = 0;
};

enum class TerminationReason { kCompleted, kBudget, kNonContractibleCap, kAborted };

inline const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::kCompleted: return "completed";
    case TerminationReason::kBudget: return "budget";
    case TerminationReason::kNonContractibleCap: return "noncontractible-cap";
    case TerminationReason::kAborted: return "aborted";
  }
  return "unknown";
}

struct RunResult {
  std::vector<ContractionRecord> records;
  std::vector<TraceEntry> trace;
  SampleSet final_samples;  // original coordinates
  std::vector<ConstrainedDomain> level_domains;  // normalized frame, D^(0) first
  BoxDomain box;
  TerminationReason termination = TerminationReason::kCompleted;
  double f_best = std::numeric_limits<double>::infinity();
  Vector best_point;  // original coordinates
  long long n_evaluations = 0;

  explicit RunResult(BoxDomain b) : box(std::move(b)) {}

  /// Membership of an original-coordinate point in the recorded D^(level).
  bool contains(std::size_t level, const Vector& x) const {
    return level_domains.at(level).contains(box.to_normalized(x));
  }
};

/// Raised when the objective returns a non-finite value; carries what the run
/// produced up to that point.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, std::shared_ptr<RunResult> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const RunResult& partial() const { return *partial_; }
  std::shared_ptr<const RunResult> partial_ptr() const { return partial_; }

 private:
  std::shared_ptr<RunResult> partial_;
};

/// Pushes (model, u) onto the constraint chain and drops samples whose model
/// mean exceeds u. The incumbent best sample is always retained; the returned
/// flag reports whether that rescue was needed.
inline std::pair<ContractionState, bool> apply_contraction(const ContractionState& state,
                                                           std::shared_ptr<const KernelModel> model,
                                                           double u) {
  SublevelConstraint c;
  c.threshold = u;
  c.value = [model](const Vector& x) { return model->predict_mean(x); };
  c.value_batch = [model](const Matrix& xs) { return model->predict_mean_batch(xs); };

  ContractionState next{state.domain.with_constraint(std::move(c)), SampleSet{}, state.f_best,
                        state.n_total, state.level + 1};

  const std::size_t n = state.samples.size();
  std::vector<char> keep(n, 0);
  bool rescued = false;
  if (n > 0) {
    Vector means = model->predict_mean_batch(state.samples.points_matrix());
    for (std::size_t i = 0; i < n; ++i) keep[i] = means[static_cast<Eigen::Index>(i)] <= u;
    const std::size_t best = state.samples.argmin_value();
    if (!keep[best]) {
      keep[best] = 1;
      rescued = true;
    }
    next.samples = state.samples.filter(keep);
  }
  return {std::move(next), rescued};
}

/// Achieved strong-convergence parameter for one contraction and the implied
/// per-level linear factor (1+omega)^2 / (1+q).
struct QkDiagnostic {
  double q = -1.0;
  std::optional<double> linear_factor;
  bool degenerate = false;       // constant sample values
  bool non_contractive = false;  // threshold already at the sample minimum
};

inline QkDiagnostic diagnostic_qk(const SampleSet& samples, double model_min_value, double u,
                                  double omega) {
  QkDiagnostic d;
  const double f_min = samples.min_value();
  const double f_max = samples.max_value();
  if (!(f_max > f_min)) {
    d.degenerate = true;
    return d;
  }
  const double budget = u - std::min(model_min_value, f_min);
  if (!(budget > 0.0)) {
    d.q = -1.0;  // sentinel: no contraction budget at this threshold
    d.non_contractive = true;
    return d;
  }
  d.q = (f_max - f_min) / budget - 1.0;
  if (1.0 + d.q > 0.0) d.linear_factor = (1.0 + omega) * (1.0 + omega) / (1.0 + d.q);
  return d;
}

struct FactorEstimate {
  double ratio = 0.0;
  bool indeterminate = false;  // no probe landed in the `before` domain
};

/// Monte-Carlo measure ratio mu(after)/mu(before) from uniform box probes.
inline FactorEstimate estimate_contraction_factor(const ConstrainedDomain& before,
                                                  const ConstrainedDomain& after,
                                                  std::size_t probes, Rng& rng) {
  if (probes < 1) throw std::domain_error("estimate_contraction_factor: probes must be >= 1");
  const int n = before.dim();
  const std::size_t chunk = std::min<std::size_t>(probes, 8192);
  std::size_t in_before = 0, in_after = 0, done = 0;
  while (done < probes) {
    const std::size_t take = std::min(chunk, probes - done);
    Matrix pts(take, n);
    for (std::size_t i = 0; i < take; ++i) pts.row(i) = before.box().sample(rng).transpose();
    auto alive = before.contains_batch(pts);
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < take; ++i)
      if (alive[i]) idx.push_back(static_cast<Eigen::Index>(i));
    in_before += idx.size();
    if (!idx.empty()) {
      Matrix sub(idx.size(), n);
      for (std::size_t i = 0; i < idx.size(); ++i) sub.row(i) = pts.row(idx[i]);
      auto alive2 = after.contains_batch(sub);
      for (char a : alive2) in_after += a ? 1 : 0;
    }
    done += take;
  }
  if (in_before == 0) return FactorEstimate{0.0, true};
  return FactorEstimate{static_cast<double>(in_after) / static_cast<double>(in_before), false};
}

namespace detail {

struct BudgetStop {};

class Evaluator {
 public:
  Evaluator(const RunConfig& cfg, const BoxDomain& box, const ObjectiveFn& obj, RunResult& result)
      : cfg_(cfg), box_(box), obj_(obj), result_(result) {}

  // Evaluates in original coordinates; records the trace entry.
  double operator()(const Vector& z, int level, int model_size_after) {
    if (cfg_.max_evaluations && n_total_ >= *cfg_.max_evaluations) throw BudgetStop{};
    const Vector x = box_.from_normalized(z);
    const double y = obj_(x);
    ++n_total_;
    if (!std::isfinite(y)) {
      nonfinite_ = true;
      throw BudgetStop{};
    }
    if (y < f_best_) {
      f_best_ = y;
      best_point_ = x;
    }
    result_.trace.push_back(TraceEntry{n_total_, f_best_, level, model_size_after});
    return y;
  }

  long long count() const { return n_total_; }
  double f_best() const { return f_best_; }
  const Vector& best_point() const { return best_point_; }
  bool saw_nonfinite() const { return nonfinite_; }

 private:
  const RunConfig& cfg_;
  const BoxDomain& box_;
  const ObjectiveFn& obj_;
  RunResult& result_;
  long long n_total_ = 0;
  double f_best_ = std::numeric_limits<double>::infinity();
  Vector best_point_;
  bool nonfinite_ = false;
};

}  // namespace detail

/// Runs the full contraction loop on `objective` over `box`.
///
/// Each detection adds `batch_size` quasi-uniform points plus the model
/// minimizer, then the CV error gate decides whether the level may contract.
/// Internally the box is mapped to a centered cube of Euclidean diameter 1;
/// every reported point is mapped back.
inline RunResult run(const RunConfig& cfg, const BoxDomain& box, const ObjectiveFn& objective) {
  cfg.validate();
  auto result = std::make_shared<RunResult>(box);
  detail::Evaluator evaluate(cfg, box, objective, *result);

  const BoxDomain nbox = box.normalized();
  ContractionState state{ConstrainedDomain(nbox), SampleSet{}, 0.0, 0, 0};
  result->level_domains.push_back(state.domain);

  std::optional<Hyperparameters> warm;
  std::size_t halton_cursor = 0;
  std::uint64_t iter_counter = 0;

  auto is_duplicate = [&](const Vector& z) {
    for (const auto& p : state.samples.points())
      if ((p - z).norm() == 0.0) return true;
    return false;
  };

  // Keep the candidate cloud near candidate_cap points as the set grows.
  auto effective_walk = [&]() {
    WalkParams w = cfg.walk;
    const auto n = std::max<std::size_t>(state.samples.size(), 1);
    const int capped = static_cast<int>(std::max<std::size_t>(
        4, static_cast<std::size_t>(cfg.candidate_cap) / n));
    w.n_c = std::min(w.n_c, capped);
    return w;
  };

  auto finalize = [&](TerminationReason reason) {
    result->termination = reason;
    result->n_evaluations = evaluate.count();
    result->f_best = evaluate.f_best();
    if (evaluate.count() > 0) result->best_point = evaluate.best_point();
    SampleSet orig;
    for (std::size_t i = 0; i < state.samples.size(); ++i)
      orig.append(box.from_normalized(state.samples.point(i)), state.samples.value(i));
    result->final_samples = std::move(orig);
  };

  try {
    for (int k = 0; k < cfg.levels; ++k) {
      const double c_k = cfg.percentile_schedule[static_cast<std::size_t>(k)];
      const double t_k = cfg.confidence_schedule[static_cast<std::size_t>(k)];
      int inner = 0;
      while (true) {
        ++inner;
        ++iter_counter;

        std::vector<Vector> candidates;
        std::size_t members = 0;
        for (std::size_t i = 0; i < state.samples.size(); ++i)
          if (state.domain.contains(state.samples.point(i))) ++members;

        if (members == 0) {
          // Cold start (or a pathological level with no member sample):
          // low-discrepancy points filtered by membership.
          int added = 0;
          std::size_t attempts = 0;
          while (added < cfg.batch_size && attempts < 100000) {
            Vector u01 = halton_point(halton_cursor++, nbox.dim());
            ++attempts;
            Vector z = nbox.lower() + u01.cwiseProduct(nbox.widths());
            if (!state.domain.contains(z)) continue;
            const double y = evaluate(z, state.level, static_cast<int>(state.samples.size()) + 1);
            if (state.samples.append(z, y)) ++added;
          }
          if (added == 0)
            throw DomainEmptyError("run: bootstrap found no member point");
          candidates = generate_candidates(state.samples, effective_walk(), state.domain,
                                           detail::mix64(cfg.seed ^ iter_counter));
        } else {
          candidates = generate_candidates(state.samples, effective_walk(), state.domain,
                                           detail::mix64(cfg.seed ^ iter_counter));
          auto sel = select_farthest(state.samples, candidates,
                                     static_cast<std::size_t>(cfg.batch_size));
          for (const auto& z : sel.points) {
            if (is_duplicate(z)) continue;
            const double y = evaluate(z, state.level, static_cast<int>(state.samples.size()) + 1);
            state.samples.append(z, y);
          }
        }

        if (state.samples.size() < 2) {
          if (inner >= cfg.max_inner_iters) {
            finalize(TerminationReason::kNonContractibleCap);
            return *result;
          }
          continue;
        }

        FitConfig fc = cfg.fit;
        if (warm) {
          fc.warm_start = warm;
          fc.starts = std::max(1, cfg.refit_starts);
          fc.initial_step = 0.25;
          if (state.samples.size() > 250) {
            // Hyperparameters drift little between consecutive refits once the
            // set is large; the O(N^3) likelihood evaluations dominate.
            fc.starts = 1;
            fc.max_sweeps = 6;
          }
        }
        Rng fit_rng = make_stream(cfg.seed, 0xf17, iter_counter);
        Matrix pts = state.samples.points_matrix();
        Vector vals = Eigen::Map<const Vector>(state.samples.values().data(),
                                               static_cast<Eigen::Index>(state.samples.size()));
        auto model = std::make_shared<const KernelModel>(fit(pts, vals, fc, fit_rng));
        warm = model->hyper();

        const std::size_t s_folds =
            std::min<std::size_t>(static_cast<std::size_t>(cfg.cv_folds), state.samples.size());
        Rng cv_rng = make_stream(cfg.seed, 0xc5, iter_counter);
        ErrorStats stats = cv_error_stats(pts, vals, model->hyper(), s_folds, cv_rng);

        MinimizeReport rep = minimize_model(*model, state.domain, candidates, cfg.minimize_starts);
        if (!is_duplicate(rep.argmin)) {
          const double y_star = evaluate(rep.argmin, state.level,
                                         static_cast<int>(state.samples.size()) + 1);
          state.samples.append(rep.argmin, y_star);
        }

        const double u = percentile(state.samples.values(), c_k);
        const double f_min = state.samples.min_value();
        const ErrorBound bound = chebyshev_bound(stats, t_k);
        state.f_best = evaluate.f_best();
        state.n_total = evaluate.count();

        if (error_gate(stats, t_k, cfg.bound_factor, u, f_min) && inner >= cfg.min_inner_iters) {
          ContractionRecord rec;
          rec.level = state.level;
          rec.model_size = static_cast<int>(state.samples.size());
          rec.threshold = u;
          rec.error_bound = bound.value;
          rec.inner_iters = inner;
          auto qd = diagnostic_qk(state.samples, rep.value, u, cfg.bound_factor);
          if (!qd.degenerate && !qd.non_contractive) rec.q_diag = qd.q;

          auto [next, rescued] = apply_contraction(state, model, u);
          rec.incumbent_retained = rescued;
          rec.f_best_after = evaluate.f_best();
          state = std::move(next);
          result->level_domains.push_back(state.domain);
          result->records.push_back(std::move(rec));
          warm.reset();  // new domain, new data scale: search hyperparameters afresh
          break;
        }
        if (inner >= cfg.max_inner_iters) {
          finalize(TerminationReason::kNonContractibleCap);
          return *result;
        }
      }
    }
    finalize(TerminationReason::kCompleted);
    return *result;
  } catch (const detail::BudgetStop&) {
    if (evaluate.saw_nonfinite()) {
      finalize(TerminationReason::kAborted);
      throw EvaluationError("run: objective returned a non-finite value", result);
    }
    finalize(TerminationReason::kBudget);
    return *result;
  }
}

}  // namespace contropt
