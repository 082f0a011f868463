#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>

#include "contropt/objectives.hpp"

namespace contropt {

/// Parallelism cap for benchmark repeats: CONTROPT_THREADS, else the hardware.
inline int thread_cap() {
  if (const char* env = std::getenv("CONTROPT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Uniform random sampling over the box; returns the running-best trace.
inline std::vector<double> random_search_baseline(const ObjectiveFn& objective,
                                                  const BoxDomain& box, std::size_t budget,
                                                  Rng& rng) {
  if (budget < 1) throw std::domain_error("random_search_baseline: budget must be >= 1");
  std::vector<double> trace;
  trace.reserve(budget);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < budget; ++i) {
    best = std::min(best, objective(box.sample(rng)));
    trace.push_back(best);
  }
  return trace;
}

/// Full equispaced grid, visited row-major (first coordinate slowest).
inline std::vector<double> grid_search_baseline(const ObjectiveFn& objective, const BoxDomain& box,
                                                int nodes_per_dim,
                                                std::size_t max_total = 2000000) {
  if (nodes_per_dim < 2) throw std::domain_error("grid_search_baseline: need >= 2 nodes per dim");
  const int n = box.dim();
  double total_d = 1.0;
  for (int i = 0; i < n; ++i) total_d *= static_cast<double>(nodes_per_dim);
  if (total_d > static_cast<double>(max_total))
    throw std::domain_error("grid_search_baseline: grid size above the configured cap");
  const auto total = static_cast<std::size_t>(total_d);

  std::vector<double> trace;
  trace.reserve(total);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Vector x(n);
  for (std::size_t cell = 0; cell < total; ++cell) {
    for (int i = 0; i < n; ++i)
      x[i] = box.lower()[i] + box.widths()[i] * idx[static_cast<std::size_t>(i)] /
                                  static_cast<double>(nodes_per_dim - 1);
    best = std::min(best, objective(x));
    trace.push_back(best);
    for (int i = n - 1; i >= 0; --i) {  // last coordinate fastest
      if (++idx[static_cast<std::size_t>(i)] < nodes_per_dim) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
  }
  return trace;
}

struct BenchmarkRun {
  std::uint64_t seed = 0;
  std::shared_ptr<const RunResult> result;
  bool aborted = false;
  std::string abort_reason;
};

struct BenchmarkReport {
  std::string problem;
  RunConfig config;
  std::vector<std::uint64_t> seeds;
  std::optional<double> f_star;
  std::vector<BenchmarkRun> runs;

  // Aggregates over a common evaluation axis (last value carried forward).
  // Entries are optimality gaps when f_star is known, raw best values else.
  bool gap_is_absolute = false;
  std::vector<double> median_gap;
  std::vector<double> q1_gap;
  std::vector<double> q3_gap;
  std::vector<double> mean_gap;

  double median_final_gap() const { return median_gap.empty() ? 0.0 : median_gap.back(); }
};

namespace detail {

template <typename Fn>
inline void parallel_for_indexed(int jobs, Fn&& fn) {
  const int workers = std::min(jobs, thread_cap());
  if (workers <= 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Repeats the contraction run over the given seeds (concurrently, capped by
/// CONTROPT_THREADS) and aggregates optimality-gap traces on a shared axis.
/// Aborted runs keep their partial trace and are flagged.
inline BenchmarkReport run_benchmark(const ObjectiveSpec& spec, const RunConfig& config,
                                     int repeats, const std::vector<std::uint64_t>& seeds) {
  if (repeats < 1) throw std::domain_error("run_benchmark: repeats must be >= 1");
  if (seeds.size() != static_cast<std::size_t>(repeats))
    throw std::domain_error("run_benchmark: need one seed per repeat");

  BenchmarkReport report;
  report.problem = spec.name;
  report.config = config;
  report.seeds = seeds;
  report.f_star = spec.f_star;
  report.gap_is_absolute = !spec.f_star.has_value();
  report.runs.resize(static_cast<std::size_t>(repeats));

  detail::parallel_for_indexed(repeats, [&](int i) {
    RunConfig cfg = config;
    cfg.seed = seeds[static_cast<std::size_t>(i)];
    BenchmarkRun& br = report.runs[static_cast<std::size_t>(i)];
    br.seed = cfg.seed;
    try {
      br.result = std::make_shared<RunResult>(run(cfg, spec.box, spec.fn));
    } catch (const EvaluationError& e) {
      br.result = e.partial_ptr();
      br.aborted = true;
      br.abort_reason = e.what();
    }
  });

  std::size_t axis = 0;
  for (const auto& r : report.runs)
    if (r.result) axis = std::max(axis, r.result->trace.size());
  const double offset = spec.f_star.value_or(0.0);
  for (std::size_t e = 0; e < axis; ++e) {
    std::vector<double> gaps;
    for (const auto& r : report.runs) {
      if (!r.result || r.result->trace.empty()) continue;
      const auto& tr = r.result->trace;
      const double f = e < tr.size() ? tr[e].f_best : tr.back().f_best;
      gaps.push_back(f - offset);
    }
    if (gaps.empty()) break;
    report.median_gap.push_back(percentile(gaps, 50.0));
    report.q1_gap.push_back(percentile(gaps, 25.0));
    report.q3_gap.push_back(percentile(gaps, 75.0));
    report.mean_gap.push_back(std::accumulate(gaps.begin(), gaps.end(), 0.0) /
                              static_cast<double>(gaps.size()));
  }
  return report;
}

}  // namespace contropt
