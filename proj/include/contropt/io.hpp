#pragma once

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "contropt/benchmark.hpp"

namespace contropt {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Per-evaluation trace CSV. Column set and order are fixed:
/// eval_index, f_best, gap, level, model_size.
inline void write_trace_csv(std::ostream& os, const RunResult& result,
                            std::optional<double> f_star) {
  os << "eval_index,f_best,gap,level,model_size\n";
  for (const auto& t : result.trace) {
    os << t.eval_index << ',' << detail::fmt_double(t.f_best) << ',';
    if (f_star) os << detail::fmt_double(t.f_best - *f_star);
    os << ',' << t.level << ',' << t.model_size << '\n';
  }
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["levels"] = cfg.levels;
  j["batch_size"] = cfg.batch_size;
  j["min_inner_iters"] = cfg.min_inner_iters;
  j["max_inner_iters"] = cfg.max_inner_iters;
  j["bound_factor"] = cfg.bound_factor;
  j["percentile_schedule"] = cfg.percentile_schedule;
  j["confidence_schedule"] = cfg.confidence_schedule;
  j["walk"] = {{"n_c", cfg.walk.n_c}, {"T", cfg.walk.T}, {"a", cfg.walk.a},
               {"j_max", cfg.walk.j_max}};
  j["cv_folds"] = cfg.cv_folds;
  j["seed"] = cfg.seed;
  if (cfg.max_evaluations) j["max_evaluations"] = *cfg.max_evaluations;
  j["fit_starts"] = cfg.fit.starts;
  j["refit_starts"] = cfg.refit_starts;
  j["minimize_starts"] = cfg.minimize_starts;
  return j;
}

inline nlohmann::json result_to_json(const RunResult& result, const RunConfig& cfg,
                                     const std::string& problem, std::optional<double> f_star) {
  nlohmann::json j;
  j["config"] = config_to_json(cfg);
  j["config"]["problem"] = problem;

  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : result.records) {
    nlohmann::json rec;
    rec["level"] = r.level;
    rec["model_size"] = r.model_size;
    rec["threshold"] = r.threshold;
    rec["error_bound"] = r.error_bound;
    rec["inner_iters"] = r.inner_iters;
    rec["f_best_after"] = r.f_best_after;
    if (r.est_factor) rec["est_factor"] = *r.est_factor;
    if (r.q_diag) rec["q_diag"] = *r.q_diag;
    rec["incumbent_retained"] = r.incumbent_retained;
    records.push_back(std::move(rec));
  }
  j["records"] = std::move(records);

  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : result.trace) {
    nlohmann::json e;
    e["eval_index"] = t.eval_index;
    e["f_best"] = t.f_best;
    if (f_star) e["gap"] = t.f_best - *f_star;
    e["level"] = t.level;
    e["model_size"] = t.model_size;
    trace.push_back(std::move(e));
  }
  j["trace"] = std::move(trace);
  j["termination"] = to_string(result.termination);

  nlohmann::json res;
  res["f_best"] = result.f_best;
  res["n_evaluations"] = result.n_evaluations;
  if (result.best_point.size() > 0)
    res["best_point"] = std::vector<double>(result.best_point.data(),
                                            result.best_point.data() + result.best_point.size());
  j["result"] = std::move(res);
  return j;
}

inline nlohmann::json report_to_json(const BenchmarkReport& report) {
  nlohmann::json j;
  j["config"] = config_to_json(report.config);
  j["config"]["problem"] = report.problem;
  j["config"]["seeds"] = report.seeds;
  if (report.f_star) j["config"]["f_star"] = *report.f_star;

  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : report.runs) {
    nlohmann::json e;
    e["seed"] = r.seed;
    e["aborted"] = r.aborted;
    if (r.aborted) e["abort_reason"] = r.abort_reason;
    if (r.result) {
      e["f_best"] = r.result->f_best;
      e["n_evaluations"] = r.result->n_evaluations;
      e["termination"] = to_string(r.result->termination);
      if (report.f_star) e["final_gap"] = r.result->f_best - *report.f_star;
    }
    runs.push_back(std::move(e));
  }
  j["runs"] = std::move(runs);

  j["aggregate"] = {{"gap_is_absolute", report.gap_is_absolute},
                    {"median", report.median_gap},
                    {"q1", report.q1_gap},
                    {"q3", report.q3_gap},
                    {"mean", report.mean_gap}};
  return j;
}

/// Flat key-value config files: one `key = value` per line, `#` comments.
inline std::map<std::string, std::string> parse_config_text(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key or value");
    kv[key] = value;
  }
  return kv;
}

inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  return parse_config_text(f);
}

/// Applies config keys onto a RunConfig (schedules are rebuilt afterwards by
/// the caller via finalize_schedules). Unknown keys are an error.
struct CliSettings {
  std::string problem;
  int size = 0;  // dimension, or atom count for lj
  std::optional<std::pair<double, double>> box_override;
  RunConfig run;
  double c_constant = 50.0;
  double t_constant = 2.5;
  std::optional<double> t_ramp;

  void finalize_schedules() {
    run.percentile_schedule = RunConfig::constant_schedule(run.levels, c_constant);
    run.confidence_schedule = t_ramp ? RunConfig::ramp_schedule(run.levels, *t_ramp)
                                     : RunConfig::constant_schedule(run.levels, t_constant);
  }
};

inline void apply_config(CliSettings& s, const std::map<std::string, std::string>& kv) {
  auto as_int = [](const std::string& v) { return std::stoi(v); };
  auto as_double = [](const std::string& v) { return std::stod(v); };
  std::optional<double> box_lo, box_hi;
  for (const auto& [key, value] : kv) {
    if (key == "problem") s.problem = value;
    else if (key == "dim") s.size = as_int(value);
    else if (key == "levels") s.run.levels = as_int(value);
    else if (key == "batch") s.run.batch_size = as_int(value);
    else if (key == "min_inner") s.run.min_inner_iters = as_int(value);
    else if (key == "max_inner") s.run.max_inner_iters = as_int(value);
    else if (key == "omega") s.run.bound_factor = as_double(value);
    else if (key == "c") s.c_constant = as_double(value);
    else if (key == "t") s.t_constant = as_double(value);
    else if (key == "t_ramp") s.t_ramp = as_double(value);
    else if (key == "cv_folds") s.run.cv_folds = as_int(value);
    else if (key == "nc") s.run.walk.n_c = as_int(value);
    else if (key == "steps") s.run.walk.T = as_int(value);
    else if (key == "reflect_a") s.run.walk.a = as_double(value);
    else if (key == "reflect_jmax") s.run.walk.j_max = as_int(value);
    else if (key == "seed") s.run.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "budget") s.run.max_evaluations = std::stoll(value);
    else if (key == "fit_starts") s.run.fit.starts = as_int(value);
    else if (key == "refit_starts") s.run.refit_starts = as_int(value);
    else if (key == "minimize_starts") s.run.minimize_starts = as_int(value);
    else if (key == "box_lo") box_lo = as_double(value);
    else if (key == "box_hi") box_hi = as_double(value);
    else throw std::runtime_error("unknown config key: " + key);
  }
  if (box_lo.has_value() != box_hi.has_value())
    throw std::runtime_error("box_lo and box_hi must be given together");
  if (box_lo) s.box_override = std::make_pair(*box_lo, *box_hi);
}

}  // namespace contropt
