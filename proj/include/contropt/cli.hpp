#pragma once

#include <CLI11.hpp>

#include <iostream>

#include "contropt/io.hpp"

namespace contropt {

namespace detail {

inline void write_output(const std::string& path, const std::string& payload) {
  if (path.empty() || path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << payload;
}

inline std::string trace_csv_string(const RunResult& r, std::optional<double> f_star) {
  std::ostringstream os;
  write_trace_csv(os, r, f_star);
  return os.str();
}

inline int run_command(const CliSettings& settings, const std::string& out,
                       const std::string& format) {
  ObjectiveSpec spec = make_objective(settings.problem, settings.size, settings.box_override);
  RunResult result = run(settings.run, spec.box, spec.fn);
  if (format == "json")
    write_output(out, result_to_json(result, settings.run, spec.name, spec.f_star).dump(2) + "\n");
  else
    write_output(out, trace_csv_string(result, spec.f_star));
  return 0;
}

inline int bench_command(const CliSettings& settings, int repeats, bool baselines,
                         const std::string& out, const std::string& format) {
  ObjectiveSpec spec = make_objective(settings.problem, settings.size, settings.box_override);
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(repeats));
  for (int i = 0; i < repeats; ++i)
    seeds[static_cast<std::size_t>(i)] = settings.run.seed + static_cast<std::uint64_t>(i);
  BenchmarkReport report = run_benchmark(spec, settings.run, repeats, seeds);

  nlohmann::json j = report_to_json(report);
  if (baselines) {
    long long budget = settings.run.max_evaluations.value_or(
        report.runs.empty() || !report.runs.front().result
            ? 1000
            : report.runs.front().result->n_evaluations);
    Rng rng = make_stream(settings.run.seed, 0xba5e);
    auto rs = random_search_baseline(spec.fn, spec.box, static_cast<std::size_t>(budget), rng);
    const int nodes = std::max(
        2, static_cast<int>(std::floor(std::pow(static_cast<double>(budget),
                                                1.0 / spec.box.dim()))));
    std::vector<double> gs;
    try {
      gs = grid_search_baseline(spec.fn, spec.box, nodes);
    } catch (const std::domain_error&) {
      // grid larger than the cap: skip silently, the JSON just omits it
    }
    const double off = spec.f_star.value_or(0.0);
    auto gapify = [off](std::vector<double> t) {
      for (double& v : t) v -= off;
      return t;
    };
    j["baselines"]["random_search"] = gapify(std::move(rs));
    if (!gs.empty()) {
      j["baselines"]["grid_search"] = gapify(std::move(gs));
      j["baselines"]["grid_nodes_per_dim"] = nodes;
    }
  }

  if (format == "json") {
    write_output(out, j.dump(2) + "\n");
  } else {
    // One trace CSV per run, in the fixed per-evaluation schema.
    if (out.empty() || out == "-")
      throw std::runtime_error("bench --format csv needs --out as a file prefix");
    for (const auto& r : report.runs) {
      std::ostringstream name;
      name << out << "_seed" << r.seed << ".csv";
      if (r.result) write_output(name.str(), trace_csv_string(*r.result, spec.f_star));
    }
    write_output(out + "_summary.json", j.dump(2) + "\n");
  }

  std::ostringstream brief;
  brief << report.problem << ": median final "
        << (report.gap_is_absolute ? "best value " : "gap ") << report.median_final_gap()
        << " over " << repeats << " runs\n";
  std::cerr << brief.str();
  return 0;
}

inline int list_command() {
  for (const auto& name : objective_names()) {
    ObjectiveSpec spec = make_objective(name);
    std::cout << spec.name << "  dim=" << spec.dim << "  box=[" << spec.box.lower()[0] << ','
              << spec.box.upper()[0] << "]";
    if (spec.box.dim() > 1 && name != "branin") std::cout << "^" << spec.box.dim();
    if (name == "branin") std::cout << " x [0,15]";
    if (spec.f_star) std::cout << "  f*=" << *spec.f_star;
    if (name == "lj") std::cout << "  (dim selects the atom count, 2..5)";
    if (name == "ackley" || name == "rosenbrock") std::cout << "  (dim scalable)";
    std::cout << "\n";
  }
  return 0;
}

}  // namespace detail

/// Entry point behind the `contropt` binary; also callable from tests.
inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"contraction-based global optimization"};
  app.require_subcommand(1);

  CliSettings settings;
  std::string config_path, out, format = "csv";
  int repeats = 20;
  bool baselines = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--problem", settings.problem, "objective name (see `list`)")->required();
    cmd->add_option("--dim", settings.size, "dimension (atom count for lj)");
    cmd->add_option("--config", config_path, "flat key=value config file");
    cmd->add_option("--seed", settings.run.seed, "root random seed");
    cmd->add_option("--out", out, "output path ('-' for stdout)");
    cmd->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* cmd_run = app.add_subcommand("run", "single optimization run");
  add_common(cmd_run);
  CLI::App* cmd_bench = app.add_subcommand("bench", "multi-seed benchmark harness");
  add_common(cmd_bench);
  cmd_bench->add_option("--repeats", repeats, "number of seeded repeats");
  cmd_bench->add_flag("--baselines", baselines, "also run random/grid search baselines");
  CLI::App* cmd_list = app.add_subcommand("list", "print the objective registry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (cmd_list->parsed()) return detail::list_command();
    if (!config_path.empty()) apply_config(settings, parse_config_file(config_path));
    settings.finalize_schedules();
    if (cmd_run->parsed()) return detail::run_command(settings, out, format);
    return detail::bench_command(settings, repeats, baselines, out, format);
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;  // bad problem name or argument values: usage error
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace contropt
