// Command-line front end: solve | verify | simulate | sweep.
//
// Exit codes: 0 success, 1 configuration error, 2 solver non-convergence,
// 3 condition-check failure.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <mutex>

#include "sgame/config.hpp"
#include "sgame/equilibrium.hpp"
#include "sgame/errors.hpp"
#include "sgame/factory.hpp"
#include "sgame/parallel.hpp"
#include "sgame/report_io.hpp"
#include "sgame/simulate.hpp"

namespace {

using nlohmann::json;
using namespace sgame;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
};

std::string out_path(const CommonArgs& args, const std::string& name) {
  std::filesystem::create_directories(args.out_dir);
  return (std::filesystem::path(args.out_dir) / name).string();
}

void dump_json(const CommonArgs& args, const std::string& name,
               const json& j) {
  write_text_file(out_path(args, name), j.dump(2) + "\n");
}

int cmd_solve(const CommonArgs& args) {
  const RunConfig config = load_run_config(args.config_path);
  const ModelSpec model = build_model_from(config);
  const SolveReport report = solve_se(model, config.solver);
  dump_json(args, "report.json", solve_report_to_json(model, report));
  write_population_csv(out_path(args, "equilibrium.csv"), model,
                       report.population);
  std::cout << (report.converged ? "converged" : "did not converge")
            << " after " << report.iterations << " iterations, fp_gap "
            << report.fp_gap << "\n";
  return report.converged ? 0 : 2;
}

int cmd_verify(const CommonArgs& args) {
  const RunConfig config = load_run_config(args.config_path);
  const ModelSpec model = build_model_from(config);
  const ConditionReport report = verify_conditions(model);
  dump_json(args, "conditions.json", condition_report_to_json(model, report));
  for (const ConditionCheck& c : report.checks)
    std::cout << (c.pass ? "[pass] " : "[fail] ") << c.name << " (value "
              << c.value << ", threshold " << c.threshold << ")\n";
  return report.applicable && report.pass ? 0 : 3;
}

int cmd_simulate(const CommonArgs& args) {
  const RunConfig config = load_run_config(args.config_path);
  const SimulationSection& sim = config.simulation;
  if (sim.equilibrium_path.empty())
    throw ConfigError("simulation.equilibrium must point to a solve artifact");
  LoadedEquilibrium eq = load_equilibrium_file(sim.equilibrium_path);

  SimConfig base;
  base.horizon = sim.horizon;
  base.replications = sim.replications;
  base.seed = args.seed_set ? args.seed : sim.seed;

  json summary;
  summary["seed"] = base.seed;
  summary["horizon"] = base.horizon;
  summary["replications"] = base.replications;
  json per_m = json::array();

  std::vector<SimTrace> traces;
  for (int m : sim.m_values) {
    SimConfig cfg = base;
    cfg.m = m;
    SimTrace trace = simulate_population(eq.model, eq.report.strategy,
                                         eq.report.population, cfg);
    // Median over replications of the final-time distance to f.
    std::vector<double> final_distance;
    for (const SimReplication& rep : trace.replications)
      final_distance.push_back(rep.distance_1p[rep.distance_1p.size() - 1]);
    std::sort(final_distance.begin(), final_distance.end());
    const double median =
        final_distance[final_distance.size() / 2];
    json entry = {{"m", m}, {"median_final_distance", median}};

    if (sim.deviation == "perturbed_br") {
      const ObliviousStrategy deviation = perturbed_best_response(
          eq.model, eq.report.population, sim.perturbation);
      const GapStats gap = deviation_gap(eq.model, eq.report.strategy,
                                         eq.report.population, deviation, cfg);
      entry["deviation_gap"] = {{"mean", gap.mean},
                                {"std_error", gap.std_error},
                                {"truncation_bound", gap.truncation_bound}};
    }
    per_m.push_back(entry);
    traces.push_back(std::move(trace));
  }
  summary["per_m"] = per_m;
  write_trace_csv(out_path(args, "trace.csv"), sim.m_values, traces);
  dump_json(args, "summary.json", summary);
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  const RunConfig config = load_run_config(args.config_path);
  if (!config.sweep.present)
    throw ConfigError("sweep requires sweep.parameter and sweep.values");
  const std::string bare = config.sweep.parameter.substr(6);

  std::vector<SweepRow> rows(config.sweep.values.size());
  // Grid points are independent; one point's failure becomes a failed row.
  parallel_for(static_cast<long>(config.sweep.values.size()), [&](long i) {
    SweepRow& row = rows[i];
    row.value = config.sweep.values[i];
    try {
      std::map<std::string, double> params = config.model_params;
      params[bare] = row.value;
      const ModelSpec model = build_model(config.family, params);
      const SolveReport report = solve_se(model, config.solver);
      row.converged = report.converged;
      row.fp_gap = report.fp_gap;
      row.bellman_residual = report.bellman_residual;
      row.invariance_residual = report.invariance_residual;
      row.boundary_mass = report.boundary_mass;
      row.tail_moment_value = report.tail_moment_value;
      row.mean_state = report.mean_state;
      row.iterations = report.iterations;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  write_sweep_csv(out_path(args, "sweep.csv"), config.sweep.parameter, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stationary-equilibrium solver and simulator for anonymous "
               "stochastic games"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&args](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", args.config_path, "run configuration file")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--threads", args.threads, "worker threads");
    if (with_seed)
      sub->add_option("--seed", args.seed, "override simulation seed")
          ->each([&args](const std::string&) { args.seed_set = true; });
  };

  CLI::App* solve = app.add_subcommand("solve", "compute a stationary equilibrium");
  CLI::App* verify = app.add_subcommand("verify", "check sufficient conditions");
  CLI::App* simulate =
      app.add_subcommand("simulate", "finite-m Monte Carlo from a solve artifact");
  CLI::App* sweep = app.add_subcommand("sweep", "solve over a parameter grid");
  add_common(solve, false);
  add_common(verify, false);
  add_common(simulate, true);
  add_common(sweep, false);

  CLI11_PARSE(app, argc, argv);
  worker_threads() = std::max(1, args.threads);

  try {
    if (solve->parsed()) return cmd_solve(args);
    if (verify->parsed()) return cmd_verify(args);
    if (simulate->parsed()) return cmd_simulate(args);
    if (sweep->parsed()) return cmd_sweep(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ConvergenceError& e) {
    std::cerr << "solver did not converge: " << e.what() << " (last residual "
              << e.last_residual << ")\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
