#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sgame/config.hpp"
#include "sgame/equilibrium.hpp"
#include "sgame/models.hpp"
#include "sgame/report_io.hpp"
#include "test_util.hpp"

using namespace sgame;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::temp_directory_path() / "sgame_cfg_tests";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / name).string();
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("a minimal config parses with defaults filled in") {
  const std::string path = write_temp("minimal.cfg",
                                      "model.family = quality_ladder\n"
                                      "model.theta1 = 0.5\n"
                                      "model.x_max = 30\n");
  const RunConfig config = load_run_config(path);
  CHECK(config.family == "quality_ladder");
  CHECK(config.model_params.at("theta1") == 0.5);
  CHECK(config.model_params.at("x_max") == 30);
  CHECK(config.solver.damping == 0.5);
  const ModelSpec m = build_model_from(config);
  CHECK(m.space.size() == 31);
}

TEST_CASE("unknown keys are rejected with the line number") {
  const std::string path = write_temp("unknown.cfg",
                                      "model.family = quality_ladder\n"
                                      "model.thata1 = 0.5\n");
  try {
    load_run_config(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("model.thata1") != std::string::npos);
    CHECK(what.find("line 2") != std::string::npos);
  }
}

TEST_CASE("out-of-range parameters name the offending symbol") {
  const std::string path = write_temp("bad_delta.cfg",
                                      "model.family = quality_ladder\n"
                                      "model.delta = 1.5\n");
  const RunConfig config = load_run_config(path);
  try {
    build_model_from(config);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("delta") != std::string::npos);
  }
}

TEST_CASE("non-numeric values and malformed lines are flagged") {
  const std::string bad_value = write_temp("bad_value.cfg",
                                           "model.family = quality_ladder\n"
                                           "model.theta1 = fast\n");
  CHECK_THROWS_AS(load_run_config(bad_value), ConfigError);
  const std::string no_eq = write_temp("no_eq.cfg",
                                       "model.family quality_ladder\n");
  CHECK_THROWS_AS(load_run_config(no_eq), ConfigError);
  const std::string dup = write_temp("dup.cfg",
                                     "model.family = quality_ladder\n"
                                     "model.theta1 = 0.5\n"
                                     "model.theta1 = 0.6\n");
  CHECK_THROWS_AS(load_run_config(dup), ConfigError);
}

TEST_CASE("sweep section parses lists and validates the parameter") {
  const std::string path = write_temp("sweep.cfg",
                                      "model.family = quality_ladder\n"
                                      "sweep.parameter = model.theta1\n"
                                      "sweep.values = 0.3, 0.6, 0.9\n");
  const RunConfig config = load_run_config(path);
  REQUIRE(config.sweep.present);
  CHECK(config.sweep.values == std::vector<double>{0.3, 0.6, 0.9});

  const std::string bad = write_temp("sweep_bad.cfg",
                                     "model.family = quality_ladder\n"
                                     "sweep.parameter = model.gamma\n"
                                     "sweep.values = 0.1\n");
  CHECK_THROWS_AS(load_run_config(bad), ConfigError);
}

TEST_CASE("solve report JSON round-trips to an equal structure") {
  QualityLadderParams p;
  p.x_max = 30;
  const ModelSpec m = quality_ladder(p);
  SeSolveOptions opts;
  opts.fp_tol = 1e-7;
  const SolveReport report = solve_se(m, opts);

  const nlohmann::json j = solve_report_to_json(m, report);
  const LoadedEquilibrium back = solve_report_from_json(j);

  CHECK(back.model.family == m.family);
  CHECK(back.model.params == m.params);
  CHECK(back.report.converged == report.converged);
  CHECK(back.report.iterations == report.iterations);
  CHECK(back.report.fp_gap == report.fp_gap);
  CHECK(back.report.bellman_residual == report.bellman_residual);
  CHECK(back.report.invariance_residual == report.invariance_residual);
  CHECK(back.report.boundary_mass == report.boundary_mass);
  CHECK(back.report.tail_moment_value == report.tail_moment_value);
  CHECK(back.report.mean_state == report.mean_state);
  CHECK(back.report.light_tailed == report.light_tailed);
  CHECK(back.report.used_logit == report.used_logit);
  CHECK(back.report.divergence_note == report.divergence_note);
  CHECK(back.report.fp_trace == report.fp_trace);
  CHECK(back.report.population.mass() == report.population.mass());
  CHECK(back.report.strategy.actions() == report.strategy.actions());
  CHECK(back.report.drift_threshold == report.drift_threshold);

  // Serialization is stable: dumping the reparsed report is byte-identical.
  CHECK(solve_report_to_json(back.model, back.report).dump(2) == j.dump(2));
}

TEST_CASE("strategy JSON covers pure, finite, and mixed kinds") {
  Eigen::VectorXd cont(3);
  cont << 0.5, 1.25, 0.0;
  const ObliviousStrategy pure = ObliviousStrategy::pure_continuous(cont);
  const ObliviousStrategy pure_back =
      strategy_from_json(strategy_to_json(pure));
  CHECK(pure_back.actions() == pure.actions());

  Eigen::VectorXd values(3);
  values << 0.0, 1.0, 2.0;
  Eigen::VectorXi idx(4);
  idx << 2, 0, 1, 2;
  const ObliviousStrategy finite = ObliviousStrategy::pure_finite(idx, values);
  const ObliviousStrategy finite_back =
      strategy_from_json(strategy_to_json(finite));
  CHECK(finite_back.indices() == finite.indices());
  CHECK(finite_back.actions() == finite.actions());

  Eigen::MatrixXd mix(2, 3);
  mix << 0.2, 0.3, 0.5, 1.0, 0.0, 0.0;
  const ObliviousStrategy mixed = ObliviousStrategy::mixed(mix, values);
  const ObliviousStrategy mixed_back =
      strategy_from_json(strategy_to_json(mixed));
  CHECK(mixed_back.mix() == mixed.mix());
  CHECK(mixed_back.mix_values() == mixed.mix_values());
}

TEST_CASE("population CSV carries the documented column layout") {
  QualityLadderParams p;
  p.x_max = 3;
  const ModelSpec m = quality_ladder(p);
  const auto dir = std::filesystem::temp_directory_path() / "sgame_cfg_tests";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "pop.csv").string();
  write_population_csv(path, m, m.zero_point_mass());

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "index,x0,mass");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("empty sweep grids produce a header-only CSV") {
  const auto dir = std::filesystem::temp_directory_path() / "sgame_cfg_tests";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "sweep_empty.csv").string();
  write_sweep_csv(path, "model.theta1", {});
  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header.rfind("model.theta1,", 0) == 0);
  std::string rest;
  CHECK_FALSE(std::getline(in, rest));
}

TEST_CASE("condition report serializes checks and drift table") {
  SpilloverParams sp;
  sp.base.x_max = 10;
  sp.gamma = 0.3;
  const ModelSpec m = spillover_oligopoly(sp);
  const ConditionReport report = verify_conditions(m);
  const nlohmann::json j = condition_report_to_json(m, report);
  CHECK(j.at("pass") == false);
  CHECK(j.at("checks").size() == report.checks.size());
  CHECK(j.at("drift_table").size() == report.drift_table.size());
}
