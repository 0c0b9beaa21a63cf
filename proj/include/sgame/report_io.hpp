#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "sgame/equilibrium.hpp"
#include "sgame/model.hpp"
#include "sgame/simulate.hpp"

namespace sgame {

nlohmann::json model_to_json(const ModelSpec& model);
ModelSpec model_from_json(const nlohmann::json& j);

nlohmann::json strategy_to_json(const ObliviousStrategy& mu);
ObliviousStrategy strategy_from_json(const nlohmann::json& j);

nlohmann::json population_to_json(const PopulationState& f);
PopulationState population_from_json(const nlohmann::json& j,
                                     const ModelSpec& model);

/// Solve artifact: the full report plus the model it was computed for, so a
/// later simulation run can rebuild everything from the file alone.
nlohmann::json solve_report_to_json(const ModelSpec& model,
                                    const SolveReport& report);

struct LoadedEquilibrium {
  ModelSpec model;
  SolveReport report;
};

LoadedEquilibrium solve_report_from_json(const nlohmann::json& j);
LoadedEquilibrium load_equilibrium_file(const std::string& path);

nlohmann::json condition_report_to_json(const ModelSpec& model,
                                        const ConditionReport& report);

/// CSV writers. All files carry a header row, comma separators, '.' decimals,
/// and doubles printed with "%.17g" so identical runs are byte-identical.
std::string format_double(double v);

void write_population_csv(const std::string& path, const ModelSpec& model,
                          const PopulationState& f);

void write_trace_csv(const std::string& path, const std::vector<int>& m_values,
                     const std::vector<SimTrace>& traces);

struct SweepRow {
  double value = 0.0;
  bool converged = false;
  bool failed = false;         // model construction or solve threw
  std::string error;
  double fp_gap = 0.0;
  double bellman_residual = 0.0;
  double invariance_residual = 0.0;
  double boundary_mass = 0.0;
  double tail_moment_value = 0.0;
  double mean_state = 0.0;
  long iterations = 0;
};

void write_sweep_csv(const std::string& path, const std::string& parameter,
                     const std::vector<SweepRow>& rows);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace sgame
