#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sgame/equilibrium.hpp"
#include "sgame/model.hpp"
#include "sgame/simulate.hpp"

namespace sgame {

struct SimulationSection {
  std::vector<int> m_values{100};
  int horizon = 10;
  int replications = 20;
  std::uint64_t seed = 1;
  std::string equilibrium_path;
  std::string deviation = "none";  // none | perturbed_br
  double perturbation = 0.1;
};

struct SweepSection {
  bool present = false;
  std::string parameter;           // a model.* key
  std::vector<double> values;
};

/// One run, loaded from a key = value config file. Unknown keys are
/// rejected; numeric parse errors name the key and line.
struct RunConfig {
  std::string family;
  std::map<std::string, double> model_params;  // canonical parameter names
  SeSolveOptions solver;
  SimulationSection simulation;
  SweepSection sweep;
};

RunConfig load_run_config(const std::string& path);

ModelSpec build_model_from(const RunConfig& config);

}  // namespace sgame
