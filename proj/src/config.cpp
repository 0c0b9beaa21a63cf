#include "sgame/config.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "sgame/errors.hpp"
#include "sgame/factory.hpp"

namespace sgame {
namespace {

struct RawEntry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::map<std::string, RawEntry> parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, RawEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected key = value";
      throw ConfigError(msg.str());
    }
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty()) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": empty key";
      throw ConfigError(msg.str());
    }
    if (entries.count(key)) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": duplicate key \"" << key << "\"";
      throw ConfigError(msg.str());
    }
    entries[key] = {trim(stripped.substr(eq + 1)), line_no};
  }
  return entries;
}

double parse_double(const std::string& key, const RawEntry& entry) {
  try {
    std::size_t used = 0;
    const double v = std::stod(entry.value, &used);
    if (trim(entry.value.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  std::ostringstream msg;
  msg << "line " << entry.line << ": key \"" << key
      << "\" needs a numeric value, got \"" << entry.value << "\"";
  throw ConfigError(msg.str());
}

std::vector<double> parse_list(const std::string& key, const RawEntry& entry) {
  std::vector<double> values;
  if (trim(entry.value).empty()) return values;
  std::stringstream ss(entry.value);
  std::string item;
  while (std::getline(ss, item, ','))
    values.push_back(parse_double(key, {trim(item), entry.line}));
  return values;
}

const std::map<std::string, std::set<std::string>>& family_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"quality_ladder",
       {"theta1", "c_tilde", "invest_cost", "alpha", "delta", "a_max"}},
      {"spillover",
       {"theta1", "c_tilde", "invest_cost", "alpha", "delta", "a_max", "gamma",
        "zeta_const"}},
      {"learning_by_doing",
       {"s_max", "p0", "demand_slope", "cost_c", "alpha", "delta",
        "demand_form"}},
      {"supply_chain",
       {"s_max", "quantity", "reserve", "retail_price", "holding_cost",
        "d_max"}},
      {"consumer_learning",
       {"gamma", "effort_cost", "sigma_l2", "sigma_h2", "kappa_omega", "alpha",
        "delta", "a_max"}},
  };
  return keys;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::map<std::string, RawEntry> entries = parse_file(path);
  RunConfig config;

  auto take = [&entries](const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) return std::optional<RawEntry>();
    std::optional<RawEntry> entry(it->second);
    entries.erase(it);
    return entry;
  };
  auto take_double = [&take](const std::string& key, double fallback) {
    auto e = take(key);
    return e ? parse_double(key, *e) : fallback;
  };

  const auto family_entry = take("model.family");
  if (!family_entry) throw ConfigError("config is missing model.family");
  config.family = family_entry->value;
  if (!family_keys().count(config.family))
    throw ConfigError("unknown model family \"" + config.family + "\"");

  const std::set<std::string>& allowed = family_keys().at(config.family);
  config.model_params["x_max"] = take_double("model.x_max", 200);
  config.model_params["beta"] = take_double("model.beta", 0.9);
  for (const std::string& name : allowed) {
    if (name == "demand_form") {
      if (auto e = take("model.demand_form")) {
        if (e->value == "linear")
          config.model_params["demand_form"] = 0.0;
        else if (e->value == "hyperbolic")
          config.model_params["demand_form"] = 1.0;
        else
          throw ConfigError("model.demand_form must be linear or hyperbolic");
      }
      continue;
    }
    if (auto e = take("model." + name))
      config.model_params[name] = parse_double("model." + name, *e);
  }

  SeSolveOptions& s = config.solver;
  s.damping = take_double("solver.damping", s.damping);
  s.fp_tol = take_double("solver.fp_tol", s.fp_tol);
  s.max_outer_iters =
      static_cast<long>(take_double("solver.max_outer_iters", s.max_outer_iters));
  s.dp.tol = take_double("solver.dp_tol", s.dp.tol);
  s.dp.max_iters =
      static_cast<long>(take_double("solver.dp_max_iters", s.dp.max_iters));
  s.dp.action_grid_step_fraction = take_double("solver.action_grid_fraction",
                                               s.dp.action_grid_step_fraction);
  s.dp.golden_refine =
      take_double("solver.golden_refine", s.dp.golden_refine ? 1.0 : 0.0) != 0.0;
  if (auto e = take("solver.inv_method")) {
    if (e->value == "power")
      s.invariant.method = InvariantMethod::PowerIteration;
    else if (e->value == "linear")
      s.invariant.method = InvariantMethod::DirectLinear;
    else
      throw ConfigError("solver.inv_method must be power or linear");
  }
  s.invariant.tol = take_double("solver.inv_tol", s.invariant.tol);
  s.invariant.max_iters =
      static_cast<long>(take_double("solver.inv_max_iters", s.invariant.max_iters));
  s.boundary_window =
      static_cast<int>(take_double("solver.boundary_window", s.boundary_window));
  s.boundary_mass_tol =
      take_double("solver.boundary_mass_tol", s.boundary_mass_tol);
  s.logit_on_cycle = take_double("solver.logit_on_cycle", 1.0) != 0.0;
  s.logit_temperature =
      take_double("solver.logit_temperature", s.logit_temperature);
  s.logit_anneal = take_double("solver.logit_anneal", s.logit_anneal);
  s.cycle_window =
      static_cast<long>(take_double("solver.cycle_window", s.cycle_window));

  SimulationSection& sim = config.simulation;
  if (auto e = take("simulation.m_values")) {
    sim.m_values.clear();
    for (double v : parse_list("simulation.m_values", *e))
      sim.m_values.push_back(static_cast<int>(std::lround(v)));
    if (sim.m_values.empty())
      throw ConfigError("simulation.m_values must list at least one m");
  }
  sim.horizon = static_cast<int>(take_double("simulation.horizon", sim.horizon));
  sim.replications =
      static_cast<int>(take_double("simulation.replications", sim.replications));
  sim.seed =
      static_cast<std::uint64_t>(take_double("simulation.seed", 1.0));
  if (auto e = take("simulation.equilibrium")) sim.equilibrium_path = e->value;
  if (auto e = take("simulation.deviation")) {
    if (e->value != "none" && e->value != "perturbed_br")
      throw ConfigError("simulation.deviation must be none or perturbed_br");
    sim.deviation = e->value;
  }
  sim.perturbation = take_double("simulation.perturbation", sim.perturbation);

  if (auto e = take("sweep.parameter")) {
    config.sweep.present = true;
    config.sweep.parameter = e->value;
    if (config.sweep.parameter.rfind("model.", 0) != 0)
      throw ConfigError("sweep.parameter must name a model.* key");
    const std::string bare = config.sweep.parameter.substr(6);
    if (!allowed.count(bare) && bare != "x_max" && bare != "beta")
      throw ConfigError("sweep.parameter \"" + config.sweep.parameter +
                        "\" is not a parameter of " + config.family);
  }
  if (auto e = take("sweep.values")) {
    if (!config.sweep.present)
      throw ConfigError("sweep.values given without sweep.parameter");
    config.sweep.values = parse_list("sweep.values", *e);
  }

  if (!entries.empty()) {
    const auto& [key, entry] = *entries.begin();
    std::ostringstream msg;
    msg << "line " << entry.line << ": unknown key \"" << key << "\"";
    throw ConfigError(msg.str());
  }
  return config;
}

ModelSpec build_model_from(const RunConfig& config) {
  return build_model(config.family, config.model_params);
}

}  // namespace sgame
