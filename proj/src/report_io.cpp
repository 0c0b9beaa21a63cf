#include "sgame/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sgame/errors.hpp"
#include "sgame/factory.hpp"

namespace sgame {
namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
  return v;
}

json vector_to_json(const Eigen::VectorXi& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

json model_to_json(const ModelSpec& model) {
  json j;
  j["family"] = model.family;
  j["params"] = model.params;
  for (const auto& [name, table] : model.tables)
    j["tables"][name] = vector_to_json(table);
  return j;
}

ModelSpec model_from_json(const json& j) {
  std::map<std::string, Eigen::VectorXd> tables;
  if (j.contains("tables"))
    for (const auto& [name, arr] : j.at("tables").items())
      tables[name] = vector_from_json(arr);
  return build_model(j.at("family").get<std::string>(),
                     j.at("params").get<std::map<std::string, double>>(),
                     tables);
}

json strategy_to_json(const ObliviousStrategy& mu) {
  json j;
  if (mu.is_mixed()) {
    j["kind"] = "mixed";
    j["pure_values"] = vector_to_json(mu.mix_values());
    json rows = json::array();
    for (Eigen::Index i = 0; i < mu.mix().rows(); ++i)
      rows.push_back(vector_to_json(Eigen::VectorXd(mu.mix().row(i).transpose())));
    j["mix"] = rows;
  } else if (mu.has_indices()) {
    j["kind"] = "pure_finite";
    j["indices"] = vector_to_json(mu.indices());
    j["actions"] = vector_to_json(mu.actions());
  } else {
    j["kind"] = "pure";
    j["actions"] = vector_to_json(mu.actions());
  }
  return j;
}

ObliviousStrategy strategy_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "mixed") {
    const json& rows = j.at("mix");
    Eigen::MatrixXd mix(rows.size(), j.at("pure_values").size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      mix.row(i) = vector_from_json(rows[i]).transpose();
    return ObliviousStrategy::mixed(std::move(mix),
                                    vector_from_json(j.at("pure_values")));
  }
  if (kind == "pure_finite") {
    const json& idx = j.at("indices");
    Eigen::VectorXi indices(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) indices[i] = idx[i].get<int>();
    // Recover the pure-action values from the recorded per-state actions.
    const Eigen::VectorXd actions = vector_from_json(j.at("actions"));
    int top = indices.maxCoeff();
    Eigen::VectorXd pure = Eigen::VectorXd::Zero(top + 1);
    for (Eigen::Index i = 0; i < indices.size(); ++i)
      pure[indices[i]] = actions[i];
    return ObliviousStrategy::pure_finite(std::move(indices), pure);
  }
  return ObliviousStrategy::pure_continuous(vector_from_json(j.at("actions")));
}

json population_to_json(const PopulationState& f) {
  json j;
  j["norm_exponent"] = f.norm_exponent();
  j["n_actions"] = f.n_actions();
  j["mass"] = vector_to_json(f.mass());
  return j;
}

PopulationState population_from_json(const json& j, const ModelSpec& model) {
  const int p = j.at("norm_exponent").get<int>();
  const int na = j.at("n_actions").get<int>();
  Eigen::VectorXd mass = vector_from_json(j.at("mass"));
  return na > 1 ? PopulationState::over_state_actions(model.space, na,
                                                      std::move(mass), p)
                : PopulationState::over_states(model.space, std::move(mass), p);
}

json solve_report_to_json(const ModelSpec& model, const SolveReport& report) {
  json j;
  j["model"] = model_to_json(model);
  j["strategy"] = strategy_to_json(report.strategy);
  j["population"] = population_to_json(report.population);
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["fp_gap"] = report.fp_gap;
  j["bellman_residual"] = report.bellman_residual;
  j["invariance_residual"] = report.invariance_residual;
  j["tail"] = {{"boundary_mass", report.boundary_mass},
               {"boundary_window", report.boundary_window},
               {"tail_moment", report.tail_moment_value},
               {"mean_state", report.mean_state},
               {"light_tailed", report.light_tailed}};
  j["used_logit"] = report.used_logit;
  j["divergence_note"] = report.divergence_note;
  if (report.drift_threshold) {
    j["drift"] = {{"threshold_state", *report.drift_threshold},
                  {"worst_drift_beyond", report.worst_drift_beyond}};
  } else {
    j["drift"] = {{"threshold_state", nullptr}};
  }
  j["fp_trace"] = report.fp_trace;
  j["tail_moment_trace"] = report.tail_moment_trace;
  return j;
}

LoadedEquilibrium solve_report_from_json(const json& j) {
  ModelSpec model = model_from_json(j.at("model"));
  SolveReport report(strategy_from_json(j.at("strategy")),
                     population_from_json(j.at("population"), model));
  report.converged = j.at("converged").get<bool>();
  report.iterations = j.at("iterations").get<long>();
  report.fp_gap = j.at("fp_gap").get<double>();
  report.bellman_residual = j.at("bellman_residual").get<double>();
  report.invariance_residual = j.at("invariance_residual").get<double>();
  const json& tail = j.at("tail");
  report.boundary_mass = tail.at("boundary_mass").get<double>();
  report.boundary_window = tail.at("boundary_window").get<int>();
  report.tail_moment_value = tail.at("tail_moment").get<double>();
  report.mean_state = tail.at("mean_state").get<double>();
  report.light_tailed = tail.at("light_tailed").get<bool>();
  report.used_logit = j.at("used_logit").get<bool>();
  report.divergence_note = j.at("divergence_note").get<std::string>();
  if (!j.at("drift").at("threshold_state").is_null()) {
    report.drift_threshold = j.at("drift").at("threshold_state").get<int>();
    report.worst_drift_beyond =
        j.at("drift").at("worst_drift_beyond").get<double>();
  }
  report.fp_trace = j.at("fp_trace").get<std::vector<double>>();
  report.tail_moment_trace =
      j.at("tail_moment_trace").get<std::vector<double>>();
  return {std::move(model), std::move(report)};
}

LoadedEquilibrium load_equilibrium_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open equilibrium artifact: " + path);
  json j;
  in >> j;
  return solve_report_from_json(j);
}

json condition_report_to_json(const ModelSpec& model,
                              const ConditionReport& report) {
  json j;
  j["model"] = model_to_json(model);
  j["family"] = report.family;
  j["applicable"] = report.applicable;
  j["pass"] = report.pass;
  json checks = json::array();
  for (const ConditionCheck& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"pass", c.pass},
                      {"detail", c.detail}});
  j["checks"] = checks;
  json drift = json::array();
  for (const auto& [action, value] : report.drift_table)
    drift.push_back({{"action", action}, {"sup_drift", value}});
  j["drift_table"] = drift;
  return j;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file: " + path);
  out << contents;
}

void write_population_csv(const std::string& path, const ModelSpec& model,
                          const PopulationState& f) {
  std::ostringstream out;
  out << "index";
  for (int l = 0; l < model.space.dim(); ++l) out << ",x" << l;
  if (f.coupled()) out << ",action";
  out << ",mass\n";
  for (Eigen::Index flat = 0; flat < f.size(); ++flat) {
    const Eigen::Index si = f.state_index_of(flat);
    out << flat;
    for (int l = 0; l < model.space.dim(); ++l)
      out << "," << model.space.states()(si, l);
    if (f.coupled())
      out << ","
          << format_double(model.actions.pure_values()[f.action_index_of(flat)]);
    out << "," << format_double(f.mass()[flat]) << "\n";
  }
  write_text_file(path, out.str());
}

void write_trace_csv(const std::string& path, const std::vector<int>& m_values,
                     const std::vector<SimTrace>& traces) {
  std::ostringstream out;
  out << "t,m,seed,distance_1p,tagged_state,mean_state\n";
  for (std::size_t k = 0; k < traces.size(); ++k) {
    for (const SimReplication& rep : traces[k].replications) {
      for (Eigen::Index t = 0; t < rep.distance_1p.size(); ++t) {
        out << t << "," << m_values[k] << "," << rep.seed << ","
            << format_double(rep.distance_1p[t]) << "," << rep.tagged_state[t]
            << "," << format_double(rep.mean_state[t]) << "\n";
      }
    }
  }
  write_text_file(path, out.str());
}

void write_sweep_csv(const std::string& path, const std::string& parameter,
                     const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << parameter
      << ",converged,failed,fp_gap,bellman_residual,invariance_residual,"
         "boundary_mass,tail_moment,mean_state,iterations,error\n";
  for (const SweepRow& r : rows) {
    out << format_double(r.value) << "," << (r.converged ? 1 : 0) << ","
        << (r.failed ? 1 : 0) << "," << format_double(r.fp_gap) << ","
        << format_double(r.bellman_residual) << ","
        << format_double(r.invariance_residual) << ","
        << format_double(r.boundary_mass) << ","
        << format_double(r.tail_moment_value) << ","
        << format_double(r.mean_state) << "," << r.iterations << ",\""
        << r.error << "\"\n";
  }
  write_text_file(path, out.str());
}

}  // namespace sgame
