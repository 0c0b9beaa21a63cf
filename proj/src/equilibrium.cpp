#include "sgame/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "sgame/errors.hpp"

namespace sgame {
namespace {

PopulationState invariant_step(const ModelSpec& model,
                               const ObliviousStrategy& mu,
                               const PopulationState& f,
                               const InvariantOptions& opts) {
  return model.coupled_through_actions
             ? invariant_state_action(model, mu, f, opts)
             : invariant_population(model, mu, f, opts);
}

// ||f T - f||_1 on the chain the pair (mu, f) induces: the state chain, or
// the X x S chain (x, s) -> (x', s' ~ mu(x')) for coupled-action games.
double invariance_residual(const ModelSpec& model, const ObliviousStrategy& mu,
                           const PopulationState& f) {
  const InducedChain chain = build_induced_chain(model, mu, f);
  if (!model.coupled_through_actions) {
    const Eigen::VectorXd& g = f.mass();
    return (chain.transition.transpose() * g - g).cwiseAbs().sum();
  }
  const int na = model.actions.n_pure();
  const Eigen::Index n = model.space.size();
  // Push the state marginal through P(.|x, s, f), action by action.
  const PopulationContext ctx = model.make_context(f);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXi x = model.space.state_of(i);
    for (int s = 0; s < na; ++s) {
      const double mass = f.mass()[i * na + s];
      if (mass == 0.0) continue;
      h += mass * apply_truncated_kernel(model, x,
                                         model.actions.pure_values()[s], ctx);
    }
  }
  double res = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd w = mu.mix_row(i, na);
    for (int s = 0; s < na; ++s)
      res += std::abs(h[i] * w[s] - f.mass()[i * na + s]);
  }
  return res;
}

double mean_state_level(const PopulationState& f) {
  const Eigen::VectorXd g = f.state_marginal();
  const Eigen::VectorXi& levels = f.space().inf_norms();
  double mean = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) mean += levels[i] * g[i];
  return mean;
}

ObliviousStrategy logit_response(const ModelSpec& model,
                                 const Eigen::MatrixXd& q_values,
                                 double temperature) {
  Eigen::MatrixXd mix(q_values.rows(), q_values.cols());
  for (Eigen::Index i = 0; i < q_values.rows(); ++i) {
    const double top = q_values.row(i).maxCoeff();
    Eigen::VectorXd w =
        ((q_values.row(i).array() - top) / temperature).exp().matrix();
    mix.row(i) = (w / w.sum()).transpose();
  }
  return ObliviousStrategy::mixed(std::move(mix), model.actions.pure_values());
}

}  // namespace

std::pair<PopulationState, ObliviousStrategy> phi_step(
    const ModelSpec& model, const PopulationState& f,
    const SeSolveOptions& opts) {
  DpResult dp = solve_value(model, f, opts.dp);
  PopulationState next = invariant_step(model, dp.policy, f, opts.invariant);
  return {std::move(next), std::move(dp.policy)};
}

double boundary_mass(const PopulationState& f, int window) {
  const Eigen::VectorXd g = f.state_marginal();
  const Eigen::VectorXi& levels = f.space().inf_norms();
  const int cutoff = f.space().bounds().maxCoeff() - window;
  double mass = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (levels[i] > cutoff) mass += g[i];
  return mass;
}

SeResidual se_residual(const ModelSpec& model, const ObliviousStrategy& mu,
                       const PopulationState& f,
                       const DpSolveOptions& dp_opts) {
  SeResidual r;
  const ValueFunction v_mu = policy_value(model, f, mu);
  r.bellman = bellman_residual(model, f, v_mu, dp_opts);
  r.invariance = invariance_residual(model, mu, f);
  return r;
}

SolveReport solve_se(const ModelSpec& model, const SeSolveOptions& opts) {
  return solve_se(model, model.zero_point_mass(), opts);
}

SolveReport solve_se(const ModelSpec& model, const PopulationState& f0,
                     const SeSolveOptions& opts) {
  if (!(opts.damping > 0.0 && opts.damping <= 1.0))
    throw ConfigError("damping (λ) must lie in (0, 1]");
  if (!(opts.fp_tol > 0.0)) throw ConfigError("fp_tol must be positive");
  if (opts.max_outer_iters < 1)
    throw ConfigError("max_outer_iters must be at least 1");

  const bool finite = model.actions.kind() == ActionSet::Kind::FinitePure;
  const int eta = model.norm_exponent + 1;

  PopulationState f = f0;
  std::vector<double> fp_trace;
  std::vector<double> moment_trace;

  // Stalls trigger two escalations: logit smoothing of the best response
  // (finite actions; its temperature tracks the remaining gap so the
  // smoothing bias vanishes as the iteration closes in), then halving of
  // the damping factor, which also tames undamped best-response cycles.
  // Independently, the directional derivative of Phi along the last step
  // picks the relaxation that cancels stiff oscillations outright.
  bool logit_active = false;
  bool used_logit = false;
  double activation_gap = 1.0;
  double damping = opts.damping;
  double slope_damping = opts.damping;
  double best_gap = std::numeric_limits<double>::infinity();
  long since_best = 0;
  std::optional<Eigen::VectorXd> prev_f_mass;
  std::optional<Eigen::VectorXd> prev_phi_mass;

  bool gap_met = false;
  long iterations = 0;
  double gap = std::numeric_limits<double>::infinity();
  std::string divergence_note;
  std::optional<ObliviousStrategy> mu_used;
  std::optional<PopulationState> phi_f;

  for (long it = 1; it <= opts.max_outer_iters; ++it) {
    DpResult dp = solve_value(model, f, opts.dp);
    mu_used = dp.policy;
    if (logit_active) {
      used_logit = true;
      const double temperature = std::max(
          opts.logit_temperature * std::min(1.0, best_gap / activation_gap),
          1e-12);
      mu_used = logit_response(model, dp.q_values, temperature);
    }
    std::optional<PopulationState> phi_next;
    try {
      phi_next = invariant_step(model, *mu_used, f, opts.invariant);
    } catch (const ConvergenceError& e) {
      divergence_note = e.what();
      iterations = it;
      break;
    }
    phi_f = std::move(phi_next);
    gap = one_p_distance(*phi_f, f);
    fp_trace.push_back(gap);
    moment_trace.push_back(tail_moment(*phi_f, eta));
    iterations = it;
    if (gap <= opts.fp_tol) {
      gap_met = true;
      break;
    }
    if (gap < 0.999 * best_gap) {
      best_gap = gap;
      since_best = 0;
    } else if (++since_best >= opts.cycle_window) {
      since_best = 0;
      if (finite && opts.logit_on_cycle && !logit_active) {
        logit_active = true;
        activation_gap = best_gap;
      } else {
        damping = std::max(0.5 * damping, opts.damping / 1024.0);
      }
    }
    if (prev_f_mass) {
      const Eigen::VectorXd df = f.mass() - *prev_f_mass;
      const double norm2 = df.squaredNorm();
      if (norm2 > 1e-30) {
        // rho estimates Phi's slope along the step; a strongly negative
        // slope means overshoot, and lambda = 1/(1 - rho) flattens it.
        const double rho = (phi_f->mass() - *prev_phi_mass).dot(df) / norm2;
        slope_damping = rho < 0.0
                            ? std::clamp(1.0 / (1.0 - rho),
                                         opts.damping / 4096.0, opts.damping)
                            : opts.damping;
      }
    }
    prev_f_mass = f.mass();
    prev_phi_mass = phi_f->mass();
    const double lambda = std::min(damping, slope_damping);
    f = f.with_mass((1.0 - lambda) * f.mass() + lambda * phi_f->mass());
  }

  SolveReport report(*mu_used, phi_f ? *phi_f : f);
  report.iterations = iterations;
  report.fp_gap = std::isfinite(gap) ? gap : -1.0;  // -1: no Phi step ran
  report.fp_trace = std::move(fp_trace);
  report.tail_moment_trace = std::move(moment_trace);
  report.used_logit = used_logit;
  report.divergence_note = std::move(divergence_note);

  const SeResidual res =
      se_residual(model, report.strategy, report.population, opts.dp);
  report.bellman_residual = res.bellman;
  report.invariance_residual = res.invariance;
  // A smoothed response can meet the fixed-point gap while still being a
  // poor response, so convergence also demands the optimality certificate.
  // The reported strategy is a best response to the penultimate iterate, so
  // its residual at the reported population scales with the gap times the
  // payoff's sensitivity to f; the gate leaves two orders of headroom.
  report.converged =
      gap_met && report.divergence_note.empty() &&
      report.bellman_residual <= 100.0 * std::max(opts.fp_tol, opts.dp.tol);
  report.boundary_window = opts.boundary_window;
  report.boundary_mass = boundary_mass(report.population, opts.boundary_window);
  report.light_tailed = report.boundary_mass < opts.boundary_mass_tol;
  report.tail_moment_value = tail_moment(report.population, eta);
  report.mean_state = mean_state_level(report.population);

  const DriftReport dr = drift(model, report.strategy, report.population);
  report.drift_threshold = dr.threshold_state;
  report.worst_drift_beyond = dr.worst_drift_beyond;
  return report;
}

ConditionReport verify_conditions(const ModelSpec& model) {
  ConditionReport r;
  r.family = model.family;

  auto add = [&r](const std::string& name, double value, double threshold,
                  bool pass, const std::string& detail = "") {
    r.checks.push_back({name, value, threshold, pass, detail});
  };
  auto drift_at = [&](double a) {
    const double v = model.drift_upper ? model.drift_upper(a) : 0.0;
    r.drift_table.emplace_back(a, v);
    return v;
  };

  if (model.family == "quality_ladder" || model.family == "spillover") {
    r.applicable = true;
    const double theta1 = model.params.at("theta1");
    add("theta1_decreasing_returns", theta1, 1.0, theta1 < 1.0,
        "requires theta1 < 1");
    if (model.family == "spillover") {
      const double gamma = model.params.at("gamma");
      const double threshold = model.aux.at("gamma_threshold");
      add("spillover_bound", gamma, threshold, gamma < threshold,
          "requires gamma < delta / ((1-delta) alpha sup zeta)");
    }
    const double d0 = drift_at(0.0);
    add("negative_drift_myopic", d0, 0.0, d0 < 0.0,
        "worst-case drift of the zero action");
  } else if (model.family == "learning_by_doing") {
    r.applicable = true;
    const double s_star = model.aux.at("s_star");
    add("s_star", s_star, 0.0, true, "argmax of s P(0) - C(x_max, s)");
    bool all_negative = true;
    for (Eigen::Index s = 0; s < model.actions.pure_values().size(); ++s) {
      const double sv = model.actions.pure_values()[s];
      if (sv > s_star) continue;
      all_negative = drift_at(sv) < 0.0 && all_negative;
    }
    add("negative_drift_up_to_s_star",
        r.drift_table.empty()
            ? 0.0
            : std::max_element(r.drift_table.begin(), r.drift_table.end(),
                               [](auto& a, auto& b) {
                                 return a.second < b.second;
                               })
                  ->second,
        0.0, all_negative, "drift of every output level up to s*");
  } else if (model.family == "supply_chain") {
    r.applicable = true;
    const double mean_d = model.aux.at("demand_mean");
    add("positive_demand_mean", mean_d, 0.0, mean_d > 0.0,
        "requires E[d] > 0");
    // Bidding zero is myopically optimal (Omega(s, f) = s) and procures
    // nothing, so the zero bid drains inventory at rate E[d].
    const PopulationState probe = model.zero_point_mass();
    const PopulationContext ctx = model.make_context(probe);
    const Eigen::VectorXi top =
        model.space.state_of(model.space.size() - 1);
    bool zero_myopic = true;
    for (Eigen::Index s = 0; s < model.actions.pure_values().size(); ++s)
      if (model.payoff(top, model.actions.pure_values()[s], ctx) >
          model.payoff(top, 0.0, ctx) + 1e-12)
        zero_myopic = false;
    add("zero_bid_myopically_optimal", zero_myopic ? 1.0 : 0.0, 1.0,
        zero_myopic, "payoff is maximized at s = 0 for fixed x, f");
    const double d0 = drift_at(0.0);
    add("negative_drift_zero_bid", d0, 0.0, d0 < 0.0,
        "inventory drift of the zero bid at large x");
  } else if (model.family == "consumer_learning") {
    r.applicable = true;
    const double d = model.params.at("effort_cost");
    const double threshold = model.aux.at("d_threshold");
    add("effort_cost_bound", d, threshold, d >= threshold,
        "requires d >= gamma exp(-gamma c0 + sigma_H^2 / 2)");
    const double a_top = std::max(0.0, model.aux.at("a_max_myopic"));
    for (int k = 0; k <= 4; ++k) drift_at(a_top * k / 4.0);
    const double worst = drift_at(a_top);
    add("negative_drift_myopic", worst, 0.0, worst < 0.0,
        "drift over the myopic action set [0, a_max_myopic]");
  } else {
    r.applicable = false;
    r.pass = false;
    return r;
  }

  r.pass = std::all_of(r.checks.begin(), r.checks.end(),
                       [](const ConditionCheck& c) { return c.pass; });
  return r;
}

}  // namespace sgame
