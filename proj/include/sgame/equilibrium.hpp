#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sgame/dp.hpp"
#include "sgame/invariant.hpp"
#include "sgame/model.hpp"

namespace sgame {

struct SeSolveOptions {
  double damping = 0.5;          // lambda in (0, 1]
  double fp_tol = 1e-8;          // on ||Phi(f) - f|| in the 1-p norm
  long max_outer_iters = 500;
  // Policies fed to the invariant map are golden-refined by default: a pure
  // grid argmax jumps by whole grid cells as f moves, which leaves the
  // damped iteration cycling at the grid scale instead of converging. The
  // inner tolerance is tighter than the DP default because the stopping
  // jitter of value iteration passes through the policy into Phi.
  DpSolveOptions dp = refined_dp_defaults();
  static DpSolveOptions refined_dp_defaults() {
    DpSolveOptions d;
    d.golden_refine = true;
    d.tol = 1e-13;
    return d;
  }
  // Capped tighter than the standalone default: mid-iteration chains can be
  // metastable, and the direct-solve fallback is cheap at these sizes.
  InvariantOptions invariant = se_invariant_defaults();
  static InvariantOptions se_invariant_defaults() {
    InvariantOptions o;
    o.max_iters = 30000;
    return o;
  }
  int boundary_window = 10;      // top states counted as boundary mass
  double boundary_mass_tol = 1e-6;
  // Logit-smoothed best responses when pure responses cycle (finite-action
  // games only); temperature anneals toward zero.
  bool logit_on_cycle = true;
  double logit_temperature = 0.05;
  double logit_anneal = 0.7;
  long cycle_window = 25;
};

struct SolveReport {
  ObliviousStrategy strategy;
  PopulationState population;
  bool converged = false;
  long iterations = 0;
  double fp_gap = 0.0;
  double bellman_residual = 0.0;
  double invariance_residual = 0.0;
  double boundary_mass = 0.0;    // mass with ||x||_inf in the top window
  int boundary_window = 10;
  double tail_moment_value = 0.0;  // eta = p + 1
  double mean_state = 0.0;
  bool light_tailed = false;     // boundary_mass < boundary_mass_tol
  bool used_logit = false;
  // Set when an inner solver gave out mid-iteration (for instance a
  // metastable chain); the run is reported as not converged, never thrown.
  std::string divergence_note;
  std::optional<int> drift_threshold;
  double worst_drift_beyond = 0.0;
  std::vector<double> fp_trace;
  std::vector<double> tail_moment_trace;

  SolveReport(ObliviousStrategy mu, PopulationState f)
      : strategy(std::move(mu)), population(std::move(f)) {}
};

/// One application of Phi: best-respond to f, then take the invariant
/// distribution of the induced chain (over X x S for coupled-action games).
std::pair<PopulationState, ObliviousStrategy> phi_step(
    const ModelSpec& model, const PopulationState& f,
    const SeSolveOptions& opts = {});

/// Damped fixed-point iteration f <- (1-lambda) f + lambda Phi(f) from f0.
/// Non-convergence is reported in the result, never thrown; the residual
/// certificates are recomputed independently of the iteration path.
SolveReport solve_se(const ModelSpec& model, const PopulationState& f0,
                     const SeSolveOptions& opts = {});

SolveReport solve_se(const ModelSpec& model, const SeSolveOptions& opts = {});

/// Certificates for a candidate pair: the Bellman residual of the
/// policy-evaluated value against T_f, and the invariance residual
/// ||f P - f||_1 of the induced chain. Both vanish at an exact SE.
struct SeResidual {
  double bellman = 0.0;
  double invariance = 0.0;
};

SeResidual se_residual(const ModelSpec& model, const ObliviousStrategy& mu,
                       const PopulationState& f,
                       const DpSolveOptions& dp_opts = {});

/// Boundary mass: total mass at states whose max coordinate lies within
/// `window` levels of the truncation bound.
double boundary_mass(const PopulationState& f, int window);

struct ConditionCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

struct ConditionReport {
  std::string family;
  bool applicable = false;
  bool pass = false;
  std::vector<ConditionCheck> checks;
  // Generic drift diagnostic over the myopic action set A': worst-case
  // expected increment at large states, per probed action.
  std::vector<std::pair<double, double>> drift_table;  // (action, sup_f drift)
};

/// Evaluates the family's closed-form sufficient condition together with the
/// numeric negative-drift check over the myopic action set.
ConditionReport verify_conditions(const ModelSpec& model);

}  // namespace sgame
