#pragma once

#include <Eigen/Core>
#include <vector>

#include "sgame/model.hpp"
#include "sgame/norms.hpp"

namespace sgame {

/// Value vector over a truncated state space, compared in the weighted sup
/// norm with weight (1 + ||x||_inf)^n.
struct ValueFunction {
  TruncatedStateSpace space;
  Eigen::VectorXd values;
  int weight_exponent = 0;  // n
};

inline double weighted_sup_distance(const ValueFunction& a,
                                    const ValueFunction& b) {
  return weighted_sup_distance(a.values, b.values, a.space.inf_norms(),
                               a.weight_exponent);
}

struct DpSolveOptions {
  double tol = 1e-10;        // stopping threshold in the weighted sup norm
  long max_iters = 20000;
  // Continuous sets only; 0 defers to the ActionSet's own resolution.
  double action_grid_step_fraction = 0.0;
  bool golden_refine = false;  // refine the reported policy off the grid
};

struct DpResult {
  ValueFunction value;
  ObliviousStrategy policy;
  double residual = 0.0;          // weighted-sup distance between V and T_f V
  long iterations = 0;
  std::vector<double> sweep_diffs;
  Eigen::MatrixXd q_values;       // finite actions: Bellman RHS per (x, s)
};

/// One application of the Bellman operator T_f. Finite action sets take an
/// exact max over S; continuous sets a grid max (golden-section refinement
/// when requested).
ValueFunction bellman_apply(const ModelSpec& model, const PopulationState& f,
                            const ValueFunction& v,
                            const DpSolveOptions& opts = {});

/// Value iteration from V = 0 to the optimal oblivious value function, with
/// the greedy policy extracted against the returned V (ties broken toward
/// the lowest action index). Throws ConvergenceError past max_iters.
DpResult solve_value(const ModelSpec& model, const PopulationState& f,
                     const DpSolveOptions& opts = {});

/// weighted_sup_distance(V, T_f V).
double bellman_residual(const ModelSpec& model, const PopulationState& f,
                        const ValueFunction& v,
                        const DpSolveOptions& opts = {});

/// Policy evaluation: the fixed point of V = pi_mu + beta P_mu V, solved
/// directly on the truncated space.
ValueFunction policy_value(const ModelSpec& model, const PopulationState& f,
                           const ObliviousStrategy& mu);

}  // namespace sgame
