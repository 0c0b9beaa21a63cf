#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <string>

#include "sgame/action.hpp"
#include "sgame/population.hpp"
#include "sgame/state_space.hpp"

namespace sgame {

/// Finite distribution over state increments z with ||z||_inf <= M.
struct IncrementDistribution {
  Eigen::MatrixXi offsets;  // one increment per row
  Eigen::VectorXd probs;
};

/// Aggregates a model extracts from a population state once, so payoff and
/// kernel evaluations stay O(1) inside solver loops. Contents are
/// family-specific; per_state is indexed by state when present.
struct PopulationContext {
  Eigen::VectorXd scalars;
  Eigen::VectorXd per_state;
};

/// A game definition: payoff pi(x,a,f), increment kernel Q(z|x,a,f), action
/// set, discount, declared growth constants, and named parameters. Closures
/// are pure; a ModelSpec is immutable after construction.
struct ModelSpec {
  using ContextFn = std::function<PopulationContext(const PopulationState&)>;
  using PayoffFn = std::function<double(const Eigen::Ref<const Eigen::VectorXi>&,
                                        double, const PopulationContext&)>;
  using IncrementFn =
      std::function<IncrementDistribution(const Eigen::Ref<const Eigen::VectorXi>&,
                                          double, const PopulationContext&)>;

  TruncatedStateSpace space;
  ActionSet actions;
  double discount = 0.9;               // beta
  bool coupled_through_actions = false;
  int norm_exponent = 1;               // p for the 1-p norm machinery
  double growth_bound = 1.0;           // K in |pi| <= K (1+||x||_inf)^n
  int growth_exponent = 0;             // n, also the weighted-sup-norm weight
  int increment_bound = 1;             // M

  ContextFn make_context;
  PayoffFn payoff;
  IncrementFn increments;

  /// sup_f of the expected increment at large states for a given action
  /// (scalar-state models); empty when no closed form is declared.
  std::function<double(double)> drift_upper;

  /// Optional exact argmax of the Bellman right-hand side over [lo, hi],
  /// given discounted continuation values at the kernel's support points in
  /// the order the increment kernel lists them. Families with a closed-form
  /// first-order condition supply this; golden-section search over values
  /// can only localize an argmax to about sqrt(machine epsilon), which is
  /// too coarse for tight equilibrium fixed-point tolerances. Requires an
  /// action-independent kernel support.
  std::function<double(const Eigen::Ref<const Eigen::VectorXi>&,
                       const PopulationContext&, double lo, double hi,
                       const Eigen::VectorXd& continuation)>
      bellman_argmax;

  /// Closed-form myopic optimum a*(x,f) when the family has one.
  std::function<double(const Eigen::Ref<const Eigen::VectorXi>&,
                       const PopulationState&)>
      myopic_action;

  std::string family = "custom";
  std::map<std::string, double> params;
  std::map<std::string, double> aux;  // derived quantities for verify_conditions
  std::map<std::string, Eigen::VectorXd> tables;  // vector-valued inputs

  double payoff_at(Eigen::Index state_index, double a,
                   const PopulationState& f) const {
    return payoff(space.states().row(state_index).transpose(), a,
                  make_context(f));
  }

  /// Degenerate population placed at state index 0; handy for probes.
  PopulationState zero_point_mass() const;
};

/// Next-state distribution over the truncated box: increments are applied
/// and clamped per coordinate to [0, x_max], folding out-of-box mass onto
/// the boundary. Returns a dense row over state indices.
Eigen::VectorXd apply_truncated_kernel(const ModelSpec& model,
                                       const Eigen::Ref<const Eigen::VectorXi>& x,
                                       double action,
                                       const PopulationContext& ctx);

Eigen::VectorXd apply_truncated_kernel(const ModelSpec& model,
                                       const Eigen::Ref<const Eigen::VectorXi>& x,
                                       double action,
                                       const PopulationState& f);

/// Probes the model contract on a grid of (x, a, f) triples: kernel rows are
/// distributions, increments respect ||z||_inf <= M, and |pi| stays within
/// the declared growth bound. Throws ModelContractError on violation.
void check_model_contract(const ModelSpec& model, int max_states = 64,
                          int max_actions = 16);

}  // namespace sgame
