#pragma once

#include <Eigen/Core>
#include <optional>

#include "sgame/action.hpp"
#include "sgame/model.hpp"
#include "sgame/population.hpp"

namespace sgame {

/// Row-stochastic transition matrix of the single-agent chain induced by an
/// oblivious strategy against a fixed population state.
struct InducedChain {
  TruncatedStateSpace space;
  Eigen::MatrixXd transition;
};

InducedChain build_induced_chain(const ModelSpec& model,
                                 const ObliviousStrategy& mu,
                                 const PopulationState& f);

enum class InvariantMethod { PowerIteration, DirectLinear };

struct InvariantOptions {
  InvariantMethod method = InvariantMethod::PowerIteration;
  double tol = 1e-13;     // on ||f'P - f'||_1
  long max_iters = 200000;
};

struct InvariantResult {
  Eigen::VectorXd dist;
  double residual = 0.0;
  long iterations = 0;
  // DirectLinear found the system singular beyond the normalization row and
  // fell back to power iteration.
  bool multiple_class_warning = false;
};

/// Invariant distribution of the chain. Power iteration damps each step with
/// the identity (same fixed points, no periodic orbits) and starts from the
/// uniform distribution, which is the selection rule when several invariant
/// distributions exist. DirectLinear solves (P' - I)f = 0 with a
/// normalization row and is the small-instance oracle.
InvariantResult invariant_distribution(const InducedChain& chain,
                                       const InvariantOptions& opts = {});

PopulationState invariant_population(const ModelSpec& model,
                                     const ObliviousStrategy& mu,
                                     const PopulationState& f,
                                     const InvariantOptions& opts = {});

/// Coupled-through-actions variant: computes the invariant distribution g of
/// the state chain under the mixed kernel sum_s mu(x)(s) P(.|x,s,f), then
/// lifts it to the state-action profile f'(x,s) = g(x) mu(x)(s).
PopulationState invariant_state_action(const ModelSpec& model,
                                       const ObliviousStrategy& mu,
                                       const PopulationState& f,
                                       const InvariantOptions& opts = {});

/// Per-state per-coordinate expected increments under mu, computed from the
/// model's raw increment kernel (no truncation), plus the smallest threshold
/// K such that every coordinate drifts strictly down whenever x_l >= K.
struct DriftReport {
  Eigen::MatrixXd expected_increment;  // n_states x dim
  std::optional<int> threshold_state;  // K-bar
  double worst_drift_beyond = 0.0;     // max drift over {x : some x_l >= K-bar}
};

DriftReport drift(const ModelSpec& model, const ObliviousStrategy& mu,
                  const PopulationState& f);

struct FosterLyapunovResult {
  bool holds = false;
  std::optional<Eigen::Index> witness;  // first violating state index
  // Smallest threshold that would make the criterion hold, if any.
  std::optional<int> minimal_threshold;
};

/// Checks E[U(x')|x] - U(x) <= -1 with U(x) = sum_l x_l^2 for every state
/// with ||x||_inf above the threshold.
FosterLyapunovResult foster_lyapunov_check(const InducedChain& chain,
                                           int threshold);

/// sum_x ||x||_eta^eta f(x) over the state marginal.
double tail_moment(const PopulationState& f, int eta);

}  // namespace sgame
