#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "sgame/action.hpp"
#include "sgame/model.hpp"
#include "sgame/population.hpp"

namespace sgame {

struct SimConfig {
  int m = 100;              // player count
  int horizon = 10;         // T
  std::uint64_t seed = 1;
  int replications = 1;
};

/// One replication of a finite-m run, recorded from a tagged player's view.
struct SimReplication {
  std::uint64_t seed = 0;                // derived replication seed
  Eigen::MatrixXd empirical;             // (T+1) x support: f^(m)_{-i,t}
  Eigen::VectorXd distance_1p;           // T+1
  Eigen::VectorXi tagged_state;          // T+1
  Eigen::VectorXd mean_state;            // T+1
  Eigen::VectorXd discounted_payoffs;    // per player, horizon-truncated
};

struct SimTrace {
  std::vector<SimReplication> replications;
};

/// Simulates m players under the oblivious strategy; transitions and payoffs
/// at time t use the time-t empirical population excluding the mover (all
/// players update simultaneously). Initial states are sampled independently
/// from f; mixed strategies draw a pure action each period. Identical
/// (model, mu, f, cfg) inputs give bit-identical traces.
SimTrace simulate_population(const ModelSpec& model,
                             const ObliviousStrategy& mu,
                             const PopulationState& f, const SimConfig& cfg);

struct GapStats {
  double mean = 0.0;
  double std_error = 0.0;
  Eigen::VectorXd per_replication;
  double truncation_bound = 0.0;  // beta^T K (1+x_max)^n / (1-beta)
};

/// Paired common-random-number estimate of the tagged player's value gain
/// from deviating to mu_dev while everyone else plays mu. The discounted sum
/// is truncated at cfg.horizon; the reported bound covers the tail.
GapStats deviation_gap(const ModelSpec& model, const ObliviousStrategy& mu,
                       const PopulationState& f,
                       const ObliviousStrategy& mu_dev, const SimConfig& cfg);

struct ConcentrationMetrics {
  double tail_mass_above_p95 = 0.0;  // mass strictly above the 0.95 quantile
  double mean_state = 0.0;
  double tail_moment_value = 0.0;    // eta = p + 1
  double boundary_mass_top5pct = 0.0;
};

ConcentrationMetrics concentration_metrics(const PopulationState& f,
                                           const ModelSpec& model);

/// The configured deviation family: the optimal oblivious response to f
/// mixed with the uniform population, mixing weight epsilon.
ObliviousStrategy perturbed_best_response(const ModelSpec& model,
                                          const PopulationState& f,
                                          double epsilon);

}  // namespace sgame
