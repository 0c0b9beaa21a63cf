#include "sgame/simulate.hpp"

#include <cmath>
#include <map>

#include "sgame/dp.hpp"
#include "sgame/errors.hpp"
#include "sgame/invariant.hpp"
#include "sgame/norms.hpp"
#include "sgame/rng.hpp"

namespace sgame {
namespace {

struct PlayerState {
  int state = 0;   // state index
  int action = 0;  // pure-action index (finite sets), else -1
  double action_value = 0.0;
};

// Draw the period action; every player consumes exactly one uniform per
// period regardless of strategy kind, so paired runs stay stream-aligned.
void draw_action(const ModelSpec& model, const ObliviousStrategy& mu,
                 PlayerState& p, Rng& rng) {
  const double u = rng.next_unit();
  if (mu.is_mixed()) {
    const Eigen::VectorXd row = mu.mix_row(p.state, model.actions.n_pure());
    double acc = 0.0;
    p.action = static_cast<int>(row.size()) - 1;
    for (Eigen::Index s = 0; s < row.size(); ++s) {
      acc += row[s];
      if (u < acc) {
        p.action = static_cast<int>(s);
        break;
      }
    }
    p.action_value = mu.mix_values()[p.action];
  } else if (mu.has_indices()) {
    p.action = mu.action_index(p.state);
    p.action_value = mu.action(p.state);
  } else {
    p.action = -1;
    p.action_value = mu.action(p.state);
  }
}

int sample_next_state(const ModelSpec& model, const PlayerState& p,
                      const PopulationContext& ctx, Rng& rng) {
  const Eigen::VectorXi x = model.space.state_of(p.state);
  const IncrementDistribution q = model.increments(x, p.action_value, ctx);
  const Eigen::Index pick = rng.sample(q.probs);
  Eigen::VectorXi next(model.space.dim());
  for (int l = 0; l < model.space.dim(); ++l)
    next[l] = std::clamp(x[l] + q.offsets(pick, l), 0, model.space.bound(l));
  return static_cast<int>(model.space.index_of(next));
}

int sample_initial_state(const PopulationState& f, Rng& rng) {
  const Eigen::Index flat = rng.sample(f.mass());
  return static_cast<int>(f.state_index_of(flat));
}

// One finite-m replication. The tagged player is index 0 and may follow a
// different strategy from the rest.
SimReplication run_replication(const ModelSpec& model,
                               const ObliviousStrategy& mu_tagged,
                               const ObliviousStrategy& mu_others,
                               const PopulationState& f, const SimConfig& cfg,
                               int replication) {
  const int m = cfg.m;
  const int horizon = cfg.horizon;
  const bool coupled = model.coupled_through_actions;
  const int na = coupled ? model.actions.n_pure() : 1;
  const Eigen::Index support = model.space.size() * na;

  SimReplication rep;
  rep.seed = Rng::replication_seed(cfg.seed, replication);
  rep.empirical.resize(horizon + 1, support);
  rep.distance_1p.resize(horizon + 1);
  rep.tagged_state.resize(horizon + 1);
  rep.mean_state.resize(horizon + 1);
  rep.discounted_payoffs = Eigen::VectorXd::Zero(m);

  std::vector<Rng> streams;
  streams.reserve(m);
  for (int j = 0; j < m; ++j)
    streams.push_back(Rng::player_stream(cfg.seed, replication, j));

  std::vector<PlayerState> players(m);
  for (int j = 0; j < m; ++j)
    players[j].state = sample_initial_state(f, streams[j]);

  const Eigen::VectorXi& levels = model.space.inf_norms();
  double discount_factor = 1.0;

  for (int t = 0; t <= horizon; ++t) {
    for (int j = 0; j < m; ++j)
      draw_action(model, j == 0 ? mu_tagged : mu_others, players[j],
                  streams[j]);

    Eigen::VectorXd counts = Eigen::VectorXd::Zero(support);
    for (const PlayerState& p : players)
      counts[p.state * na + std::max(p.action, 0)] += 1.0;

    // Record the population from the tagged player's viewpoint.
    {
      Eigen::VectorXd excl = counts;
      excl[players[0].state * na + std::max(players[0].action, 0)] -= 1.0;
      excl /= static_cast<double>(m - 1);
      rep.empirical.row(t) = excl.transpose();
      rep.distance_1p[t] = f.p_weights().dot((excl - f.mass()).cwiseAbs());
      rep.tagged_state[t] = players[0].state;
      double mean = 0.0;
      for (Eigen::Index flat = 0; flat < support; ++flat)
        mean += excl[flat] * levels[flat / na];
      rep.mean_state[t] = mean;
    }
    if (t == horizon) break;

    // Players sharing a (state, action) cell see the same leave-one-out
    // population, so contexts are built once per occupied cell.
    std::map<Eigen::Index, PopulationContext> contexts;
    auto context_for = [&](const PlayerState& p) -> const PopulationContext& {
      const Eigen::Index cell = p.state * na + std::max(p.action, 0);
      auto it = contexts.find(cell);
      if (it == contexts.end()) {
        Eigen::VectorXd excl = counts;
        excl[cell] -= 1.0;
        excl /= static_cast<double>(m - 1);
        PopulationState view =
            coupled ? PopulationState::over_state_actions(
                          model.space, na, std::move(excl),
                          f.norm_exponent())
                    : PopulationState::over_states(model.space,
                                                   std::move(excl),
                                                   f.norm_exponent());
        it = contexts.emplace(cell, model.make_context(view)).first;
      }
      return it->second;
    };

    for (int j = 0; j < m; ++j) {
      const PopulationContext& ctx = context_for(players[j]);
      const Eigen::VectorXi x = model.space.state_of(players[j].state);
      rep.discounted_payoffs[j] +=
          discount_factor * model.payoff(x, players[j].action_value, ctx);
    }

    // Simultaneous update: every transition reads time-t states and the
    // time-t empirical population.
    std::vector<int> next(m);
    for (int j = 0; j < m; ++j)
      next[j] =
          sample_next_state(model, players[j], context_for(players[j]),
                            streams[j]);
    for (int j = 0; j < m; ++j) players[j].state = next[j];
    discount_factor *= model.discount;
  }
  return rep;
}

}  // namespace

SimTrace simulate_population(const ModelSpec& model,
                             const ObliviousStrategy& mu,
                             const PopulationState& f, const SimConfig& cfg) {
  if (cfg.m < 2) throw ConfigError("simulation needs m >= 2 players");
  if (cfg.horizon < 1) throw ConfigError("simulation horizon must be >= 1");
  if (cfg.replications < 1)
    throw ConfigError("simulation needs at least one replication");
  SimTrace trace;
  trace.replications.reserve(cfg.replications);
  for (int r = 0; r < cfg.replications; ++r)
    trace.replications.push_back(run_replication(model, mu, mu, f, cfg, r));
  return trace;
}

GapStats deviation_gap(const ModelSpec& model, const ObliviousStrategy& mu,
                       const PopulationState& f,
                       const ObliviousStrategy& mu_dev, const SimConfig& cfg) {
  if (cfg.m < 2) throw ConfigError("simulation needs m >= 2 players");
  GapStats stats;
  stats.per_replication.resize(cfg.replications);
  for (int r = 0; r < cfg.replications; ++r) {
    const SimReplication deviate =
        run_replication(model, mu_dev, mu, f, cfg, r);
    const SimReplication conform = run_replication(model, mu, mu, f, cfg, r);
    stats.per_replication[r] =
        deviate.discounted_payoffs[0] - conform.discounted_payoffs[0];
  }
  stats.mean = stats.per_replication.mean();
  if (cfg.replications > 1) {
    const double var =
        (stats.per_replication.array() - stats.mean).square().sum() /
        (cfg.replications - 1);
    stats.std_error = std::sqrt(var / cfg.replications);
  }
  const double top = model.space.bounds().maxCoeff();
  stats.truncation_bound = std::pow(model.discount, cfg.horizon) *
                           model.growth_bound *
                           std::pow(1.0 + top, model.growth_exponent) /
                           (1.0 - model.discount);
  return stats;
}

ConcentrationMetrics concentration_metrics(const PopulationState& f,
                                           const ModelSpec& model) {
  ConcentrationMetrics out;
  const Eigen::VectorXd g = f.state_marginal();
  const Eigen::VectorXi& levels = f.space().inf_norms();
  const int top = f.space().bounds().maxCoeff();

  Eigen::VectorXd mass_per_level = Eigen::VectorXd::Zero(top + 1);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    mass_per_level[levels[i]] += g[i];
    out.mean_state += levels[i] * g[i];
  }
  double cum = 0.0;
  int q95 = top;
  for (int level = 0; level <= top; ++level) {
    cum += mass_per_level[level];
    if (cum >= 0.95) {
      q95 = level;
      break;
    }
  }
  for (int level = q95 + 1; level <= top; ++level)
    out.tail_mass_above_p95 += mass_per_level[level];
  const int boundary_cutoff = static_cast<int>(std::floor(0.95 * top));
  for (int level = boundary_cutoff + 1; level <= top; ++level)
    out.boundary_mass_top5pct += mass_per_level[level];
  out.tail_moment_value = tail_moment(f, model.norm_exponent + 1);
  return out;
}

ObliviousStrategy perturbed_best_response(const ModelSpec& model,
                                          const PopulationState& f,
                                          double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ConfigError("perturbation weight must lie in [0, 1]");
  const Eigen::Index n = f.size();
  const Eigen::VectorXd uniform =
      Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const PopulationState perturbed =
      f.with_mass((1.0 - epsilon) * f.mass() + epsilon * uniform);
  return solve_value(model, perturbed).policy;
}

}  // namespace sgame
