#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "sgame/equilibrium.hpp"
#include "sgame/models.hpp"
#include "sgame/simulate.hpp"
#include "test_util.hpp"

using namespace sgame;

namespace {

bool traces_identical(const SimTrace& a, const SimTrace& b) {
  if (a.replications.size() != b.replications.size()) return false;
  for (std::size_t r = 0; r < a.replications.size(); ++r) {
    const SimReplication& x = a.replications[r];
    const SimReplication& y = b.replications[r];
    if (x.seed != y.seed || x.empirical != y.empirical ||
        x.distance_1p != y.distance_1p || x.tagged_state != y.tagged_state ||
        x.mean_state != y.mean_state ||
        x.discounted_payoffs != y.discounted_payoffs)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("identity dynamics keep the point-mass population in place") {
  Eigen::VectorXd payoffs(1);
  payoffs << 0.5;
  const ModelSpec m = testutil::stay_model(payoffs, 0.9, 4);
  const PopulationState f = PopulationState::point_mass(m.space, 2, 1);
  const ObliviousStrategy mu = ObliviousStrategy::pure_finite(
      Eigen::VectorXi::Zero(m.space.size()).eval(), m.actions.pure_values());

  SimConfig cfg;
  cfg.m = 25;
  cfg.horizon = 6;
  cfg.replications = 3;
  cfg.seed = 99;
  const SimTrace trace = simulate_population(m, mu, f, cfg);
  for (const SimReplication& rep : trace.replications) {
    CHECK(rep.distance_1p.cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index t = 0; t < rep.tagged_state.size(); ++t)
      CHECK(rep.tagged_state[t] == 2);
  }
}

TEST_CASE("empirical populations are valid distributions at every step") {
  QualityLadderParams p;
  p.x_max = 15;
  const ModelSpec m = quality_ladder(p);
  const PopulationState f = PopulationState::uniform(m.space, 1);
  const ObliviousStrategy mu = ObliviousStrategy::pure_continuous(
      Eigen::VectorXd::Constant(m.space.size(), 0.5).eval());
  SimConfig cfg;
  cfg.m = 40;
  cfg.horizon = 8;
  cfg.replications = 2;
  const SimTrace trace = simulate_population(m, mu, f, cfg);
  for (const SimReplication& rep : trace.replications)
    for (Eigen::Index t = 0; t < rep.empirical.rows(); ++t) {
      CHECK(std::abs(rep.empirical.row(t).sum() - 1.0) <= 1e-12);
      CHECK((rep.empirical.row(t).array() >= 0.0).all());
    }
}

TEST_CASE("same seed gives identical traces, different seed differs") {
  QualityLadderParams p;
  p.x_max = 12;
  const ModelSpec m = quality_ladder(p);
  const PopulationState f = PopulationState::uniform(m.space, 1);
  const ObliviousStrategy mu = ObliviousStrategy::pure_continuous(
      Eigen::VectorXd::Constant(m.space.size(), 1.0).eval());
  SimConfig cfg;
  cfg.m = 30;
  cfg.horizon = 5;
  cfg.replications = 2;
  cfg.seed = 7;
  const SimTrace a = simulate_population(m, mu, f, cfg);
  const SimTrace b = simulate_population(m, mu, f, cfg);
  CHECK(traces_identical(a, b));
  cfg.seed = 8;
  const SimTrace c = simulate_population(m, mu, f, cfg);
  CHECK_FALSE(traces_identical(a, c));
}

TEST_CASE("growing m leaves earlier players' streams untouched") {
  QualityLadderParams p;
  p.x_max = 12;
  const ModelSpec m = quality_ladder(p);
  const PopulationState f = PopulationState::uniform(m.space, 1);
  const ObliviousStrategy mu = ObliviousStrategy::pure_continuous(
      Eigen::VectorXd::Constant(m.space.size(), 1.0).eval());
  SimConfig small;
  small.m = 20;
  small.horizon = 1;
  small.seed = 5;
  SimConfig large = small;
  large.m = 40;
  const SimTrace ts = simulate_population(m, mu, f, small);
  const SimTrace tl = simulate_population(m, mu, f, large);
  // Initial states are drawn from per-player streams before any coupling.
  CHECK(ts.replications[0].tagged_state[0] ==
        tl.replications[0].tagged_state[0]);
}

TEST_CASE("deviating to the same strategy gives exactly zero gap") {
  QualityLadderParams p;
  p.x_max = 12;
  const ModelSpec m = quality_ladder(p);
  const PopulationState f = PopulationState::uniform(m.space, 1);
  const ObliviousStrategy mu = ObliviousStrategy::pure_continuous(
      Eigen::VectorXd::Constant(m.space.size(), 0.8).eval());
  SimConfig cfg;
  cfg.m = 25;
  cfg.horizon = 6;
  cfg.replications = 5;
  const GapStats stats = deviation_gap(m, mu, f, mu, cfg);
  CHECK(stats.per_replication.cwiseAbs().maxCoeff() == 0.0);
  CHECK(stats.mean == 0.0);
  CHECK(stats.truncation_bound > 0.0);
}

TEST_CASE("stay-model gap is the truncated discounted payoff difference") {
  Eigen::VectorXd payoffs(2);
  payoffs << 1.0, 2.0;
  const double beta = 0.5;
  const ModelSpec m = testutil::stay_model(payoffs, beta, 1);
  const PopulationState f = PopulationState::point_mass(m.space, 0, 1);
  const ObliviousStrategy low = ObliviousStrategy::pure_finite(
      Eigen::VectorXi::Zero(m.space.size()).eval(), m.actions.pure_values());
  const ObliviousStrategy high = ObliviousStrategy::pure_finite(
      Eigen::VectorXi::Ones(m.space.size()).eval(), m.actions.pure_values());
  SimConfig cfg;
  cfg.m = 10;
  cfg.horizon = 7;
  cfg.replications = 4;
  const GapStats stats = deviation_gap(m, low, f, high, cfg);
  const double expected = (1.0 - std::pow(beta, cfg.horizon)) / (1.0 - beta);
  for (Eigen::Index r = 0; r < stats.per_replication.size(); ++r)
    CHECK(stats.per_replication[r] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(stats.std_error <= 1e-12);
}

TEST_CASE("tagged state distribution matches the t-step chain law") {
  QualityLadderParams p;
  p.x_max = 8;
  p.delta = 0.3;
  const ModelSpec m = quality_ladder(p);
  const PopulationState f = PopulationState::point_mass(m.space, 4, 1);
  const ObliviousStrategy mu = ObliviousStrategy::pure_continuous(
      Eigen::VectorXd::Constant(m.space.size(), 1.0).eval());

  SimConfig cfg;
  cfg.m = 4;
  cfg.horizon = 3;
  cfg.replications = 4000;
  cfg.seed = 11;
  const SimTrace trace = simulate_population(m, mu, f, cfg);

  // Kernel ignores f, so the tagged player's law is the chain pushforward.
  const InducedChain chain = build_induced_chain(m, mu, f);
  Eigen::VectorXd law = f.mass();
  for (int t = 0; t < cfg.horizon; ++t)
    law = (chain.transition.transpose() * law).eval();

  Eigen::VectorXd freq = Eigen::VectorXd::Zero(m.space.size());
  for (const SimReplication& rep : trace.replications)
    freq[rep.tagged_state[cfg.horizon]] += 1.0 / cfg.replications;

  for (Eigen::Index x = 0; x < m.space.size(); ++x) {
    const double se =
        std::sqrt(std::max(law[x] * (1.0 - law[x]), 1e-12) / cfg.replications);
    CHECK(std::abs(freq[x] - law[x]) <= 3.0 * se + 1e-9);
  }
}

TEST_CASE("population distance shrinks with the player count") {
  QualityLadderParams p;
  p.x_max = 20;
  const ModelSpec m = quality_ladder(p);
  // A fixed, moderately spread population and policy.
  Eigen::VectorXd mass(21);
  for (int x = 0; x <= 20; ++x) mass[x] = std::pow(0.7, x);
  mass /= mass.sum();
  const PopulationState f = PopulationState::over_states(m.space, mass, 1);
  const ObliviousStrategy mu = ObliviousStrategy::pure_continuous(
      Eigen::VectorXd::Constant(m.space.size(), 0.9).eval());

  auto median_distance = [&](int players) {
    SimConfig cfg;
    cfg.m = players;
    cfg.horizon = 5;
    cfg.replications = 15;
    cfg.seed = 3;
    const SimTrace trace = simulate_population(m, mu, f, cfg);
    std::vector<double> finals;
    for (const SimReplication& rep : trace.replications)
      finals.push_back(rep.distance_1p[cfg.horizon]);
    std::sort(finals.begin(), finals.end());
    return finals[finals.size() / 2];
  };
  CHECK(median_distance(500) < median_distance(10));
}

TEST_CASE("concentration metrics on simple distributions") {
  QualityLadderParams p;
  p.x_max = 9;
  const ModelSpec m = quality_ladder(p);

  const ConcentrationMetrics at0 =
      concentration_metrics(m.zero_point_mass(), m);
  CHECK(at0.tail_mass_above_p95 == 0.0);
  CHECK(at0.mean_state == 0.0);
  CHECK(at0.tail_moment_value == 0.0);

  const ConcentrationMetrics unif =
      concentration_metrics(PopulationState::uniform(m.space, 1), m);
  CHECK(unif.mean_state == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(unif.boundary_mass_top5pct == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("perturbed best response degenerates to the best response at 0") {
  QualityLadderParams p;
  p.x_max = 15;
  const ModelSpec m = quality_ladder(p);
  const PopulationState f = m.zero_point_mass();
  const ObliviousStrategy exact = solve_value(m, f).policy;
  const ObliviousStrategy same = perturbed_best_response(m, f, 0.0);
  CHECK(exact.actions() == same.actions());
  const ObliviousStrategy other = perturbed_best_response(m, f, 0.5);
  CHECK(other.actions() != exact.actions());
}
