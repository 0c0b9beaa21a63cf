#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sgame/invariant.hpp"
#include "sgame/models.hpp"
#include "sgame/norms.hpp"
#include "test_util.hpp"

using namespace sgame;

namespace {

// Scalar birth-death chain with clamped boundaries.
InducedChain birth_death(int x_max, double up, double down) {
  TruncatedStateSpace space(1, x_max);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(x_max + 1, x_max + 1);
  for (int x = 0; x <= x_max; ++x) {
    const int lo = std::max(x - 1, 0);
    const int hi = std::min(x + 1, x_max);
    t(x, hi) += up;
    t(x, lo) += down;
    t(x, x) += 1.0 - up - down;
  }
  return {space, std::move(t)};
}

}  // namespace

TEST_CASE("identity chain keeps the uniform selection") {
  TruncatedStateSpace space(1, 9);
  InducedChain chain{space, Eigen::MatrixXd::Identity(10, 10)};
  const InvariantResult r = invariant_distribution(chain);
  CHECK((r.dist.array() - 0.1).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(r.residual <= 1e-13);

  InvariantOptions direct;
  direct.method = InvariantMethod::DirectLinear;
  const InvariantResult rd = invariant_distribution(chain, direct);
  CHECK(rd.multiple_class_warning);
  CHECK((rd.dist.array() - 0.1).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("birth-death chain has the geometric invariant distribution") {
  const InducedChain chain = birth_death(20, 0.2, 0.4);
  const InvariantResult power = invariant_distribution(chain);

  InvariantOptions direct_opts;
  direct_opts.method = InvariantMethod::DirectLinear;
  const InvariantResult direct = invariant_distribution(chain, direct_opts);
  CHECK_FALSE(direct.multiple_class_warning);
  CHECK((power.dist - direct.dist).cwiseAbs().maxCoeff() < 1e-10);

  // Detailed balance: f(x) proportional to 0.5^x.
  Eigen::VectorXd geometric(21);
  for (int x = 0; x <= 20; ++x) geometric[x] = std::pow(0.5, x);
  geometric /= geometric.sum();
  CHECK((power.dist - geometric).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("idle quality ladder collapses to a point mass at zero") {
  QualityLadderParams p;
  p.x_max = 15;
  const ModelSpec m = quality_ladder(p);
  const ObliviousStrategy idle =
      ObliviousStrategy::pure_continuous(Eigen::VectorXd::Zero(16).eval());
  const PopulationState f = PopulationState::uniform(m.space, 1);
  const PopulationState inv = invariant_population(m, idle, f);
  CHECK(inv.mass()[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("power iteration matches the direct solve on sampled chains") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 4 + static_cast<int>(unif(rng) * 30);
    TruncatedStateSpace space(1, n - 1);
    Eigen::MatrixXd t(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) t(i, j) = unif(rng) + 1e-4;
      t.row(i) /= t.row(i).sum();
    }
    const InducedChain chain{space, t};
    const InvariantResult power = invariant_distribution(chain);
    InvariantOptions direct;
    direct.method = InvariantMethod::DirectLinear;
    const InvariantResult linear = invariant_distribution(chain, direct);
    CHECK((power.dist - linear.dist).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(power.residual <= 1e-13);
  }
}

TEST_CASE("state-action invariant of a pure strategy sits on its graph") {
  LearningByDoingParams p;
  p.x_max = 9;
  p.s_max = 2;
  p.delta = 0.9;  // every output level drifts down: fast mixing
  const ModelSpec m = learning_by_doing(p);
  Eigen::VectorXi choice(10);
  choice << 0, 1, 2, 2, 1, 0, 1, 2, 0, 1;
  const ObliviousStrategy mu =
      ObliviousStrategy::pure_finite(choice, m.actions.pure_values());
  const PopulationState f = m.zero_point_mass();
  const PopulationState inv = invariant_state_action(m, mu, f);
  for (Eigen::Index flat = 0; flat < inv.size(); ++flat) {
    const Eigen::Index x = inv.state_index_of(flat);
    const Eigen::Index s = inv.action_index_of(flat);
    if (s != choice[x]) CHECK(inv.mass()[flat] == 0.0);
  }
  const Eigen::VectorXd g = inv.state_marginal();
  CHECK(g.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform mixing splits the state marginal evenly") {
  LearningByDoingParams p;
  p.x_max = 4;
  p.s_max = 1;
  const ModelSpec m = learning_by_doing(p);
  Eigen::MatrixXd mix = Eigen::MatrixXd::Constant(5, 2, 0.5);
  const ObliviousStrategy mu =
      ObliviousStrategy::mixed(mix, m.actions.pure_values());
  const PopulationState inv =
      invariant_state_action(m, mu, m.zero_point_mass());
  const Eigen::VectorXd g = inv.state_marginal();
  for (Eigen::Index x = 0; x < 5; ++x) {
    CHECK(inv.mass()[x * 2 + 0] == doctest::Approx(0.5 * g[x]).epsilon(1e-12));
    CHECK(inv.mass()[x * 2 + 1] == doctest::Approx(0.5 * g[x]).epsilon(1e-12));
  }
}

TEST_CASE("state-action invariant matches the full XxS linear-solve oracle") {
  LearningByDoingParams p;
  p.x_max = 9;   // 10 states
  p.s_max = 2;   // 3 actions
  p.delta = 0.5;
  const ModelSpec m = learning_by_doing(p);

  Eigen::MatrixXd mix(10, 3);
  for (int x = 0; x < 10; ++x) {
    Eigen::Vector3d row(1.0 + x % 3, 2.0, 1.0 + (x % 2));
    mix.row(x) = (row / row.sum()).transpose();
  }
  const ObliviousStrategy mu =
      ObliviousStrategy::mixed(mix, m.actions.pure_values());
  std::mt19937_64 rng(29);
  const PopulationState f =
      testutil::random_state_action_population(m.space, 3, 1, rng);

  const PopulationState inv = invariant_state_action(m, mu, f);
  const Eigen::VectorXd oracle = testutil::xs_invariant_oracle(m, mu, f);
  CHECK((inv.mass() - oracle).cwiseAbs().maxCoeff() < 1e-9);

  // Action marginals at supported states equal mu(x) exactly.
  const Eigen::VectorXd g = inv.state_marginal();
  for (int x = 0; x < 10; ++x) {
    if (g[x] <= 0.0) continue;
    for (int s = 0; s < 3; ++s)
      CHECK(inv.mass()[x * 3 + s] / g[x] ==
            doctest::Approx(mix(x, s)).epsilon(1e-12));
  }
}

TEST_CASE("drift report reproduces the ladder closed forms") {
  QualityLadderParams p;
  p.x_max = 10;
  const ModelSpec m = quality_ladder(p);
  const PopulationState f = m.zero_point_mass();

  const ObliviousStrategy idle =
      ObliviousStrategy::pure_continuous(Eigen::VectorXd::Zero(11).eval());
  const DriftReport idle_drift = drift(m, idle, f);
  for (Eigen::Index i = 0; i < 11; ++i)
    CHECK(idle_drift.expected_increment(i, 0) ==
          doctest::Approx(-0.2).epsilon(1e-12));
  REQUIRE(idle_drift.threshold_state.has_value());
  CHECK(*idle_drift.threshold_state == 0);
  CHECK(idle_drift.worst_drift_beyond < 0.0);

  const ObliviousStrategy invest = ObliviousStrategy::pure_continuous(
      Eigen::VectorXd::Ones(11).eval());
  const DriftReport invest_drift = drift(m, invest, f);
  for (Eigen::Index i = 0; i < 11; ++i)
    CHECK(invest_drift.expected_increment(i, 0) ==
          doctest::Approx(0.3).epsilon(1e-12));  // 0.4 up - 0.1 down
  CHECK_FALSE(invest_drift.threshold_state.has_value());
}

TEST_CASE("spillover drift sits at the knife edge of the threshold") {
  SpilloverParams sp;
  sp.base.x_max = 10;
  sp.gamma = 0.25;
  const ModelSpec m = spillover_oligopoly(sp);
  // Population entirely above x = 0: the spillover at 0 is the full mass.
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(11);
  mass[5] = 1.0;
  const PopulationState f = PopulationState::over_states(m.space, mass, 1);
  const ObliviousStrategy idle =
      ObliviousStrategy::pure_continuous(Eigen::VectorXd::Zero(11).eval());
  const DriftReport report = drift(m, idle, f);
  // e = 0.25 at x=0: drift (1-0.2)*0.25/1.25 - 0.2/1.25 = 0 exactly.
  CHECK(report.expected_increment(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(m.drift_upper(0.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("drift ignores the truncation bound away from the boundary") {
  QualityLadderParams p;
  p.x_max = 12;
  QualityLadderParams bigger = p;
  bigger.x_max = 24;
  const ModelSpec small_m = quality_ladder(p);
  const ModelSpec big_m = quality_ladder(bigger);
  const ObliviousStrategy mu_small = ObliviousStrategy::pure_continuous(
      Eigen::VectorXd::Constant(13, 0.7).eval());
  const ObliviousStrategy mu_big = ObliviousStrategy::pure_continuous(
      Eigen::VectorXd::Constant(25, 0.7).eval());
  const DriftReport ds = drift(small_m, mu_small, small_m.zero_point_mass());
  const DriftReport db = drift(big_m, mu_big, big_m.zero_point_mass());
  for (int x = 0; x <= 12; ++x)
    CHECK(ds.expected_increment(x, 0) == db.expected_increment(x, 0));
}

TEST_CASE("foster-lyapunov criterion on down-biased and identity chains") {
  const InducedChain down = birth_death(30, 0.2, 0.4);
  // E[U(x')] - U(x) = -0.4 x + 0.6 <= -1 for x >= 4.
  const FosterLyapunovResult ok = foster_lyapunov_check(down, 4);
  CHECK(ok.holds);
  REQUIRE(ok.minimal_threshold.has_value());
  CHECK(*ok.minimal_threshold == 3);

  const FosterLyapunovResult tight = foster_lyapunov_check(down, 2);
  CHECK_FALSE(tight.holds);
  REQUIRE(tight.witness.has_value());
  CHECK(*tight.witness == 3);

  TruncatedStateSpace space(1, 5);
  const InducedChain identity{space, Eigen::MatrixXd::Identity(6, 6)};
  CHECK_FALSE(foster_lyapunov_check(identity, 0).holds);
}

TEST_CASE("power iteration converges fast on drift-stable chains") {
  const InducedChain chain = birth_death(60, 0.2, 0.4);
  REQUIRE(foster_lyapunov_check(chain, 4).holds);
  InvariantOptions opts;
  opts.tol = 1e-10;
  opts.max_iters = 100000;
  const InvariantResult r = invariant_distribution(chain, opts);
  CHECK(r.iterations < 100000);
  CHECK(r.residual <= 1e-10);
}

TEST_CASE("tail moments: examples and the geometric closed form") {
  TruncatedStateSpace line(1, 20);
  CHECK(tail_moment(PopulationState::point_mass(line, 0, 1), 3) == 0.0);

  Eigen::VectorXd two = Eigen::VectorXd::Zero(21);
  two[1] = 0.5;
  two[3] = 0.5;
  CHECK(tail_moment(PopulationState::over_states(line, two, 1), 2) ==
        doctest::Approx(5.0).epsilon(1e-12));

  Eigen::VectorXd geometric(21);
  for (int x = 0; x <= 20; ++x) geometric[x] = std::pow(0.5, x);
  const double z = geometric.sum();
  geometric /= z;
  // Finite geometric-derivative sum: sum_{x=0}^{n} x r^x with r = 1/2.
  const double r = 0.5;
  const int n = 20;
  const double weighted =
      r * (1.0 - (n + 1) * std::pow(r, n) + n * std::pow(r, n + 1)) /
      ((1.0 - r) * (1.0 - r));
  CHECK(tail_moment(PopulationState::over_states(line, geometric, 1), 1) ==
        doctest::Approx(weighted / z).epsilon(1e-9));
}
