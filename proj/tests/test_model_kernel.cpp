#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sgame/models.hpp"
#include "sgame/norms.hpp"
#include "test_util.hpp"

using namespace sgame;

namespace {

QualityLadderParams small_ladder() {
  QualityLadderParams p;
  p.x_max = 20;
  return p;
}

}  // namespace

TEST_CASE("interior states shift the raw increment distribution") {
  const ModelSpec m = quality_ladder(small_ladder());
  const PopulationState f = m.zero_point_mass();
  const Eigen::VectorXi x = Eigen::VectorXi::Constant(1, 5);
  const Eigen::VectorXd row = apply_truncated_kernel(m, x, 1.0, f);
  // alpha=1, delta=0.2, a=1: up 0.4, stay 0.5, down 0.1.
  CHECK(row[6] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(row[5] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(row[4] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("downward mass folds onto the origin") {
  const ModelSpec m = quality_ladder(small_ladder());
  const PopulationState f = m.zero_point_mass();
  const Eigen::VectorXi x = Eigen::VectorXi::Zero(1);
  const Eigen::VectorXd row = apply_truncated_kernel(m, x, 0.0, f);
  // a=0: no up moves; down mass delta folds onto 0: stay + down = 1.
  CHECK(row[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(row.tail(row.size() - 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("upward mass folds onto the truncation bound") {
  const ModelSpec m = quality_ladder(small_ladder());
  const PopulationState f = m.zero_point_mass();
  const Eigen::VectorXi x = Eigen::VectorXi::Constant(1, 20);
  const Eigen::VectorXd row = apply_truncated_kernel(m, x, 1.0, f);
  CHECK(row[20] == doctest::Approx(0.4 + 0.5).epsilon(1e-12));
  CHECK(row[19] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("clamping is per coordinate on multi-dimensional boxes") {
  ModelSpec m;
  m.space = TruncatedStateSpace(2, 2);
  m.actions = ActionSet::finite_pure(Eigen::VectorXd::Zero(1).eval());
  m.increment_bound = 1;
  m.make_context = [](const PopulationState&) { return PopulationContext{}; };
  m.payoff = [](const Eigen::Ref<const Eigen::VectorXi>&, double,
                const PopulationContext&) { return 0.0; };
  m.increments = [](const Eigen::Ref<const Eigen::VectorXi>&, double,
                    const PopulationContext&) {
    IncrementDistribution q;
    q.offsets.resize(2, 2);
    q.offsets << 1, -1, -1, 1;
    q.probs = Eigen::VectorXd::Constant(2, 0.5);
    return q;
  };
  const PopulationState f =
      PopulationState::point_mass(m.space, 0, 1);
  Eigen::VectorXi corner(2);
  corner << 2, 0;  // +1 clamps in coord 0, -1 clamps in coord 1
  const Eigen::VectorXd row = apply_truncated_kernel(m, corner, 0.0, f);
  CHECK(row[m.space.index_of(corner)] == doctest::Approx(0.5));
  Eigen::VectorXi other(2);
  other << 1, 1;
  CHECK(row[m.space.index_of(other)] == doctest::Approx(0.5));
}

TEST_CASE("kernel rows are distributions on a sampled grid") {
  std::mt19937_64 rng(3);
  const ModelSpec m = quality_ladder(small_ladder());
  for (int rep = 0; rep < 10; ++rep) {
    const PopulationState f = testutil::random_population(m.space, 1, rng);
    const PopulationContext ctx = m.make_context(f);
    for (Eigen::Index i = 0; i < m.space.size(); i += 3)
      for (double a : {0.0, 0.3, 1.7, 5.0}) {
        const Eigen::VectorXd row =
            apply_truncated_kernel(m, m.space.state_of(i), a, ctx);
        CHECK(std::abs(row.sum() - 1.0) <= 1e-12);
        CHECK((row.array() >= 0.0).all());
      }
  }
}

TEST_CASE("f-independent kernels ignore the population exactly") {
  std::mt19937_64 rng(5);
  const ModelSpec m = quality_ladder(small_ladder());
  const PopulationState f1 = testutil::random_population(m.space, 1, rng);
  const PopulationState f2 = testutil::random_population(m.space, 1, rng);
  for (Eigen::Index i = 0; i < m.space.size(); ++i)
    for (double a : {0.0, 1.0, 2.5}) {
      const Eigen::VectorXd r1 =
          apply_truncated_kernel(m, m.space.state_of(i), a, f1);
      const Eigen::VectorXd r2 =
          apply_truncated_kernel(m, m.space.state_of(i), a, f2);
      CHECK(r1 == r2);  // bitwise
    }
}

TEST_CASE("increment bound violations are model-contract errors") {
  ModelSpec m = testutil::stay_model(Eigen::VectorXd::Zero(1).eval(), 0.5, 3);
  m.increments = [](const Eigen::Ref<const Eigen::VectorXi>&, double,
                    const PopulationContext&) {
    IncrementDistribution q;
    q.offsets = Eigen::MatrixXi::Constant(1, 1, 2);  // beyond M = 0
    q.probs = Eigen::VectorXd::Ones(1);
    return q;
  };
  const PopulationState f = PopulationState::point_mass(m.space, 0, 1);
  CHECK_THROWS_AS(
      apply_truncated_kernel(m, m.space.state_of(0), 0.0, f),
      ModelContractError);
}

TEST_CASE("all built-in families pass the model contract probes") {
  QualityLadderParams ql = small_ladder();
  check_model_contract(quality_ladder(ql));

  SpilloverParams sp;
  sp.base = ql;
  sp.gamma = 0.2;
  check_model_contract(spillover_oligopoly(sp));

  LearningByDoingParams lbd;
  lbd.x_max = 15;
  check_model_contract(learning_by_doing(lbd));

  SupplyChainParams sc;
  sc.x_max = 15;
  check_model_contract(supply_chain(sc));

  ConsumerLearningParams cl;
  cl.x_max = 20;
  check_model_contract(consumer_learning(cl));
}
