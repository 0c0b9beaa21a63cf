#include "sgame/model.hpp"

#include <cmath>
#include <sstream>

#include "sgame/errors.hpp"

namespace sgame {

PopulationState ModelSpec::zero_point_mass() const {
  if (!coupled_through_actions)
    return PopulationState::point_mass(space, 0, norm_exponent);
  const int na = actions.n_pure();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(space.size() * na);
  m[0] = 1.0;  // state 0, lowest-index action
  return PopulationState::over_state_actions(space, na, std::move(m),
                                             norm_exponent);
}

Eigen::VectorXd apply_truncated_kernel(const ModelSpec& model,
                                       const Eigen::Ref<const Eigen::VectorXi>& x,
                                       double action,
                                       const PopulationContext& ctx) {
  const TruncatedStateSpace& space = model.space;
  IncrementDistribution q = model.increments(x, action, ctx);
  Eigen::VectorXd row = Eigen::VectorXd::Zero(space.size());
  double total = 0.0;
  Eigen::VectorXi next(space.dim());
  for (Eigen::Index k = 0; k < q.probs.size(); ++k) {
    if (q.probs[k] < 0.0)
      throw ModelContractError("increment kernel returned a negative mass");
    if (q.offsets.row(k).cwiseAbs().maxCoeff() > model.increment_bound) {
      std::ostringstream msg;
      msg << "increment kernel returned mass outside ||z||_inf <= "
          << model.increment_bound;
      throw ModelContractError(msg.str());
    }
    for (int l = 0; l < space.dim(); ++l) {
      const int v = x[l] + q.offsets(k, l);
      next[l] = std::clamp(v, 0, space.bound(l));
    }
    row[space.index_of(next)] += q.probs[k];
    total += q.probs[k];
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw ModelContractError("increment kernel does not sum to 1 within 1e-12");
  return row;
}

Eigen::VectorXd apply_truncated_kernel(const ModelSpec& model,
                                       const Eigen::Ref<const Eigen::VectorXi>& x,
                                       double action,
                                       const PopulationState& f) {
  return apply_truncated_kernel(model, x, action, model.make_context(f));
}

void check_model_contract(const ModelSpec& model, int max_states,
                          int max_actions) {
  const Eigen::Index n = model.space.size();
  const Eigen::Index state_stride = std::max<Eigen::Index>(1, n / max_states);

  Eigen::VectorXd action_grid = model.actions.grid(
      model.actions.kind() == ActionSet::Kind::ContinuousBox
          ? 1.0 / std::max(1, max_actions - 1)
          : 0.0);

  // Probe under a few structurally different populations.
  std::vector<PopulationState> probes;
  probes.push_back(model.zero_point_mass());
  if (!model.coupled_through_actions) {
    probes.push_back(PopulationState::uniform(model.space, model.norm_exponent));
    probes.push_back(
        PopulationState::point_mass(model.space, n - 1, model.norm_exponent));
  } else {
    const int na = model.actions.n_pure();
    Eigen::VectorXd m =
        Eigen::VectorXd::Constant(n * na, 1.0 / static_cast<double>(n * na));
    probes.push_back(PopulationState::over_state_actions(
        model.space, na, std::move(m), model.norm_exponent));
  }

  for (const PopulationState& f : probes) {
    const PopulationContext ctx = model.make_context(f);
    for (Eigen::Index i = 0; i < n; i += state_stride) {
      const Eigen::VectorXi x = model.space.state_of(i);
      const double weight =
          std::pow(1.0 + static_cast<double>(model.space.inf_norms()[i]),
                   model.growth_exponent);
      for (Eigen::Index g = 0; g < action_grid.size(); ++g) {
        const double a = action_grid[g];
        const double pi = model.payoff(x, a, ctx);
        if (!std::isfinite(pi))
          throw ModelContractError("payoff is not finite at a probed point");
        if (std::abs(pi) > model.growth_bound * weight * (1.0 + 1e-9)) {
          std::ostringstream msg;
          msg << "payoff " << pi << " exceeds growth bound K(1+||x||)^n = "
              << model.growth_bound * weight;
          throw ModelContractError(msg.str());
        }
        apply_truncated_kernel(model, x, a, ctx);  // throws on violation
      }
    }
  }
}

}  // namespace sgame
