#include "sgame/invariant.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "sgame/errors.hpp"
#include "sgame/parallel.hpp"

namespace sgame {
namespace {

Eigen::VectorXd chain_row(const ModelSpec& model, const PopulationContext& ctx,
                          const ObliviousStrategy& mu, Eigen::Index i) {
  const Eigen::VectorXi x = model.space.state_of(i);
  if (mu.is_mixed() || (mu.has_indices() &&
                        model.actions.kind() == ActionSet::Kind::FinitePure)) {
    const Eigen::VectorXd& pure = mu.is_mixed() ? mu.mix_values()
                                                : model.actions.pure_values();
    const Eigen::VectorXd w = mu.mix_row(i, static_cast<int>(pure.size()));
    Eigen::VectorXd row = Eigen::VectorXd::Zero(model.space.size());
    for (Eigen::Index s = 0; s < w.size(); ++s)
      if (w[s] != 0.0)
        row += w[s] * apply_truncated_kernel(model, x, pure[s], ctx);
    return row;
  }
  return apply_truncated_kernel(model, x, mu.action(i), ctx);
}

// Solves (P' - I) f = 0 with a normalization row; empty when the system is
// singular beyond the normalization, i.e. the invariant measure is not
// unique.
std::optional<Eigen::VectorXd> direct_solve(const Eigen::MatrixXd& transition) {
  const Eigen::Index n = transition.rows();
  Eigen::MatrixXd system = transition.transpose();
  system.diagonal().array() -= 1.0;
  system.row(0).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[0] = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  // Threshold separates structural singularity (several recurrent classes,
  // pivots at rounding scale) from mere ill conditioning of slow-mixing
  // chains, which still have a unique solution worth returning.
  lu.setThreshold(1e-12);
  if (lu.rank() < n) return std::nullopt;
  Eigen::VectorXd f = lu.solve(rhs);
  // Iterative refinement recovers accuracy on ill-conditioned chains.
  for (int pass = 0; pass < 2; ++pass) f -= lu.solve(system * f - rhs);
  f = f.cwiseMax(0.0);  // scrub round-off negatives
  return f / f.sum();
}

Eigen::VectorXd power_iteration(const Eigen::MatrixXd& transition,
                                const InvariantOptions& opts, double* residual,
                                long* iterations) {
  const Eigen::Index n = transition.rows();
  Eigen::VectorXd f =
      Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double checkpoint = std::numeric_limits<double>::infinity();
  for (long it = 1; it <= opts.max_iters; ++it) {
    Eigen::VectorXd next = transition.transpose() * f;
    const double res = (next - f).cwiseAbs().sum();
    if (res <= opts.tol) {
      *residual = res;
      *iterations = it;
      next /= next.sum();
      return next;
    }
    // Bail out early on metastable chains: less than a 25% drop per
    // thousand iterations projects far beyond any sane budget.
    if (it % 1000 == 0) {
      if (res > 0.75 * checkpoint)
        throw ConvergenceError("power iteration is mixing too slowly", res);
      checkpoint = res;
    }
    // Half-lazy update: identical fixed points, kills periodicity.
    f = 0.5 * (f + next);
  }
  throw ConvergenceError("power iteration did not reach tol within max_iters",
                         (transition.transpose() * f - f).cwiseAbs().sum());
}

}  // namespace

InducedChain build_induced_chain(const ModelSpec& model,
                                 const ObliviousStrategy& mu,
                                 const PopulationState& f) {
  const PopulationContext ctx = model.make_context(f);
  const Eigen::Index n = model.space.size();
  InducedChain chain{model.space, Eigen::MatrixXd(n, n)};
  parallel_for(n, [&](long i) {
    chain.transition.row(i) = chain_row(model, ctx, mu, i).transpose();
  });
  return chain;
}

InvariantResult invariant_distribution(const InducedChain& chain,
                                       const InvariantOptions& opts) {
  const Eigen::Index n = chain.transition.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(chain.transition.row(i).sum() - 1.0) > kMassTol ||
        (chain.transition.row(i).array() < 0.0).any())
      throw ModelContractError("induced chain row is not a distribution");
  }

  InvariantResult result;
  if (opts.method == InvariantMethod::DirectLinear) {
    if (std::optional<Eigen::VectorXd> f = direct_solve(chain.transition)) {
      result.dist = std::move(*f);
      result.residual =
          (chain.transition.transpose() * result.dist - result.dist)
              .cwiseAbs()
              .sum();
      return result;
    }
    // Invariant distribution is not unique; report the power-iteration
    // selection with a warning attached.
    result.dist = power_iteration(chain.transition, opts, &result.residual,
                                  &result.iterations);
    result.multiple_class_warning = true;
    return result;
  }
  try {
    result.dist = power_iteration(chain.transition, opts, &result.residual,
                                  &result.iterations);
  } catch (const ConvergenceError&) {
    // Metastable chains (near-disconnected recurrent regions) mix too
    // slowly for iteration but still have a well-defined invariant
    // distribution; fall back to the direct solve on small spaces. When the
    // quasi-classes are numerically indistinguishable from exact ones, the
    // least-squares solution stands in, flagged like a multi-class chain.
    if (n > 2048) throw;
    const double accept_tol = std::max(opts.tol, 1e-8);
    auto stationarity = [&](const Eigen::VectorXd& f) {
      return (chain.transition.transpose() * f - f).cwiseAbs().sum();
    };
    if (std::optional<Eigen::VectorXd> f = direct_solve(chain.transition)) {
      if (stationarity(*f) <= accept_tol) {
        result.dist = std::move(*f);
        result.residual = stationarity(result.dist);
        return result;
      }
    }
    Eigen::MatrixXd system = chain.transition.transpose();
    system.diagonal().array() -= 1.0;
    system.row(0).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[0] = 1.0;
    Eigen::VectorXd f =
        system.completeOrthogonalDecomposition().solve(rhs).cwiseMax(0.0);
    f /= f.sum();
    if (!f.allFinite() || stationarity(f) > accept_tol) throw;
    result.dist = std::move(f);
    result.residual = stationarity(result.dist);
    result.multiple_class_warning = true;
  }
  return result;
}

PopulationState invariant_population(const ModelSpec& model,
                                     const ObliviousStrategy& mu,
                                     const PopulationState& f,
                                     const InvariantOptions& opts) {
  const InducedChain chain = build_induced_chain(model, mu, f);
  InvariantResult r = invariant_distribution(chain, opts);
  return PopulationState::over_states(model.space, std::move(r.dist),
                                      model.norm_exponent);
}

PopulationState invariant_state_action(const ModelSpec& model,
                                       const ObliviousStrategy& mu,
                                       const PopulationState& f,
                                       const InvariantOptions& opts) {
  if (!model.coupled_through_actions)
    throw ConfigError("invariant_state_action requires a coupled-action model");
  const int na = model.actions.n_pure();
  const InducedChain chain = build_induced_chain(model, mu, f);
  InvariantResult r = invariant_distribution(chain, opts);
  Eigen::VectorXd lifted = Eigen::VectorXd::Zero(model.space.size() * na);
  for (Eigen::Index i = 0; i < model.space.size(); ++i) {
    const Eigen::VectorXd w = mu.mix_row(i, na);
    for (Eigen::Index s = 0; s < na; ++s) lifted[i * na + s] = r.dist[i] * w[s];
  }
  lifted /= lifted.sum();
  return PopulationState::over_state_actions(model.space, na, std::move(lifted),
                                             model.norm_exponent);
}

DriftReport drift(const ModelSpec& model, const ObliviousStrategy& mu,
                  const PopulationState& f) {
  const PopulationContext ctx = model.make_context(f);
  const Eigen::Index n = model.space.size();
  const int d = model.space.dim();
  DriftReport report;
  report.expected_increment = Eigen::MatrixXd::Zero(n, d);

  const bool finite = model.actions.kind() == ActionSet::Kind::FinitePure;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXi x = model.space.state_of(i);
    auto accumulate = [&](double a, double weight) {
      const IncrementDistribution q = model.increments(x, a, ctx);
      for (Eigen::Index k = 0; k < q.probs.size(); ++k)
        for (int l = 0; l < d; ++l)
          report.expected_increment(i, l) +=
              weight * q.probs[k] * q.offsets(k, l);
    };
    if (mu.is_mixed() || (finite && mu.has_indices())) {
      const Eigen::VectorXd& pure =
          mu.is_mixed() ? mu.mix_values() : model.actions.pure_values();
      const Eigen::VectorXd w = mu.mix_row(i, static_cast<int>(pure.size()));
      for (Eigen::Index s = 0; s < w.size(); ++s)
        if (w[s] != 0.0) accumulate(pure[s], w[s]);
    } else {
      accumulate(mu.action(i), 1.0);
    }
  }

  // Smallest K such that every coordinate at or above K drifts strictly down.
  const Eigen::MatrixXi& states = model.space.states();
  const int top = model.space.bounds().maxCoeff();
  std::optional<int> found;
  for (int cand = 0; cand <= top; ++cand) {
    bool ok = true;
    for (Eigen::Index i = 0; i < n && ok; ++i)
      for (int l = 0; l < d && ok; ++l)
        if (states(i, l) >= cand && report.expected_increment(i, l) >= 0.0)
          ok = false;
    if (ok) {
      found = cand;
      break;
    }
  }
  report.threshold_state = found;
  if (found) {
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      for (int l = 0; l < d; ++l)
        if (states(i, l) >= *found)
          worst = std::max(worst, report.expected_increment(i, l));
    report.worst_drift_beyond = worst;
  }
  return report;
}

FosterLyapunovResult foster_lyapunov_check(const InducedChain& chain,
                                           int threshold) {
  const Eigen::Index n = chain.transition.rows();
  const Eigen::MatrixXi& states = chain.space.states();
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i)
    u[i] = states.row(i).cast<double>().squaredNorm();
  const Eigen::VectorXd expected_u = chain.transition * u;

  FosterLyapunovResult result;
  result.holds = true;
  int minimal = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int level = chain.space.inf_norms()[i];
    const bool violates = expected_u[i] - u[i] > -1.0;
    if (level > threshold && violates) {
      result.holds = false;
      if (!result.witness) result.witness = i;
    }
    if (violates) minimal = std::max(minimal, level);
  }
  if (minimal < chain.space.bounds().maxCoeff())
    result.minimal_threshold = minimal;
  return result;
}

double tail_moment(const PopulationState& f, int eta) {
  if (eta == f.norm_exponent()) return f.p_weights().dot(f.mass());
  const Eigen::VectorXd w = f.space().p_norm_weights(eta);
  const Eigen::VectorXd g = f.state_marginal();
  return w.dot(g);
}

}  // namespace sgame
