#include "sgame/dp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "sgame/errors.hpp"
#include "sgame/parallel.hpp"

namespace sgame {
namespace {

// Payoffs and clamped transitions tabulated once per (model, f, grid), so
// value-iteration sweeps touch no model closures.
struct DpTables {
  Eigen::VectorXd grid;        // action values (pure list or uniform grid)
  Eigen::MatrixXd payoff;      // n_states x n_grid
  Eigen::MatrixXi next_index;  // (n_states * n_grid) x K, prob-0 padded
  Eigen::MatrixXd next_prob;
  PopulationContext ctx;
};

DpTables build_tables(const ModelSpec& model, const PopulationState& f,
                      const DpSolveOptions& opts) {
  DpTables t;
  t.ctx = model.make_context(f);
  t.grid = model.actions.grid(opts.action_grid_step_fraction);
  const Eigen::Index n = model.space.size();
  const Eigen::Index g = t.grid.size();
  t.payoff.resize(n, g);

  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows(n * g);
  Eigen::Index kmax = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXi x = model.space.state_of(i);
    for (Eigen::Index j = 0; j < g; ++j) {
      const double pi = model.payoff(x, t.grid[j], t.ctx);
      if (!std::isfinite(pi))
        throw ModelContractError("payoff is not finite at a probed point");
      t.payoff(i, j) = pi;
      Eigen::VectorXd row = apply_truncated_kernel(model, x, t.grid[j], t.ctx);
      auto& sparse = rows[i * g + j];
      for (Eigen::Index k = 0; k < row.size(); ++k)
        if (row[k] != 0.0) sparse.emplace_back(k, row[k]);
      kmax = std::max<Eigen::Index>(kmax, sparse.size());
    }
  }
  t.next_index = Eigen::MatrixXi::Zero(n * g, kmax);
  t.next_prob = Eigen::MatrixXd::Zero(n * g, kmax);
  for (Eigen::Index r = 0; r < n * g; ++r)
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(rows[r].size()); ++k) {
      t.next_index(r, k) = static_cast<int>(rows[r][k].first);
      t.next_prob(r, k) = rows[r][k].second;
    }
  return t;
}

// One Bellman sweep; ties at the max go to the lowest grid index.
void apply_tables(const DpTables& t, double beta, const Eigen::VectorXd& v,
                  Eigen::VectorXd& out, Eigen::VectorXi& argmax,
                  Eigen::MatrixXd* q_out) {
  const Eigen::Index n = t.payoff.rows();
  const Eigen::Index g = t.grid.size();
  parallel_for(n, [&](long i) {
    double best = -std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (Eigen::Index j = 0; j < g; ++j) {
      double cont = 0.0;
      const Eigen::Index r = i * g + j;
      for (Eigen::Index k = 0; k < t.next_prob.cols(); ++k)
        cont += t.next_prob(r, k) * v[t.next_index(r, k)];
      const double q = t.payoff(i, j) + beta * cont;
      if (q_out) (*q_out)(i, j) = q;
      if (q > best) {
        best = q;
        best_j = static_cast<int>(j);
      }
    }
    out[i] = best;
    argmax[i] = best_j;
  });
}

double golden_max(const std::function<double(double)>& fn, double lo,
                  double hi, double* best_arg) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int it = 0; it < 100 && (b - a) > 1e-13 * std::max(1.0, hi - lo); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  const double mid = 0.5 * (a + b);
  *best_arg = mid;
  return fn(mid);
}

double bellman_rhs(const ModelSpec& model, const PopulationContext& ctx,
                   const Eigen::Ref<const Eigen::VectorXi>& x, double a,
                   const Eigen::VectorXd& v) {
  const Eigen::VectorXd row = apply_truncated_kernel(model, x, a, ctx);
  return model.payoff(x, a, ctx) + model.discount * row.dot(v);
}

// Exact interior argmax through the model's first-order-condition hook:
// continuation values are gathered at the kernel's support, clamped to the
// box, in the kernel's own order.
double hook_argmax(const ModelSpec& model, const PopulationContext& ctx,
                   const Eigen::Ref<const Eigen::VectorXi>& x, double lo,
                   double hi, const Eigen::VectorXd& v) {
  const IncrementDistribution q = model.increments(x, lo, ctx);
  Eigen::VectorXd continuation(q.probs.size());
  Eigen::VectorXi next(model.space.dim());
  for (Eigen::Index k = 0; k < q.probs.size(); ++k) {
    for (int l = 0; l < model.space.dim(); ++l)
      next[l] = std::clamp(x[l] + q.offsets(k, l), 0, model.space.bound(l));
    continuation[k] = v[model.space.index_of(next)];
  }
  return model.bellman_argmax(x, ctx, lo, hi, continuation);
}

ObliviousStrategy extract_policy(const ModelSpec& model, const DpTables& t,
                                 const Eigen::VectorXi& argmax,
                                 const Eigen::VectorXd& v, bool refine) {
  if (model.actions.kind() == ActionSet::Kind::FinitePure)
    return ObliviousStrategy::pure_finite(argmax, t.grid);
  Eigen::VectorXd acts(argmax.size());
  for (Eigen::Index i = 0; i < argmax.size(); ++i) acts[i] = t.grid[argmax[i]];
  if (refine && t.grid.size() > 1) {
    for (Eigen::Index i = 0; i < argmax.size(); ++i) {
      const Eigen::VectorXi x = model.space.state_of(i);
      if (model.bellman_argmax) {
        acts[i] = hook_argmax(model, t.ctx, x, model.actions.lo(),
                              model.actions.hi(), v);
        continue;
      }
      const double lo = t.grid[std::max<Eigen::Index>(0, argmax[i] - 1)];
      const double hi =
          t.grid[std::min<Eigen::Index>(t.grid.size() - 1, argmax[i] + 1)];
      double arg = acts[i];
      const double refined = golden_max(
          [&](double a) { return bellman_rhs(model, t.ctx, x, a, v); }, lo, hi,
          &arg);
      if (refined >= bellman_rhs(model, t.ctx, x, acts[i], v)) acts[i] = arg;
    }
  }
  return ObliviousStrategy::pure_continuous(std::move(acts));
}

}  // namespace

ValueFunction bellman_apply(const ModelSpec& model, const PopulationState& f,
                            const ValueFunction& v,
                            const DpSolveOptions& opts) {
  const DpTables t = build_tables(model, f, opts);
  const Eigen::Index n = model.space.size();
  Eigen::VectorXd out(n);
  Eigen::VectorXi argmax(n);
  apply_tables(t, model.discount, v.values, out, argmax, nullptr);
  if (opts.golden_refine &&
      model.actions.kind() == ActionSet::Kind::ContinuousBox &&
      t.grid.size() > 1) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXi x = model.space.state_of(i);
      if (model.bellman_argmax) {
        const double a = hook_argmax(model, t.ctx, x, model.actions.lo(),
                                     model.actions.hi(), v.values);
        out[i] = std::max(out[i], bellman_rhs(model, t.ctx, x, a, v.values));
        continue;
      }
      const double lo = t.grid[std::max<Eigen::Index>(0, argmax[i] - 1)];
      const double hi =
          t.grid[std::min<Eigen::Index>(t.grid.size() - 1, argmax[i] + 1)];
      double arg = 0.0;
      out[i] = std::max(out[i], golden_max(
                                    [&](double a) {
                                      return bellman_rhs(model, t.ctx, x, a,
                                                         v.values);
                                    },
                                    lo, hi, &arg));
    }
  }
  return ValueFunction{model.space, std::move(out), model.growth_exponent};
}

DpResult solve_value(const ModelSpec& model, const PopulationState& f,
                     const DpSolveOptions& opts) {
  const DpTables t = build_tables(model, f, opts);
  const Eigen::Index n = model.space.size();
  const bool finite = model.actions.kind() == ActionSet::Kind::FinitePure;

  DpResult result;
  if (finite) result.q_values.resize(n, t.grid.size());

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v_next(n);
  Eigen::VectorXi argmax(n);
  double diff = std::numeric_limits<double>::infinity();
  for (long it = 1; it <= opts.max_iters; ++it) {
    apply_tables(t, model.discount, v, v_next, argmax,
                 finite ? &result.q_values : nullptr);
    diff = weighted_sup_distance(v_next, v, model.space.inf_norms(),
                                 model.growth_exponent);
    result.sweep_diffs.push_back(diff);
    if (diff <= opts.tol) {
      // v is certified: its residual against T_f is exactly `diff`, and
      // argmax attains the Bellman max with v as the continuation value.
      result.value = ValueFunction{model.space, v, model.growth_exponent};
      result.policy =
          extract_policy(model, t, argmax, v, opts.golden_refine && !finite);
      result.residual = diff;
      result.iterations = it;
      return result;
    }
    v.swap(v_next);
  }
  throw ConvergenceError("value iteration did not meet tol within max_iters",
                         diff);
}

double bellman_residual(const ModelSpec& model, const PopulationState& f,
                        const ValueFunction& v, const DpSolveOptions& opts) {
  return weighted_sup_distance(v, bellman_apply(model, f, v, opts));
}

ValueFunction policy_value(const ModelSpec& model, const PopulationState& f,
                           const ObliviousStrategy& mu) {
  const Eigen::Index n = model.space.size();
  const PopulationContext ctx = model.make_context(f);
  Eigen::VectorXd reward(n);
  Eigen::MatrixXd trans(n, n);
  const bool finite = model.actions.kind() == ActionSet::Kind::FinitePure;
  const Eigen::VectorXd pure =
      finite ? model.actions.pure_values() : Eigen::VectorXd();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXi x = model.space.state_of(i);
    if (mu.is_mixed() || (finite && mu.has_indices())) {
      const Eigen::VectorXd w = mu.mix_row(i, static_cast<int>(pure.size()));
      double r = 0.0;
      Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
      for (Eigen::Index s = 0; s < w.size(); ++s) {
        if (w[s] == 0.0) continue;
        r += w[s] * model.payoff(x, pure[s], ctx);
        row += w[s] * apply_truncated_kernel(model, x, pure[s], ctx);
      }
      reward[i] = r;
      trans.row(i) = row.transpose();
    } else {
      const double a = mu.action(i);
      reward[i] = model.payoff(x, a, ctx);
      trans.row(i) = apply_truncated_kernel(model, x, a, ctx).transpose();
    }
  }
  Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n, n) - model.discount * trans;
  Eigen::VectorXd v = system.partialPivLu().solve(reward);
  return ValueFunction{model.space, std::move(v), model.growth_exponent};
}

}  // namespace sgame
