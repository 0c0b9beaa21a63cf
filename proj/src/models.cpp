#include "sgame/models.hpp"

#include <cmath>
#include <sstream>

#include "sgame/errors.hpp"

namespace sgame {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void check_ladder_kernel_params(double alpha, double delta, double beta,
                                int x_max) {
  require(alpha > 0.0, "alpha (α) must be positive");
  require(delta > 0.0 && delta < 1.0, "delta (δ) must lie in (0,1)");
  require(beta > 0.0 && beta < 1.0, "beta (β) must lie in (0,1)");
  require(x_max >= 1, "x_max must be a positive integer");
}

// Shared ladder dynamics: up with probability (1-δ)αe/(1+αe), down with
// probability δ/(1+αe), stay with the rest. Offsets ordered -1, 0, +1.
IncrementDistribution ladder_increments(double alpha, double delta,
                                        double effective) {
  const double denom = 1.0 + alpha * effective;
  IncrementDistribution q;
  q.offsets.resize(3, 1);
  q.offsets << -1, 0, 1;
  q.probs.resize(3);
  q.probs[0] = delta / denom;
  q.probs[1] = (1.0 - delta + delta * alpha * effective) / denom;
  q.probs[2] = (1.0 - delta) * alpha * effective / denom;
  return q;
}

double ladder_drift(double alpha, double delta, double effective) {
  const double denom = 1.0 + alpha * effective;
  return ((1.0 - delta) * alpha * effective - delta) / denom;
}

// Continuation term of the ladder kernel given values (v-, v0, v+):
// beta * (alpha e c1 + c0) / (1 + alpha e) with c1, c0 below. Its derivative
// in e is beta alpha (c1 - c0) / (1 + alpha e)^2, so against a linear
// investment cost d the interior optimum solves
// (1 + alpha e*)^2 = beta alpha (c1 - c0) / d.
double ladder_effective_argmax(double alpha, double delta, double beta,
                               double cost, const Eigen::VectorXd& cont,
                               double e_lo, double e_hi) {
  const double c1 = (1.0 - delta) * cont[2] + delta * cont[1];
  const double c0 = (1.0 - delta) * cont[1] + delta * cont[0];
  const double target = beta * alpha * (c1 - c0) / cost;
  if (target <= (1.0 + alpha * e_lo) * (1.0 + alpha * e_lo)) return e_lo;
  if (target >= (1.0 + alpha * e_hi) * (1.0 + alpha * e_hi)) return e_hi;
  return (std::sqrt(target) - 1.0) / alpha;
}

// (y+1)^theta1 per state level.
Eigen::VectorXd quality_terms(int x_max, double theta1) {
  Eigen::VectorXd t(x_max + 1);
  for (int y = 0; y <= x_max; ++y) t[y] = std::pow(y + 1.0, theta1);
  return t;
}

}  // namespace

ModelSpec quality_ladder(const QualityLadderParams& p) {
  require(p.theta1 > 0.0, "theta1 (θ₁) must be positive");
  require(p.c_tilde > 0.0, "c_tilde (c̃) must be positive");
  require(p.invest_cost > 0.0, "invest_cost (d) must be positive");
  require(p.a_max > 0.0, "a_max (ā) must be positive");
  check_ladder_kernel_params(p.alpha, p.delta, p.beta, p.x_max);

  ModelSpec m;
  m.space = TruncatedStateSpace(1, p.x_max);
  m.actions = ActionSet::continuous_box(0.0, p.a_max);
  m.discount = p.beta;
  m.norm_exponent = std::max(1, static_cast<int>(std::ceil(p.theta1)));
  m.growth_exponent = m.norm_exponent;
  m.growth_bound = p.c_tilde + p.invest_cost * p.a_max;
  m.increment_bound = 1;
  m.family = "quality_ladder";
  m.params = {{"theta1", p.theta1},   {"c_tilde", p.c_tilde},
              {"invest_cost", p.invest_cost}, {"alpha", p.alpha},
              {"delta", p.delta},     {"a_max", p.a_max},
              {"beta", p.beta},       {"x_max", static_cast<double>(p.x_max)}};

  const Eigen::VectorXd qt = quality_terms(p.x_max, p.theta1);
  m.make_context = [qt](const PopulationState& f) {
    PopulationContext ctx;
    ctx.scalars.resize(1);
    ctx.scalars[0] = qt.dot(f.state_marginal());  // theta1 moment of f
    return ctx;
  };
  const double c_tilde = p.c_tilde, d = p.invest_cost;
  m.payoff = [qt, c_tilde, d](const Eigen::Ref<const Eigen::VectorXi>& x,
                              double a, const PopulationContext& ctx) {
    return c_tilde * qt[x[0]] / ctx.scalars[0] - d * a;
  };
  const double alpha = p.alpha, delta = p.delta;
  m.increments = [alpha, delta](const Eigen::Ref<const Eigen::VectorXi>&,
                                double a, const PopulationContext&) {
    return ladder_increments(alpha, delta, a);
  };
  m.drift_upper = [alpha, delta](double a) {
    return ladder_drift(alpha, delta, a);
  };
  const double beta = p.beta;
  m.bellman_argmax = [alpha, delta, beta, d](
                         const Eigen::Ref<const Eigen::VectorXi>&,
                         const PopulationContext&, double lo, double hi,
                         const Eigen::VectorXd& cont) {
    return ladder_effective_argmax(alpha, delta, beta, d, cont, lo, hi);
  };
  return m;
}

ModelSpec spillover_oligopoly(const SpilloverParams& p) {
  require(p.gamma >= 0.0, "gamma (γ) must be nonnegative");
  ModelSpec m = quality_ladder(p.base);
  m.family = "spillover";

  Eigen::VectorXd zeta = p.zeta.size() > 0
                             ? p.zeta
                             : Eigen::VectorXd::Ones(p.base.x_max + 1);
  require(zeta.size() == p.base.x_max + 1,
          "zeta table must cover every state level");
  require((zeta.array() >= 0.0).all(), "zeta table must be nonnegative");
  const double sup_zeta = zeta.maxCoeff();
  m.params["gamma"] = p.gamma;
  m.params["sup_zeta"] = sup_zeta;
  m.tables["zeta"] = zeta;
  m.aux["gamma_threshold"] =
      p.base.delta / ((1.0 - p.base.delta) * p.base.alpha * sup_zeta);

  const Eigen::VectorXd qt = quality_terms(p.base.x_max, p.base.theta1);
  m.make_context = [qt, zeta](const PopulationState& f) {
    PopulationContext ctx;
    const Eigen::VectorXd g = f.state_marginal();
    ctx.scalars.resize(1);
    ctx.scalars[0] = qt.dot(g);
    // Spillover s(x, f) = sum_{y > x} f(y) zeta(y) via a suffix sum.
    ctx.per_state.resize(g.size());
    double suffix = 0.0;
    for (Eigen::Index x = g.size() - 1; x >= 0; --x) {
      ctx.per_state[x] = suffix;
      suffix += g[x] * zeta[x];
    }
    return ctx;
  };
  const double alpha = p.base.alpha, delta = p.base.delta, gamma = p.gamma;
  m.increments = [alpha, delta, gamma](
                     const Eigen::Ref<const Eigen::VectorXi>& x, double a,
                     const PopulationContext& ctx) {
    const double effective = a + gamma * ctx.per_state[x[0]];
    return ladder_increments(alpha, delta, effective);
  };
  m.drift_upper = [alpha, delta, gamma, sup_zeta](double a) {
    return ladder_drift(alpha, delta, a + gamma * sup_zeta);
  };
  const double beta = p.base.beta, d = p.base.invest_cost;
  m.bellman_argmax = [alpha, delta, beta, d, gamma](
                         const Eigen::Ref<const Eigen::VectorXi>& x,
                         const PopulationContext& ctx, double lo, double hi,
                         const Eigen::VectorXd& cont) {
    const double shift = gamma * ctx.per_state[x[0]];
    const double e = ladder_effective_argmax(alpha, delta, beta, d, cont,
                                             lo + shift, hi + shift);
    return e - shift;
  };
  return m;
}

ModelSpec learning_by_doing(const LearningByDoingParams& p) {
  require(p.s_max >= 1, "s_max must be at least 1");
  require(p.p0 > 0.0, "p0 must be positive");
  require(p.demand_slope > 0.0, "demand_slope must be positive");
  require(p.cost_c > 0.0, "cost_c must be positive");
  check_ladder_kernel_params(p.alpha, p.delta, p.beta, p.x_max);

  std::function<double(int, int)> cost = p.cost;
  if (!cost) {
    const double c = p.cost_c;
    cost = [c](int x, int s) {
      const double s2 = static_cast<double>(s) * s;
      return s2 / (1.0 + x) + s2 / c;
    };
  }

  // C must be nonnegative, nonincreasing and convex in x, nondecreasing and
  // convex in s, with decreasing differences in (x, s).
  for (int x = 0; x <= p.x_max; ++x) {
    for (int s = 0; s <= p.s_max; ++s) {
      std::ostringstream at;
      at << " at (x=" << x << ", s=" << s << ")";
      require(cost(x, s) >= 0.0, "cost C must be nonnegative" + at.str());
      if (x + 1 <= p.x_max)
        require(cost(x + 1, s) <= cost(x, s) + 1e-12,
                "cost C must be nonincreasing in x" + at.str());
      if (x + 2 <= p.x_max)
        require(cost(x + 2, s) - cost(x + 1, s) >=
                    cost(x + 1, s) - cost(x, s) - 1e-12,
                "cost C must be convex in x" + at.str());
      if (s + 1 <= p.s_max)
        require(cost(x, s + 1) >= cost(x, s) - 1e-12,
                "cost C must be nondecreasing in s" + at.str());
      if (s + 2 <= p.s_max)
        require(cost(x, s + 2) - cost(x, s + 1) >=
                    cost(x, s + 1) - cost(x, s) - 1e-12,
                "cost C must be convex in s" + at.str());
      if (x + 1 <= p.x_max && s + 1 <= p.s_max)
        require(cost(x + 1, s + 1) - cost(x + 1, s) <=
                    cost(x, s + 1) - cost(x, s) + 1e-12,
                "cost C must have decreasing differences" + at.str());
    }
  }

  const double p0 = p.p0, slope = p.demand_slope;
  const bool linear = p.demand_form == DemandForm::Linear;
  auto inverse_demand = [p0, slope, linear](double q) {
    return linear ? std::max(0.0, p0 - slope * q) : p0 / (1.0 + q);
  };

  ModelSpec m;
  m.space = TruncatedStateSpace(1, p.x_max);
  m.actions = ActionSet::finite_pure(
      Eigen::VectorXd::LinSpaced(p.s_max + 1, 0.0, p.s_max));
  m.discount = p.beta;
  m.coupled_through_actions = true;
  m.norm_exponent = 1;
  m.growth_exponent = 0;
  m.growth_bound = p.s_max * p.p0 + cost(0, p.s_max);
  m.increment_bound = 1;
  m.family = "learning_by_doing";
  m.params = {{"s_max", static_cast<double>(p.s_max)},
              {"p0", p.p0},
              {"demand_slope", p.demand_slope},
              {"cost_c", p.cost_c},
              {"alpha", p.alpha},
              {"delta", p.delta},
              {"beta", p.beta},
              {"x_max", static_cast<double>(p.x_max)},
              {"demand_form", linear ? 0.0 : 1.0}};

  m.make_context = [](const PopulationState& f) {
    if (!f.coupled())
      throw ConfigError("learning-by-doing needs a state-action profile");
    PopulationContext ctx;
    ctx.scalars.resize(1);
    double aggregate = 0.0;  // sum_{x,s} s f(x,s)
    for (Eigen::Index flat = 0; flat < f.size(); ++flat)
      aggregate += static_cast<double>(f.action_index_of(flat)) * f.mass()[flat];
    ctx.scalars[0] = aggregate;
    return ctx;
  };
  m.payoff = [cost, inverse_demand](const Eigen::Ref<const Eigen::VectorXi>& x,
                                    double s, const PopulationContext& ctx) {
    return s * inverse_demand(ctx.scalars[0]) -
           cost(x[0], static_cast<int>(std::lround(s)));
  };
  const double alpha = p.alpha, delta = p.delta;
  m.increments = [alpha, delta](const Eigen::Ref<const Eigen::VectorXi>&,
                                double s, const PopulationContext&) {
    return ladder_increments(alpha, delta, s);
  };
  m.drift_upper = [alpha, delta](double s) {
    return ladder_drift(alpha, delta, s);
  };

  // Limit proxy for the myopic output bound: s* maximizes s P(0) - C(x_max, s).
  int s_star = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s <= p.s_max; ++s) {
    const double v = s * inverse_demand(0.0) - cost(p.x_max, s);
    if (v > best) {
      best = v;
      s_star = s;
    }
  }
  m.aux["s_star"] = s_star;
  m.aux["c0"] = p.delta / (p.alpha * (1.0 - p.delta));
  return m;
}

ModelSpec supply_chain(const SupplyChainParams& p) {
  Eigen::VectorXd bids =
      p.bids.size() > 0 ? p.bids : Eigen::VectorXd::LinSpaced(4, 0.0, 3.0);
  Eigen::VectorXd demand = p.demand.size() > 0
                               ? p.demand
                               : Eigen::VectorXd::Constant(4, 0.25);
  require((bids.array() == 0.0).any(), "bid set must contain 0");
  require((bids.array() >= 0.0).all(), "bids must be nonnegative");
  require(p.quantity > 0.0, "quantity (Q) must be positive");
  require(p.reserve > 0.0, "reserve (R) must be positive");
  require(p.retail_price > 0.0, "retail_price (φ) must be positive");
  require(p.holding_cost > 0.0, "holding_cost (h) must be positive");
  require((demand.array() >= 0.0).all() &&
              std::abs(demand.sum() - 1.0) <= 1e-9,
          "demand must be a probability vector");
  const int d_max = static_cast<int>(demand.size()) - 1;
  double demand_mean = 0.0;
  for (int d = 0; d <= d_max; ++d) demand_mean += d * demand[d];
  require(demand_mean > 0.0, "demand must have positive expected value");
  require(p.beta > 0.0 && p.beta < 1.0, "beta (β) must lie in (0,1)");
  require(p.x_max >= 1, "x_max must be a positive integer");

  const double q_scale = p.quantity, reserve = p.reserve;
  const double xi_cap = bids.maxCoeff() * q_scale / reserve;

  ModelSpec m;
  m.space = TruncatedStateSpace(1, p.x_max);
  m.actions = ActionSet::finite_pure(bids);
  m.discount = p.beta;
  m.coupled_through_actions = true;
  m.norm_exponent = 1;
  m.growth_exponent = 1;
  m.growth_bound = p.retail_price * d_max + p.holding_cost + bids.maxCoeff();
  m.increment_bound =
      std::max(d_max, static_cast<int>(std::floor(xi_cap + 0.5)));
  m.family = "supply_chain";
  m.params = {{"quantity", p.quantity},
              {"reserve", p.reserve},
              {"retail_price", p.retail_price},
              {"holding_cost", p.holding_cost},
              {"beta", p.beta},
              {"x_max", static_cast<double>(p.x_max)},
              {"s_max", bids.maxCoeff()},
              {"d_max", static_cast<double>(d_max)}};
  m.aux["demand_mean"] = demand_mean;
  m.tables["demand"] = demand;

  const Eigen::VectorXd bid_values = bids;
  m.make_context = [bid_values](const PopulationState& f) {
    if (!f.coupled())
      throw ConfigError("supply chain needs a state-action profile");
    PopulationContext ctx;
    ctx.scalars.resize(1);
    double aggregate_bid = 0.0;  // sum_{s'} s' k(s'|f)
    for (Eigen::Index flat = 0; flat < f.size(); ++flat)
      aggregate_bid += bid_values[f.action_index_of(flat)] * f.mass()[flat];
    ctx.scalars[0] = aggregate_bid;
    return ctx;
  };

  Eigen::VectorXd expected_min(p.x_max + 1);  // E[min{d, x}] per inventory x
  for (int x = 0; x <= p.x_max; ++x) {
    double e = 0.0;
    for (int d = 0; d <= d_max; ++d) e += std::min(d, x) * demand[d];
    expected_min[x] = e;
  }
  const double phi = p.retail_price, h = p.holding_cost;
  m.payoff = [expected_min, phi, h](const Eigen::Ref<const Eigen::VectorXi>& x,
                                    double s, const PopulationContext&) {
    return phi * expected_min[x[0]] - h * x[0] - s;  // Omega(s, f) = s
  };
  m.increments = [demand, q_scale, reserve, d_max](
                     const Eigen::Ref<const Eigen::VectorXi>& x, double s,
                     const PopulationContext& ctx) {
    const double xi = s * q_scale / (reserve + ctx.scalars[0]);
    const int restock = static_cast<int>(std::floor(xi + 0.5));  // ties up
    IncrementDistribution q;
    q.offsets.resize(d_max + 1, 1);
    q.probs.resize(d_max + 1);
    for (int d = 0; d <= d_max; ++d) {
      q.offsets(d, 0) = std::max(x[0] - d, 0) + restock - x[0];
      q.probs[d] = demand[d];
    }
    return q;
  };
  m.drift_upper = [q_scale, reserve, demand_mean](double s) {
    // Worst case over f puts no weight on competing bids.
    return std::floor(s * q_scale / reserve + 0.5) - demand_mean;
  };
  return m;
}

double consumer_learning_omega(const ConsumerLearningParams& p, int x,
                               double mean_state) {
  return p.sigma_l2 + (p.sigma_h2 - p.sigma_l2) /
                          (1.0 + x + p.kappa_omega * mean_state);
}

ModelSpec consumer_learning(const ConsumerLearningParams& p) {
  require(p.gamma > 0.0, "gamma (γ) must be positive");
  require(p.effort_cost > 0.0, "effort_cost (d) must be positive");
  require(p.sigma_l2 >= 0.0 && p.sigma_l2 <= p.sigma_h2,
          "variance bounds need 0 <= sigma_l2 <= sigma_h2");
  require(p.kappa_omega >= 0.0, "kappa_omega must be nonnegative");
  require(p.a_max > 0.0, "a_max (ā) must be positive");
  check_ladder_kernel_params(p.alpha, p.delta, p.beta, p.x_max);

  ModelSpec m;
  m.space = TruncatedStateSpace(1, p.x_max);
  m.actions = ActionSet::continuous_box(0.0, p.a_max);
  m.discount = p.beta;
  m.norm_exponent = 1;
  m.growth_exponent = 0;
  m.growth_bound =
      1.0 + std::exp(0.5 * p.sigma_h2) + p.effort_cost * p.a_max;
  m.increment_bound = 1;
  m.family = "consumer_learning";
  m.params = {{"gamma", p.gamma},       {"effort_cost", p.effort_cost},
              {"sigma_l2", p.sigma_l2}, {"sigma_h2", p.sigma_h2},
              {"kappa_omega", p.kappa_omega}, {"alpha", p.alpha},
              {"delta", p.delta},       {"a_max", p.a_max},
              {"beta", p.beta},         {"x_max", static_cast<double>(p.x_max)}};

  m.make_context = [](const PopulationState& f) {
    PopulationContext ctx;
    ctx.scalars.resize(1);
    const Eigen::VectorXd g = f.state_marginal();
    double mean = 0.0;
    for (Eigen::Index x = 0; x < g.size(); ++x) mean += x * g[x];
    ctx.scalars[0] = mean;
    return ctx;
  };
  const ConsumerLearningParams cp = p;
  m.payoff = [cp](const Eigen::Ref<const Eigen::VectorXi>& x, double a,
                  const PopulationContext& ctx) {
    const double omega = consumer_learning_omega(cp, x[0], ctx.scalars[0]);
    return 1.0 - std::exp(-cp.gamma * a + 0.5 * omega) - cp.effort_cost * a;
  };
  const double alpha = p.alpha, delta = p.delta;
  m.increments = [alpha, delta](const Eigen::Ref<const Eigen::VectorXi>&,
                                double a, const PopulationContext&) {
    return ladder_increments(alpha, delta, a);
  };
  m.drift_upper = [alpha, delta](double a) {
    return ladder_drift(alpha, delta, a);
  };
  m.bellman_argmax = [cp](const Eigen::Ref<const Eigen::VectorXi>& x,
                          const PopulationContext& ctx, double lo, double hi,
                          const Eigen::VectorXd& cont) {
    const double omega = consumer_learning_omega(cp, x[0], ctx.scalars[0]);
    const double c1 = (1.0 - cp.delta) * cont[2] + cp.delta * cont[1];
    const double c0 = (1.0 - cp.delta) * cont[1] + cp.delta * cont[0];
    // Marginal value of effort, strictly decreasing in a.
    auto slope = [&](double a) {
      const double denom = 1.0 + cp.alpha * a;
      return cp.gamma * std::exp(-cp.gamma * a + 0.5 * omega) -
             cp.effort_cost +
             cp.beta * cp.alpha * (c1 - c0) / (denom * denom);
    };
    if (slope(lo) <= 0.0) return lo;
    if (slope(hi) >= 0.0) return hi;
    double a = lo, b = hi;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (a + b);
      (slope(mid) > 0.0 ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };
  m.myopic_action = [cp](const Eigen::Ref<const Eigen::VectorXi>& x,
                         const PopulationState& f) {
    double mean = 0.0;
    const Eigen::VectorXd g = f.state_marginal();
    for (Eigen::Index y = 0; y < g.size(); ++y) mean += y * g[y];
    const double omega = consumer_learning_omega(cp, x[0], mean);
    return omega / (2.0 * cp.gamma) -
           std::log(cp.effort_cost / cp.gamma) / cp.gamma;
  };

  const double c0 = p.delta / (p.alpha * (1.0 - p.delta));
  m.aux["c0"] = c0;
  m.aux["d_threshold"] = p.gamma * std::exp(-p.gamma * c0 + 0.5 * p.sigma_h2);
  m.aux["a_max_myopic"] = p.sigma_h2 / (2.0 * p.gamma) -
                          std::log(p.effort_cost / p.gamma) / p.gamma;
  return m;
}

}  // namespace sgame
