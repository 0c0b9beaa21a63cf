#include "sgame/factory.hpp"

#include <cmath>

#include "sgame/errors.hpp"
#include "sgame/models.hpp"

namespace sgame {
namespace {

double get(const std::map<std::string, double>& params, const std::string& key,
           double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

int get_int(const std::map<std::string, double>& params,
            const std::string& key, int fallback) {
  return static_cast<int>(std::lround(get(params, key, fallback)));
}

QualityLadderParams ladder_params(const std::map<std::string, double>& p) {
  QualityLadderParams q;
  q.theta1 = get(p, "theta1", q.theta1);
  q.c_tilde = get(p, "c_tilde", q.c_tilde);
  q.invest_cost = get(p, "invest_cost", q.invest_cost);
  q.alpha = get(p, "alpha", q.alpha);
  q.delta = get(p, "delta", q.delta);
  q.a_max = get(p, "a_max", q.a_max);
  q.beta = get(p, "beta", q.beta);
  q.x_max = get_int(p, "x_max", q.x_max);
  return q;
}

}  // namespace

ModelSpec build_model(const std::string& family,
                      const std::map<std::string, double>& params,
                      const std::map<std::string, Eigen::VectorXd>& tables) {
  if (family == "quality_ladder") return quality_ladder(ladder_params(params));

  if (family == "spillover") {
    SpilloverParams s;
    s.base = ladder_params(params);
    s.gamma = get(params, "gamma", s.gamma);
    if (auto it = tables.find("zeta"); it != tables.end()) {
      s.zeta = it->second;
    } else if (params.count("zeta_const")) {
      s.zeta = Eigen::VectorXd::Constant(s.base.x_max + 1,
                                         params.at("zeta_const"));
    }
    return spillover_oligopoly(s);
  }

  if (family == "learning_by_doing") {
    LearningByDoingParams l;
    l.s_max = get_int(params, "s_max", l.s_max);
    l.demand_form = get(params, "demand_form", 0.0) == 0.0
                        ? DemandForm::Linear
                        : DemandForm::Hyperbolic;
    l.p0 = get(params, "p0", l.p0);
    l.demand_slope = get(params, "demand_slope", l.demand_slope);
    l.cost_c = get(params, "cost_c", l.cost_c);
    l.alpha = get(params, "alpha", l.alpha);
    l.delta = get(params, "delta", l.delta);
    l.beta = get(params, "beta", l.beta);
    l.x_max = get_int(params, "x_max", l.x_max);
    return learning_by_doing(l);
  }

  if (family == "supply_chain") {
    SupplyChainParams s;
    if (params.count("s_max"))
      s.bids = Eigen::VectorXd::LinSpaced(get_int(params, "s_max", 3) + 1, 0.0,
                                          get(params, "s_max", 3.0));
    if (auto it = tables.find("demand"); it != tables.end())
      s.demand = it->second;
    else if (params.count("d_max"))
      s.demand = Eigen::VectorXd::Constant(
          get_int(params, "d_max", 3) + 1,
          1.0 / (get_int(params, "d_max", 3) + 1));
    s.quantity = get(params, "quantity", s.quantity);
    s.reserve = get(params, "reserve", s.reserve);
    s.retail_price = get(params, "retail_price", s.retail_price);
    s.holding_cost = get(params, "holding_cost", s.holding_cost);
    s.beta = get(params, "beta", s.beta);
    s.x_max = get_int(params, "x_max", s.x_max);
    return supply_chain(s);
  }

  if (family == "consumer_learning") {
    ConsumerLearningParams c;
    c.gamma = get(params, "gamma", c.gamma);
    c.effort_cost = get(params, "effort_cost", c.effort_cost);
    c.sigma_l2 = get(params, "sigma_l2", c.sigma_l2);
    c.sigma_h2 = get(params, "sigma_h2", c.sigma_h2);
    c.kappa_omega = get(params, "kappa_omega", c.kappa_omega);
    c.alpha = get(params, "alpha", c.alpha);
    c.delta = get(params, "delta", c.delta);
    c.a_max = get(params, "a_max", c.a_max);
    c.beta = get(params, "beta", c.beta);
    c.x_max = get_int(params, "x_max", c.x_max);
    return consumer_learning(c);
  }

  throw ConfigError("unknown model family \"" + family + "\"");
}

}  // namespace sgame
