#pragma once

#include <Eigen/Core>
#include <functional>

#include "sgame/model.hpp"

namespace sgame {

/// Quality-ladder oligopoly: state is product quality, investment raises it
/// stochastically, depreciation lowers it; profits come from logit
/// monopolistic competition.
struct QualityLadderParams {
  double theta1 = 0.5;      // quality elasticity
  double c_tilde = 1.0;     // limit-price constant
  double invest_cost = 0.3; // d, marginal cost per unit investment
  double alpha = 1.0;       // investment effectiveness
  double delta = 0.2;       // depreciation probability
  double a_max = 5.0;       // investment cap
  double beta = 0.9;
  int x_max = 200;
};

ModelSpec quality_ladder(const QualityLadderParams& p);

/// Quality ladder plus positive spillovers: effective investment is the own
/// action plus gamma times the zeta-weighted mass of better-placed firms.
struct SpilloverParams {
  QualityLadderParams base;
  double gamma = 0.1;
  Eigen::VectorXd zeta;  // weight per state; empty means zeta == 1
};

ModelSpec spillover_oligopoly(const SpilloverParams& p);

enum class DemandForm { Linear, Hyperbolic };

/// Learning-by-doing quantity competition; players are coupled through the
/// aggregate output, so the population state lives on X x S.
struct LearningByDoingParams {
  int s_max = 3;                      // pure output levels {0,...,s_max}
  DemandForm demand_form = DemandForm::Linear;
  double p0 = 2.0;                    // P(0)
  double demand_slope = 1.0;          // linear form: P(q) = max(0, p0 - slope q)
  double cost_c = 4.0;                // default C(x,s) = s^2/(1+x) + s^2/cost_c
  std::function<double(int, int)> cost;  // optional override C(x,s)
  double alpha = 1.0;
  double delta = 0.2;
  double beta = 0.9;
  int x_max = 50;
};

ModelSpec learning_by_doing(const LearningByDoingParams& p);

/// Supply chain competition under proportional allocation; inventory is
/// consumed by i.i.d. demand and restocked by the auction allocation.
struct SupplyChainParams {
  Eigen::VectorXd bids;       // finite bid set; empty means {0,1,2,3}
  double quantity = 1.0;      // Q, per-firm resource scale
  double reserve = 1.0;       // R
  double retail_price = 2.0;  // phi
  double holding_cost = 0.2;  // h
  Eigen::VectorXd demand;     // probs over {0,...,d_max}; empty means uniform{0..3}
  double beta = 0.9;
  int x_max = 50;
};

ModelSpec supply_chain(const SupplyChainParams& p);

/// Social-learning model: effort raises expected product quality, experience
/// and the population's experience shrink its variance.
struct ConsumerLearningParams {
  double gamma = 1.0;        // effort productivity
  double effort_cost = 1.5;  // d
  double sigma_l2 = 0.5;
  double sigma_h2 = 1.0;
  double kappa_omega = 1.0;  // population weight inside omega
  double alpha = 1.0;
  double delta = 0.2;
  double a_max = 3.0;
  double beta = 0.9;
  int x_max = 200;
};

ModelSpec consumer_learning(const ConsumerLearningParams& p);

/// omega(x, f) used by the consumer-learning family.
double consumer_learning_omega(const ConsumerLearningParams& p, int x,
                               double mean_state);

}  // namespace sgame
