#pragma once

#include <Eigen/Core>
#include <cmath>

#include "sgame/errors.hpp"
#include "sgame/population.hpp"

namespace sgame {

/// sum_x ||x||_p^p f(x). For state-action profiles the weight is the p-norm
/// of the state part, so this equals the norm of the state marginal.
inline double one_p_norm(const PopulationState& f) {
  return f.p_weights().dot(f.mass());
}

/// sum_x ||x||_p^p |f(x) - g(x)| on a shared support.
inline double one_p_distance(const PopulationState& f,
                             const PopulationState& g) {
  if (!f.space().same_as(g.space()) || f.n_actions() != g.n_actions())
    throw ConfigError("one_p_distance: mismatched supports");
  if (f.norm_exponent() != g.norm_exponent())
    throw ConfigError("one_p_distance: mismatched norm exponents");
  return f.p_weights().dot((f.mass() - g.mass()).cwiseAbs());
}

/// max_x |v1(x) - v2(x)| / (1 + ||x||_inf)^n.
template <typename D1, typename D2>
double weighted_sup_distance(const Eigen::MatrixBase<D1>& v1,
                             const Eigen::MatrixBase<D2>& v2,
                             const Eigen::VectorXi& inf_norms, int n) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < inf_norms.size(); ++i) {
    const double w = std::pow(1.0 + static_cast<double>(inf_norms[i]), n);
    worst = std::max(worst, std::abs(v1[i] - v2[i]) / w);
  }
  return worst;
}

}  // namespace sgame
