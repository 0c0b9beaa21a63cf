#pragma once

#include <Eigen/Core>
#include <utility>

#include "sgame/errors.hpp"
#include "sgame/state_space.hpp"

namespace sgame {

inline constexpr double kMassTol = 1e-12;

/// Probability vector over states, or over state-action pairs when players
/// are coupled through actions. Flat layout for the coupled case is
/// flat = state_index * n_actions + action_index. The 1-p norm is cached at
/// construction; the weight of a state-action pair is the p-norm of its
/// state part.
class PopulationState {
 public:
  static PopulationState over_states(const TruncatedStateSpace& space,
                                     Eigen::VectorXd mass, int p) {
    return PopulationState(space, 1, std::move(mass), p);
  }

  static PopulationState over_state_actions(const TruncatedStateSpace& space,
                                            int n_actions,
                                            Eigen::VectorXd mass, int p) {
    if (n_actions < 1) throw ConfigError("n_actions must be >= 1");
    return PopulationState(space, n_actions, std::move(mass), p);
  }

  static PopulationState point_mass(const TruncatedStateSpace& space,
                                    Eigen::Index state_index, int p) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(space.size());
    m[state_index] = 1.0;
    return PopulationState(space, 1, std::move(m), p);
  }

  static PopulationState uniform(const TruncatedStateSpace& space, int p) {
    Eigen::VectorXd m = Eigen::VectorXd::Constant(
        space.size(), 1.0 / static_cast<double>(space.size()));
    return PopulationState(space, 1, std::move(m), p);
  }

  const TruncatedStateSpace& space() const { return space_; }
  const Eigen::VectorXd& mass() const { return mass_; }
  int norm_exponent() const { return p_; }
  bool coupled() const { return n_actions_ > 1; }
  int n_actions() const { return n_actions_; }
  Eigen::Index size() const { return mass_.size(); }

  Eigen::Index state_index_of(Eigen::Index flat) const {
    return flat / n_actions_;
  }
  Eigen::Index action_index_of(Eigen::Index flat) const {
    return flat % n_actions_;
  }

  /// Marginal distribution over states (identity when not coupled).
  Eigen::VectorXd state_marginal() const {
    if (n_actions_ == 1) return mass_;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(space_.size());
    for (Eigen::Index flat = 0; flat < mass_.size(); ++flat)
      g[flat / n_actions_] += mass_[flat];
    return g;
  }

  /// ||x||_p^p per flat index (state part only for state-action pairs).
  const Eigen::VectorXd& p_weights() const { return weights_; }

  double cached_one_p_norm() const { return one_p_norm_; }

  /// Rebuild with the same support and p but different mass.
  PopulationState with_mass(Eigen::VectorXd mass) const {
    return PopulationState(space_, n_actions_, std::move(mass), p_);
  }

 private:
  PopulationState(const TruncatedStateSpace& space, int n_actions,
                  Eigen::VectorXd mass, int p)
      : space_(space), n_actions_(n_actions), mass_(std::move(mass)), p_(p) {
    if (p_ < 1) throw ConfigError("norm exponent p must be a positive integer");
    if (mass_.size() != space_.size() * n_actions_)
      throw ConfigError("population mass has wrong length for its support");
    if ((mass_.array() < 0.0).any())
      throw ConfigError("population mass must be nonnegative");
    if (std::abs(mass_.sum() - 1.0) > kMassTol)
      throw ConfigError("population mass must sum to 1 within 1e-12");
    Eigen::VectorXd state_w = space_.p_norm_weights(p_);
    if (n_actions_ == 1) {
      weights_ = std::move(state_w);
    } else {
      weights_.resize(mass_.size());
      for (Eigen::Index flat = 0; flat < mass_.size(); ++flat)
        weights_[flat] = state_w[flat / n_actions_];
    }
    one_p_norm_ = weights_.dot(mass_);
  }

  TruncatedStateSpace space_;
  int n_actions_;
  Eigen::VectorXd mass_;
  int p_;
  Eigen::VectorXd weights_;
  double one_p_norm_ = 0.0;
};

}  // namespace sgame
