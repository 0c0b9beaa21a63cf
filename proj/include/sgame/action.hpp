#pragma once

#include <Eigen/Core>
#include <cmath>
#include <utility>

#include "sgame/errors.hpp"

namespace sgame {

/// Feasible actions: either a compact interval [lo, hi] optimized on a
/// uniform grid, or an explicit finite list of pure actions over which
/// mixing is allowed.
class ActionSet {
 public:
  enum class Kind { ContinuousBox, FinitePure };

  static ActionSet continuous_box(double lo, double hi,
                                  double grid_step_fraction = 1e-3) {
    if (!(lo <= hi)) throw ConfigError("action interval requires a_lo <= a_hi");
    if (!(grid_step_fraction > 0.0))
      throw ConfigError("action grid resolution must be positive");
    ActionSet a;
    a.kind_ = Kind::ContinuousBox;
    a.lo_ = lo;
    a.hi_ = hi;
    a.grid_step_fraction_ = grid_step_fraction;
    return a;
  }

  static ActionSet finite_pure(Eigen::VectorXd values) {
    if (values.size() == 0) throw ConfigError("pure action set must be nonempty");
    for (Eigen::Index i = 0; i < values.size(); ++i)
      for (Eigen::Index j = i + 1; j < values.size(); ++j)
        if (values[i] == values[j])
          throw ConfigError("pure action set contains duplicate actions");
    ActionSet a;
    a.kind_ = Kind::FinitePure;
    a.values_ = std::move(values);
    return a;
  }

  Kind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double grid_step_fraction() const { return grid_step_fraction_; }
  const Eigen::VectorXd& pure_values() const { return values_; }
  int n_pure() const { return static_cast<int>(values_.size()); }

  /// Evaluation grid: the pure list itself, or a uniform discretization of
  /// the interval at the given step fraction (overriding the default).
  Eigen::VectorXd grid(double step_fraction = 0.0) const {
    if (kind_ == Kind::FinitePure) return values_;
    const double frac = step_fraction > 0.0 ? step_fraction : grid_step_fraction_;
    if (hi_ == lo_) return Eigen::VectorXd::Constant(1, lo_);
    const int n = static_cast<int>(std::lround(1.0 / frac)) + 1;
    return Eigen::VectorXd::LinSpaced(std::max(n, 2), lo_, hi_);
  }

 private:
  Kind kind_ = Kind::ContinuousBox;
  double lo_ = 0.0, hi_ = 0.0;
  double grid_step_fraction_ = 1e-3;
  Eigen::VectorXd values_;
};

/// Stationary policy on the player's own state: one action per state (pure),
/// or a per-state distribution over a finite pure-action set (mixed).
class ObliviousStrategy {
 public:
  enum class Kind { Pure, Mixed };

  /// Pure policy over a continuous action set; `actions[i]` is the action
  /// taken at state index i.
  static ObliviousStrategy pure_continuous(Eigen::VectorXd actions) {
    ObliviousStrategy s;
    s.kind_ = Kind::Pure;
    s.actions_ = std::move(actions);
    return s;
  }

  /// Pure policy over a finite set; stores both the chosen index and the
  /// action value per state.
  static ObliviousStrategy pure_finite(Eigen::VectorXi indices,
                                       const Eigen::VectorXd& pure_values) {
    ObliviousStrategy s;
    s.kind_ = Kind::Pure;
    s.indices_ = std::move(indices);
    s.actions_.resize(s.indices_.size());
    for (Eigen::Index i = 0; i < s.indices_.size(); ++i) {
      if (s.indices_[i] < 0 || s.indices_[i] >= pure_values.size())
        throw ConfigError("pure strategy assigns an action outside the set");
      s.actions_[i] = pure_values[s.indices_[i]];
    }
    return s;
  }

  /// Mixed policy: row i of `mix` is the distribution over pure actions at
  /// state index i.
  static ObliviousStrategy mixed(Eigen::MatrixXd mix,
                                 Eigen::VectorXd pure_values) {
    if (mix.cols() != pure_values.size())
      throw ConfigError("mixed strategy width does not match the action set");
    for (Eigen::Index i = 0; i < mix.rows(); ++i) {
      if ((mix.row(i).array() < 0.0).any() ||
          std::abs(mix.row(i).sum() - 1.0) > 1e-12)
        throw ConfigError(
            "mixed strategy rows must be distributions (sum 1 within 1e-12)");
    }
    ObliviousStrategy s;
    s.kind_ = Kind::Mixed;
    s.mix_ = std::move(mix);
    s.pure_values_ = std::move(pure_values);
    return s;
  }

  Kind kind() const { return kind_; }
  bool is_mixed() const { return kind_ == Kind::Mixed; }
  Eigen::Index n_states() const {
    return kind_ == Kind::Mixed ? mix_.rows() : actions_.size();
  }

  /// Action value at a state (pure strategies only).
  double action(Eigen::Index state_index) const { return actions_[state_index]; }
  int action_index(Eigen::Index state_index) const {
    return indices_[state_index];
  }
  bool has_indices() const { return indices_.size() > 0; }
  const Eigen::VectorXd& actions() const { return actions_; }
  const Eigen::VectorXi& indices() const { return indices_; }

  const Eigen::MatrixXd& mix() const { return mix_; }
  const Eigen::VectorXd& mix_values() const { return pure_values_; }

  /// Per-state distribution over the given finite set; pure-finite policies
  /// degrade to a point mass row.
  Eigen::VectorXd mix_row(Eigen::Index state_index, int n_pure) const {
    if (kind_ == Kind::Mixed) return mix_.row(state_index).transpose();
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n_pure);
    row[indices_[state_index]] = 1.0;
    return row;
  }

 private:
  Kind kind_ = Kind::Pure;
  Eigen::VectorXd actions_;     // pure: action value per state
  Eigen::VectorXi indices_;     // pure over finite set: index per state
  Eigen::MatrixXd mix_;         // mixed: n_states x n_pure
  Eigen::VectorXd pure_values_; // mixed: the underlying pure actions
};

}  // namespace sgame
