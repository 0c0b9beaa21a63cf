#pragma once

#include <Eigen/Core>
#include <cmath>
#include <memory>

#include "sgame/errors.hpp"

namespace sgame {

/// Finite box {0,...,b_0} x ... x {0,...,b_{d-1}} standing in for Z_+^d,
/// with a fixed lexicographic indexing (coordinate 0 most significant).
/// Immutable after construction; copies share the enumeration tables.
class TruncatedStateSpace {
 public:
  TruncatedStateSpace() : TruncatedStateSpace(1, 1) {}

  TruncatedStateSpace(int dim, int x_max)
      : TruncatedStateSpace(Eigen::VectorXi::Constant(dim, x_max)) {}

  explicit TruncatedStateSpace(const Eigen::VectorXi& bounds)
      : impl_(std::make_shared<const Impl>(bounds)) {}

  int dim() const { return static_cast<int>(impl_->bounds.size()); }
  int bound(int coord) const { return impl_->bounds[coord]; }
  const Eigen::VectorXi& bounds() const { return impl_->bounds; }
  Eigen::Index size() const { return impl_->states.rows(); }

  /// Row i of the returned matrix is the state with index i.
  const Eigen::MatrixXi& states() const { return impl_->states; }

  Eigen::Index index_of(const Eigen::Ref<const Eigen::VectorXi>& x) const {
    Eigen::Index idx = 0;
    for (int l = 0; l < dim(); ++l) {
      if (x[l] < 0 || x[l] > impl_->bounds[l])
        throw ConfigError("state coordinate outside truncated box");
      idx += static_cast<Eigen::Index>(x[l]) * impl_->strides[l];
    }
    return idx;
  }

  Eigen::VectorXi state_of(Eigen::Index idx) const {
    return impl_->states.row(idx).transpose();
  }

  /// ||x||_inf per state, in index order.
  const Eigen::VectorXi& inf_norms() const { return impl_->inf_norms; }

  /// ||x||_p^p per state, in index order.
  Eigen::VectorXd p_norm_weights(int p) const {
    const Eigen::MatrixXi& s = impl_->states;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(s.rows());
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (int l = 0; l < s.cols(); ++l)
        w[i] += std::pow(static_cast<double>(s(i, l)), p);
    return w;
  }

  bool same_as(const TruncatedStateSpace& other) const {
    return impl_ == other.impl_ || impl_->bounds == other.impl_->bounds;
  }

 private:
  struct Impl {
    explicit Impl(const Eigen::VectorXi& b) : bounds(b) {
      if (b.size() == 0) throw ConfigError("state space must have dim >= 1");
      // Bound 0 is allowed so degenerate single-state games stay expressible.
      if ((b.array() < 0).any())
        throw ConfigError("truncation bound must be nonnegative");
      const int d = static_cast<int>(b.size());
      strides.resize(d);
      Eigen::Index n = 1;
      for (int l = d - 1; l >= 0; --l) {
        strides[l] = n;
        n *= b[l] + 1;
      }
      states.resize(n, d);
      inf_norms.resize(n);
      Eigen::VectorXi x = Eigen::VectorXi::Zero(d);
      for (Eigen::Index i = 0; i < n; ++i) {
        states.row(i) = x.transpose();
        inf_norms[i] = x.maxCoeff();
        for (int l = d - 1; l >= 0; --l) {  // odometer increment
          if (++x[l] <= b[l]) break;
          x[l] = 0;
        }
      }
    }
    Eigen::VectorXi bounds;
    Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1> strides;
    Eigen::MatrixXi states;
    Eigen::VectorXi inf_norms;
  };

  std::shared_ptr<const Impl> impl_;
};

}  // namespace sgame
