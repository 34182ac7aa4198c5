#pragma once

#include <cmath>

#include <Eigen/Core>

namespace reconf {

/// Euclidean projection of v = (t; u) onto the second-order cone {t >= ||u||}, in place.
template <typename Derived>
void project_soc_inplace(Eigen::MatrixBase<Derived> const& v_) {
  using Scalar = typename Derived::Scalar;
  auto& v = const_cast<Eigen::MatrixBase<Derived>&>(v_);
  const Scalar t = v(0);
  if (v.size() == 1) {
    if (t < Scalar(0)) v(0) = Scalar(0);
    return;
  }
  const Scalar norm_u = v.tail(v.size() - 1).norm();
  if (norm_u <= t) return;
  if (norm_u <= -t) {
    v.setZero();
    return;
  }
  const Scalar alpha = (t + norm_u) / Scalar(2);
  v(0) = alpha;
  v.tail(v.size() - 1) *= alpha / norm_u;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_soc(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out = v;
  project_soc_inplace(out);
  return out;
}

template <typename Derived>
bool in_soc(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar tol = 0) {
  if (v.size() == 1) return v(0) >= -tol;
  return v.tail(v.size() - 1).norm() <= v(0) + tol;
}

/// Maps a rotated-cone point (p, q, u) with 2pq >= ||u||^2, p, q >= 0 to the
/// equivalent standard-cone point (p + q; p - q, sqrt(2) u).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> rotated_point_to_soc(
    typename Derived::Scalar p, typename Derived::Scalar q, const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(u.size() + 2);
  out(0) = p + q;
  out(1) = p - q;
  out.tail(u.size()) = std::sqrt(Scalar(2)) * u;
  return out;
}

template <typename Scalar>
Scalar project_interval(Scalar v, Scalar lower, Scalar upper) {
  return v < lower ? lower : (v > upper ? upper : v);
}

}  // namespace reconf
