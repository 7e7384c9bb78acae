#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Core>

#include "stable_tmle/errors.hpp"
#include "stable_tmle/stable_model.hpp"

namespace stable_tmle {

/// Lower-triangular factor L with L L^T = M for a symmetric positive definite M.
class SpdFactor {
 public:
  SpdFactor() = default;
  explicit SpdFactor(Eigen::MatrixXd lower) : lower_(std::move(lower)) {}

  const Eigen::MatrixXd& lower() const noexcept { return lower_; }
  Eigen::Index dim() const noexcept { return lower_.rows(); }

  /// Solves L y = rhs in place (forward substitution only).
  void forward_solve_in_place(Eigen::MatrixXd& rhs) const;
  void forward_solve_in_place(Eigen::VectorXd& rhs) const;

  /// L L^T reassembled.
  Eigen::MatrixXd reconstruct() const;

 private:
  Eigen::MatrixXd lower_;
};

/// Dense Cholesky. Only the lower triangle of `m` is read. A pivot that is not
/// strictly greater than `relative_floor * max|diag(m)|` raises
/// NotPositiveDefinite carrying the pivot index.
SpdFactor spd_factor(const Eigen::MatrixXd& m, double relative_floor = 0.0);

/// Solves M x = rhs given the factor of M. Throws DimensionMismatch.
Eigen::MatrixXd spd_solve(const SpdFactor& f, const Eigen::MatrixXd& rhs);
Eigen::VectorXd spd_solve(const SpdFactor& f, const Eigen::VectorXd& rhs);

/// Inverse of a small symmetric positive definite matrix through its Cholesky
/// factor; the result is symmetrized. Pivots below 1e-12 of the largest
/// diagonal entry count as singular.
template <int N>
Eigen::Matrix<double, N, N> small_spd_inverse(const Eigen::Matrix<double, N, N>& m);

Eigen::Matrix4d sym4_inverse(const Eigen::Matrix4d& m);

/// Central-difference Jacobian of f at theta: column j holds
/// (f(theta + step e_j) - f(theta - step e_j)) / (2 step).
Eigen::MatrixXd finite_diff_jacobian(
    const std::function<Eigen::VectorXd(const StableParams&)>& f, const StableParams& theta,
    double step);

/// Same for a plain parameter vector of any dimension.
Eigen::MatrixXd finite_diff_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double step);

extern template Eigen::Matrix<double, 3, 3> small_spd_inverse<3>(const Eigen::Matrix<double, 3, 3>&);
extern template Eigen::Matrix<double, 4, 4> small_spd_inverse<4>(const Eigen::Matrix<double, 4, 4>&);

}  // namespace stable_tmle
