#include "stable_tmle/numkit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace stable_tmle {

void SpdFactor::forward_solve_in_place(Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != lower_.rows()) {
    throw DimensionMismatch("forward solve: rhs has " + std::to_string(rhs.rows()) +
                            " rows, factor has " + std::to_string(lower_.rows()));
  }
  lower_.triangularView<Eigen::Lower>().solveInPlace(rhs);
}

void SpdFactor::forward_solve_in_place(Eigen::VectorXd& rhs) const {
  if (rhs.size() != lower_.rows()) {
    throw DimensionMismatch("forward solve: rhs has " + std::to_string(rhs.size()) +
                            " rows, factor has " + std::to_string(lower_.rows()));
  }
  lower_.triangularView<Eigen::Lower>().solveInPlace(rhs);
}

Eigen::MatrixXd SpdFactor::reconstruct() const { return lower_ * lower_.transpose(); }

SpdFactor spd_factor(const Eigen::MatrixXd& m, double relative_floor) {
  if (m.rows() != m.cols()) throw DimensionMismatch("spd_factor: matrix is not square");
  const Eigen::Index n = m.rows();
  const double floor =
      n == 0 ? 0.0 : relative_floor * m.diagonal().cwiseAbs().maxCoeff();

  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double pivot = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > floor)) throw NotPositiveDefinite(static_cast<std::size_t>(j), pivot);
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    const Eigen::Index rest = n - j - 1;
    if (rest > 0) {
      l.col(j).tail(rest) =
          (m.col(j).tail(rest) - l.bottomLeftCorner(rest, j) * l.row(j).head(j).transpose()) / d;
    }
  }
  return SpdFactor(std::move(l));
}

Eigen::MatrixXd spd_solve(const SpdFactor& f, const Eigen::MatrixXd& rhs) {
  Eigen::MatrixXd x = rhs;
  f.forward_solve_in_place(x);
  f.lower().transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Eigen::VectorXd spd_solve(const SpdFactor& f, const Eigen::VectorXd& rhs) {
  Eigen::VectorXd x = rhs;
  f.forward_solve_in_place(x);
  f.lower().transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

template <int N>
Eigen::Matrix<double, N, N> small_spd_inverse(const Eigen::Matrix<double, N, N>& m) {
  const SpdFactor f = spd_factor(Eigen::MatrixXd(m), 1e-12);
  Eigen::MatrixXd inv = spd_solve(f, Eigen::MatrixXd(Eigen::MatrixXd::Identity(N, N)));
  Eigen::Matrix<double, N, N> out = inv;
  return 0.5 * (out + out.transpose());
}

template Eigen::Matrix<double, 3, 3> small_spd_inverse<3>(const Eigen::Matrix<double, 3, 3>&);
template Eigen::Matrix<double, 4, 4> small_spd_inverse<4>(const Eigen::Matrix<double, 4, 4>&);

Eigen::Matrix4d sym4_inverse(const Eigen::Matrix4d& m) { return small_spd_inverse<4>(m); }

Eigen::MatrixXd finite_diff_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double step) {
  if (!(step > 0.0)) throw InvalidArgument("finite_diff_jacobian: step must be positive");
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd up = x;
    Eigen::VectorXd down = x;
    up[j] += step;
    down[j] -= step;
    const Eigen::VectorXd diff = (f(up) - f(down)) / (2.0 * step);
    if (j == 0) jac.resize(diff.size(), x.size());
    jac.col(j) = diff;
  }
  return jac;
}

Eigen::MatrixXd finite_diff_jacobian(
    const std::function<Eigen::VectorXd(const StableParams&)>& f, const StableParams& theta,
    double step) {
  return finite_diff_jacobian(
      [&f](const Eigen::VectorXd& v) {
        return f(StableParams::from_vector(Eigen::Vector4d(v)));
      },
      Eigen::VectorXd(theta.to_vector()), step);
}

}  // namespace stable_tmle
