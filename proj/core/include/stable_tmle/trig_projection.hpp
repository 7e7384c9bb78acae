#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "stable_tmle/numkit.hpp"
#include "stable_tmle/stable_model.hpp"

namespace stable_tmle {

/// Ordered evaluation points u_1..u_k of the trigonometric features. Points are
/// nonzero with pairwise distinct absolute values, which keeps the features
/// linearly independent and their covariance positive definite.
class Grid {
 public:
  explicit Grid(std::vector<double> points, std::optional<double> tau = std::nullopt);

  std::span<const double> points() const noexcept { return points_; }
  std::size_t k() const noexcept { return points_.size(); }
  /// Spacing, set only for equidistant grids.
  std::optional<double> tau() const noexcept { return tau_; }

  /// Every point multiplied by `factor` (> 0). Used to keep estimating
  /// equations invariant when data are rescaled by 1/factor.
  Grid scaled(double factor) const;

 private:
  std::vector<double> points_;
  std::optional<double> tau_;
};

/// start, start + step, ..., start + (k-1) step.
Grid equidistant_grid(double start, double step, int k);

/// 101 points 0.01, 0.06, ..., 5.01 used for i.i.d. fits.
Grid default_iid_grid();
/// 101 points 0.05, 0.10, ..., 5.05 used for Ornstein-Uhlenbeck fits.
Grid default_ou_grid();

using ScoreValue = Eigen::Vector4d;
using InfoMatrix = Eigen::Matrix4d;

/// Moments of g(X) = (cos u_1 X..cos u_k X, sin u_1 X..sin u_k X) at one theta.
struct TrigMoments {
  Eigen::VectorXd gamma;        // E g(X), length 2k
  Eigen::MatrixXd gamma_theta;  // 4 x 2k, row i = d gamma / d theta_i
  Eigen::MatrixXd sigma;        // Cov g(X), 2k x 2k
  SpdFactor factor;             // of sigma (+ ridge_used * I)
  double ridge_used = 0.0;
  Eigen::MatrixXd whitened;     // L^{-1} gamma_theta^T, 2k x 4
};

Eigen::VectorXd trig_features(double x, const Grid& grid);

/// n^{-1} sum_j g(X_j), accumulated in index order.
Eigen::VectorXd trig_feature_mean(std::span<const double> data, const Grid& grid);

Eigen::VectorXd gamma_vector(const Grid& grid, const StableParams& theta);
Eigen::MatrixXd gamma_jacobian(const Grid& grid, const StableParams& theta);

/// Covariance of g(X) for any law with characteristic function `chf`, through
/// the product-to-sum identities
///   Cov(cos u_i X, cos u_j X) = (R(u_i+u_j) + R(u_i-u_j))/2 - R(u_i) R(u_j)
///   Cov(cos u_i X, sin u_j X) = (I(u_i+u_j) - I(u_i-u_j))/2 - R(u_i) I(u_j)
///   Cov(sin u_i X, sin u_j X) = (R(u_i-u_j) - R(u_i+u_j))/2 - I(u_i) I(u_j)
/// Each entry is computed once and mirrored, so the result is exactly symmetric.
template <class ChfFn>
Eigen::MatrixXd trig_covariance(std::span<const double> u, ChfFn&& chf_at);

Eigen::MatrixXd sigma_matrix(const Grid& grid, const StableParams& theta);

struct RidgedFactor {
  SpdFactor factor;
  double ridge = 0.0;
};

/// Factors sigma; on failure retries with ridge r * trace(sigma) / dim for
/// r in {1e-12, 1e-10, 1e-8}. Throws FactorizationFailure beyond that.
RidgedFactor factor_with_ridge(const Eigen::MatrixXd& sigma);

/// Builds gamma, gamma_theta, sigma and the cached factorization.
TrigMoments trig_moments(const Grid& grid, const StableParams& theta);

/// gamma_theta Sigma^{-1} (g(x) - gamma).
ScoreValue trig_score(double x, const TrigMoments& tm, const Grid& grid);

/// Mean of trig_score over the sample, computed from the mean feature vector.
ScoreValue empirical_score(std::span<const double> data, const TrigMoments& tm,
                           const Grid& grid);

/// Score from a precomputed mean feature vector.
ScoreValue score_from_feature_mean(const Eigen::VectorXd& feature_mean, const TrigMoments& tm);

/// gamma_theta Sigma^{-1} gamma_theta^T.
InfoMatrix info_matrix(const TrigMoments& tm);

// ---------------------------------------------------------------------------

template <class ChfFn>
Eigen::MatrixXd trig_covariance(std::span<const double> u, ChfFn&& chf_at) {
  const Eigen::Index k = static_cast<Eigen::Index>(u.size());
  std::vector<Complex> base(u.size());
  for (Eigen::Index i = 0; i < k; ++i) base[i] = chf_at(u[i]);

  Eigen::MatrixXcd plus(k, k);
  Eigen::MatrixXcd minus(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    minus(i, i) = Complex(1.0, 0.0);
    for (Eigen::Index j = i; j < k; ++j) {
      const Complex p = chf_at(u[i] + u[j]);
      plus(i, j) = p;
      plus(j, i) = p;
      if (j > i) {
        const Complex m = chf_at(u[i] - u[j]);
        minus(i, j) = m;
        minus(j, i) = std::conj(m);
      }
    }
  }

  Eigen::MatrixXd s(2 * k, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double ri = base[i].real();
    const double ii = base[i].imag();
    for (Eigen::Index j = i; j < k; ++j) {
      const double rj = base[j].real();
      const double ij = base[j].imag();
      const double cc = 0.5 * (plus(i, j).real() + minus(i, j).real()) - ri * rj;
      const double ss = 0.5 * (minus(i, j).real() - plus(i, j).real()) - ii * ij;
      s(i, j) = cc;
      s(j, i) = cc;
      s(k + i, k + j) = ss;
      s(k + j, k + i) = ss;
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      const double cs = 0.5 * (plus(i, j).imag() - minus(i, j).imag()) - ri * base[j].imag();
      s(i, k + j) = cs;
      s(k + j, i) = cs;
    }
  }
  return s;
}

}  // namespace stable_tmle
