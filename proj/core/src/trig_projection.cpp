#include "stable_tmle/trig_projection.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "stable_tmle/errors.hpp"

namespace stable_tmle {

Grid::Grid(std::vector<double> points, std::optional<double> tau)
    : points_(std::move(points)), tau_(tau) {
  if (points_.empty()) throw InvalidArgument("grid must contain at least one point");
  std::vector<double> mags;
  mags.reserve(points_.size());
  for (double u : points_) {
    if (!std::isfinite(u) || u == 0.0) {
      throw InvalidArgument("grid points must be finite and nonzero");
    }
    mags.push_back(std::abs(u));
  }
  std::sort(mags.begin(), mags.end());
  if (std::adjacent_find(mags.begin(), mags.end()) != mags.end()) {
    throw InvalidArgument("grid points must have pairwise distinct absolute values");
  }
  if (tau_ && !(*tau_ > 0.0)) throw InvalidArgument("grid spacing must be positive");
}

Grid Grid::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw InvalidArgument("grid scale factor must be positive");
  }
  std::vector<double> pts(points_.size());
  std::transform(points_.begin(), points_.end(), pts.begin(),
                 [factor](double u) { return u * factor; });
  std::optional<double> tau;
  if (tau_) tau = *tau_ * factor;
  return Grid(std::move(pts), tau);
}

Grid equidistant_grid(double start, double step, int k) {
  if (k < 1) throw InvalidArgument("grid size k must be positive");
  if (!(step > 0.0)) throw InvalidArgument("grid step must be positive");
  std::vector<double> pts(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pts[static_cast<std::size_t>(i)] = start + step * i;
  return Grid(std::move(pts), step);
}

Grid default_iid_grid() { return equidistant_grid(0.01, 0.05, 101); }
Grid default_ou_grid() { return equidistant_grid(0.05, 0.05, 101); }

Eigen::VectorXd trig_features(double x, const Grid& grid) {
  const auto u = grid.points();
  const Eigen::Index k = static_cast<Eigen::Index>(u.size());
  Eigen::VectorXd g(2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double a = u[i] * x;
    g[i] = std::cos(a);
    g[k + i] = std::sin(a);
  }
  return g;
}

Eigen::VectorXd trig_feature_mean(std::span<const double> data, const Grid& grid) {
  if (data.empty()) throw InvalidArgument("feature mean of an empty sample");
  const auto u = grid.points();
  const Eigen::Index k = static_cast<Eigen::Index>(u.size());
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(2 * k);
  for (double x : data) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double a = u[i] * x;
      acc[i] += std::cos(a);
      acc[k + i] += std::sin(a);
    }
  }
  return acc / static_cast<double>(data.size());
}

Eigen::VectorXd gamma_vector(const Grid& grid, const StableParams& theta) {
  const auto u = grid.points();
  const Eigen::Index k = static_cast<Eigen::Index>(u.size());
  Eigen::VectorXd g(2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Complex phi = chf(u[i], theta);
    g[i] = phi.real();
    g[k + i] = phi.imag();
  }
  return g;
}

namespace {

void fill_jacobian_column(Eigen::MatrixXd& jac, Eigen::Index i, Eigen::Index k,
                          const ChfGradient& d) {
  const std::array<Complex, 4> parts{d.d_mu, d.d_sigma, d.d_alpha, d.d_beta};
  for (int r = 0; r < 4; ++r) {
    jac(r, i) = parts[static_cast<std::size_t>(r)].real();
    jac(r, k + i) = parts[static_cast<std::size_t>(r)].imag();
  }
}

}  // namespace

Eigen::MatrixXd gamma_jacobian(const Grid& grid, const StableParams& theta) {
  const auto u = grid.points();
  const Eigen::Index k = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd jac(4, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i) fill_jacobian_column(jac, i, k, chf_gradient(u[i], theta));
  return jac;
}

Eigen::MatrixXd sigma_matrix(const Grid& grid, const StableParams& theta) {
  return trig_covariance(grid.points(), [&theta](double v) { return chf(v, theta); });
}

RidgedFactor factor_with_ridge(const Eigen::MatrixXd& sigma) {
  try {
    return {spd_factor(sigma), 0.0};
  } catch (const NotPositiveDefinite&) {
  }
  const double scale = sigma.trace() / static_cast<double>(sigma.rows());
  for (double r : {1e-12, 1e-10, 1e-8}) {
    const double ridge = r * scale;
    Eigen::MatrixXd shifted = sigma;
    shifted.diagonal().array() += ridge;
    try {
      return {spd_factor(shifted), ridge};
    } catch (const NotPositiveDefinite&) {
    }
  }
  throw FactorizationFailure("feature covariance is not positive definite even with ridge " +
                             std::to_string(1e-8 * scale));
}

TrigMoments trig_moments(const Grid& grid, const StableParams& theta) {
  const auto u = grid.points();
  const Eigen::Index k = static_cast<Eigen::Index>(u.size());
  TrigMoments tm;
  tm.gamma.resize(2 * k);
  tm.gamma_theta.resize(4, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const ChfGradient d = chf_gradient(u[i], theta);
    tm.gamma[i] = d.value.real();
    tm.gamma[k + i] = d.value.imag();
    fill_jacobian_column(tm.gamma_theta, i, k, d);
  }
  tm.sigma = sigma_matrix(grid, theta);
  RidgedFactor rf = factor_with_ridge(tm.sigma);
  tm.factor = std::move(rf.factor);
  tm.ridge_used = rf.ridge;
  tm.whitened = tm.gamma_theta.transpose();
  tm.factor.forward_solve_in_place(tm.whitened);
  return tm;
}

ScoreValue score_from_feature_mean(const Eigen::VectorXd& feature_mean, const TrigMoments& tm) {
  Eigen::VectorXd r = feature_mean - tm.gamma;
  tm.factor.forward_solve_in_place(r);
  return tm.whitened.transpose() * r;
}

ScoreValue trig_score(double x, const TrigMoments& tm, const Grid& grid) {
  return score_from_feature_mean(trig_features(x, grid), tm);
}

ScoreValue empirical_score(std::span<const double> data, const TrigMoments& tm,
                           const Grid& grid) {
  return score_from_feature_mean(trig_feature_mean(data, grid), tm);
}

InfoMatrix info_matrix(const TrigMoments& tm) {
  const InfoMatrix m = tm.whitened.transpose() * tm.whitened;
  return 0.5 * (m + m.transpose());
}

}  // namespace stable_tmle
