#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "stable_tmle/sampling.hpp"
#include "stable_tmle/scoring.hpp"
#include "stable_tmle/stable_model.hpp"
#include "stable_tmle/trig_projection.hpp"

namespace stable_tmle {

/// Conditional characteristic function of X_t given X_s = x_prev, dt = t - s:
///   exp(i u e^{-lambda dt} x_prev - |sigma u|^alpha (1 - e^{-alpha lambda dt}) / (lambda alpha)).
Complex cond_chf(double u, const OUParams& p, double x_prev, double dt);

/// Value and partials in (alpha, sigma, lambda), each psi_{theta_i} * phi with
///   psi_lambda = -i u dt x_prev e^{-lambda dt}
///                + |sigma u|^alpha / (lambda alpha) (q / lambda - alpha dt e^{-alpha lambda dt})
///   psi_sigma  = -sigma^{alpha-1} |u|^alpha q / lambda
///   psi_alpha  = |sigma u|^alpha / (lambda alpha) ((1/alpha - log|sigma u|) q
///                - lambda dt e^{-alpha lambda dt})
/// where q = 1 - e^{-alpha lambda dt}.
struct CondChfGradient {
  Complex value;
  Complex d_alpha;
  Complex d_sigma;
  Complex d_lambda;

  Complex partial(int index) const;
};

CondChfGradient cond_chf_gradient(double u, const OUParams& p, double x_prev, double dt);

/// Conditional analogue of TrigMoments for one transition; 3 parameter rows.
struct OUCondMoments {
  Eigen::VectorXd gamma;
  Eigen::MatrixXd gamma_theta;  // 3 x 2k
  Eigen::MatrixXd sigma;
  SpdFactor factor;
  double ridge_used = 0.0;
};

OUCondMoments ou_cond_moments(const Grid& grid, const OUParams& p, double x_prev, double dt);

struct OUParamBox {
  Eigen::Vector3d lower{0.3, 1e-6, 1e-4};
  Eigen::Vector3d upper{2.0, 1e12, 1e3};

  bool contains(const OUParams& p) const;
  OUParams clamp(const OUParams& p) const;
};

struct OUFitConfig {
  Grid grid = default_ou_grid();
  int max_iter = 200;
  double tol_step = 1e-8;
  double tol_score = 1e-8;
  double min_delta = 1.0 / 64.0;
  OUParamBox box;

  void validate() const;
};

struct OUFitRecord {
  OUParams theta;
  double score_norm = 0.0;
  double delta = 0.0;
};

struct OUFitResult {
  OUParams theta_hat;
  Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
  Eigen::Vector3d std_errors = Eigen::Vector3d::Zero();
  int iterations = 0;
  double final_score_norm = 0.0;  // max-norm of the score, bound-active components zeroed
  bool converged = false;
  FitStatus status = FitStatus::kMaxIterations;
  bool at_boundary = false;
  std::vector<OUFitRecord> trace;
  int ridge_events = 0;
};

/// Mean conditional projected score over the transitions of `path` and the
/// matching mean information.
struct ConditionalScore {
  Eigen::Vector3d score = Eigen::Vector3d::Zero();
  Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
  double ridge = 0.0;
};

/// Fast route. Every transition law is the same symmetric stable law Y
/// (scale transition_scale(p, h)) shifted by m_t = e^{-lambda h} X_t. A shift
/// acts on g as an orthogonal rotation R(m_t), so
///   Sigma_{t|s} = R Sigma_Y R^T,  S_t = J_t^T Sigma_Y^{-1} (g(X_{t+1} - m_t) - gamma_Y)
/// with J_t = e^{-i u m_t} dphi_{t|s}/dtheta affine in X_t. One factorization
/// of Sigma_Y per parameter value serves all transitions, and the sums over t
/// reduce to two accumulated residual vectors. Sums run in time order.
ConditionalScore conditional_score(const OUPath& path, const OUParams& p, const Grid& grid);

/// Direct route: builds and factors OUCondMoments for every transition.
/// Used to cross-check conditional_score.
ConditionalScore conditional_score_reference(const OUPath& path, const OUParams& p,
                                             const Grid& grid);

/// Per-transition score of one transition x_prev -> x_next (direct route).
Eigen::Vector3d conditional_transition_score(double x_prev, double x_next, const OUParams& p,
                                             double dt, const Grid& grid);

/// Starting value for tcml_fit:
///   rho as the least-absolute-deviation slope of X_{t+1} on X_t (no
///   intercept), lambda = -log(rho) / h (clamped to the box);
///   alpha and the innovation scale from preliminary_estimate applied to the
///   increments X_{t+1} - rho X_t; sigma recovered by inverting transition_scale.
OUParams ou_preliminary_estimate(const OUPath& path, const OUParamBox& box = {});

/// Trigonometrically approximated conditional ML fit by Fisher scoring.
OUFitResult tcml_fit(const OUPath& path, const OUFitConfig& cfg,
                     std::optional<OUParams> init = std::nullopt);

/// Left Riemann approximation h * sum_t X_t^2 of the integrated square.
double integrated_square(const OUPath& path);

/// sqrt(W_i) (lambda_i - mean(lambda)).
double lambda_star(std::span<const double> lambda_hats, std::span<const double> paths_w,
                   std::size_t index);

std::vector<double> lambda_star_all(std::span<const double> lambda_hats,
                                    std::span<const double> paths_w);

}  // namespace stable_tmle
