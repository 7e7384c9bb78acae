#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "stable_tmle/scoring.hpp"
#include "stable_tmle/stable_model.hpp"
#include "stable_tmle/trig_projection.hpp"

namespace stable_tmle {

/// Coordinate-wise box for (mu, sigma, alpha, beta).
struct ParamBox {
  Eigen::Vector4d lower{-1e12, 1e-6, 0.1, -1.0};
  Eigen::Vector4d upper{1e12, 1e12, 2.0, 1.0};

  bool contains(const StableParams& theta) const;
  StableParams clamp(const StableParams& theta) const;
};

struct FitConfig {
  Grid grid = default_iid_grid();
  int max_iter = 200;
  double tol_step = 1e-8;   // max-norm of the parameter update
  double tol_score = 1e-8;  // max-norm of the empirical score
  double min_delta = 1.0 / 64.0;
  ParamBox box;

  void validate() const;
};

struct FitRecord {
  StableParams theta;
  double score_norm = 0.0;
  double delta = 0.0;
};

struct FitResult {
  StableParams theta_hat;
  InfoMatrix info = InfoMatrix::Zero();
  /// sqrt(diag(info^{-1}) / n); NaN when info is singular.
  Eigen::Vector4d std_errors = Eigen::Vector4d::Constant(0.0);
  int iterations = 0;
  double final_score_norm = 0.0;  // max-norm of the score, bound-active components zeroed
  bool converged = false;
  FitStatus status = FitStatus::kMaxIterations;
  bool at_boundary = false;
  std::vector<FitRecord> trace;
  int ridge_events = 0;
};

/// Inversion of the characteristic-function equations at two points u1 < u2:
///   alpha = log(log|phi(u1)| / log|phi(u2)|) / log(u1 / u2)   clamped to [0.15, 1.95]
///   sigma = (-log|phi(u2)|)^{1/alpha} / u2
/// then (mu, beta) from the two phase equations
///   arg phi(u) = mu u - beta |sigma u|^alpha K(alpha, log|sigma u|),
/// with beta clamped to [-0.95, 0.95]. Throws DegenerateSample when a modulus
/// is within 1e-12 of 0 or 1.
StableParams preliminary_from_chf(double u1, Complex phi1, double u2, Complex phi2);

/// Consistent starting value from the empirical characteristic function at
/// u = 0.2 and 1.0. The sample is first standardized by its median and half
/// its interquartile range so the two fixed points sit where the empirical
/// characteristic function is informative; the estimate is mapped back
/// through the location-scale property of the parametrization. Needs n >= 20.
StableParams preliminary_estimate(std::span<const double> data);

/// Trigonometrically approximated maximum likelihood fit: root of the
/// empirical projected score found by Fisher scoring from `init` (default:
/// preliminary_estimate clamped into the box).
FitResult tml_fit(std::span<const double> data, const FitConfig& cfg,
                  std::optional<StableParams> init = std::nullopt);

/// Explicit GMM: solves gamma_theta(theta) Sigma(w)^{-1} (g_bar - gamma(theta)) = 0
/// with the weight covariance frozen at `weight_theta`.
FitResult explicit_gmm_fit(std::span<const double> data, const FitConfig& cfg,
                           const StableParams& weight_theta,
                           std::optional<StableParams> init = std::nullopt);

/// `rounds` explicit GMM fits, each re-weighted at the previous estimate.
/// The first weight (and start) is `init` or the preliminary estimate.
FitResult iterated_explicit_gmm(std::span<const double> data, const FitConfig& cfg, int rounds,
                                std::optional<StableParams> init = std::nullopt);

}  // namespace stable_tmle
