#pragma once

#include <complex>

#include <Eigen/Core>

namespace stable_tmle {

using Complex = std::complex<double>;

/// Parameters (mu, sigma, alpha, beta) of a stable law in the continuous
/// (Zolotarev M / Nolan S0) parametrization. The ordering of `to_vector` is
/// the ordering used by every gradient, Jacobian and information matrix.
struct StableParams {
  double mu = 0.0;
  double sigma = 1.0;
  double alpha = 2.0;
  double beta = 0.0;

  static constexpr int kDim = 4;
  enum Index : int { kMu = 0, kSigma = 1, kAlpha = 2, kBeta = 3 };

  /// Throws InvalidArgument unless sigma > 0, 0 < alpha <= 2, |beta| <= 1.
  void validate() const;
  bool valid() const noexcept;

  Eigen::Vector4d to_vector() const { return {mu, sigma, alpha, beta}; }
  static StableParams from_vector(const Eigen::Vector4d& v) {
    return {v[0], v[1], v[2], v[3]};
  }

  friend bool operator==(const StableParams&, const StableParams&) = default;
};

/// phi(u) together with its partial derivatives in (mu, sigma, alpha, beta).
struct ChfGradient {
  Complex value;
  Complex d_mu;
  Complex d_sigma;
  Complex d_alpha;
  Complex d_beta;

  Complex partial(int index) const;
};

/// Log characteristic function psi(u; theta).
///
/// For alpha != 1 the skewness term is
///   tan(pi alpha / 2) (|sigma u|^{1 - alpha} - 1),
/// a 0 * inf form as alpha -> 1 whose limit is (2/pi) log|sigma u|. It is
/// evaluated as
///   log|sigma u| * E(d log|sigma u|) * (2/pi) * C(pi d / 2),   d = 1 - alpha,
/// with E(z) = expm1(z)/z and C(x) = x/tan(x). Both factors are smooth at 0 and
/// are switched to power series near the origin, so one expression covers the
/// whole range alpha in (0, 2] including alpha = 1.
Complex log_chf(double u, const StableParams& theta);

Complex chf(double u, const StableParams& theta);

/// Analytic gradient phi_{theta_i}(u) = psi_{theta_i}(u) phi(u).
///
/// With s = |sigma u|, L = log s, A = s^alpha and K(alpha, L) the skewness
/// kernel above, psi = -A (1 + i beta sgn(u) K) + i mu u and
///   psi_mu    = i u
///   psi_beta  = -i sgn(u) A K
///   psi_sigma = -(alpha A (1 + i beta sgn(u) K) + i beta sgn(u) A dK/dL) / sigma
///   psi_alpha = -A L (1 + i beta sgn(u) K) - i beta sgn(u) A dK/dalpha
/// where A dK/dL = (2/pi) C(pi d/2) s. At sigma = 1 these reduce to the
/// standardized textbook forms. u = 0 returns exact zeros for every partial.
ChfGradient chf_gradient(double u, const StableParams& theta);

namespace detail {

/// Skewness kernel K(alpha, L) = tan(pi alpha/2)(e^{(1-alpha)L} - 1) and its
/// partials, stable across alpha = 1.
struct SkewKernel {
  double value;     // K
  double d_log;     // dK/dL
  double d_alpha;   // dK/dalpha
  double c_factor;  // C(pi (1-alpha)/2) = x / tan(x)
};

SkewKernel skew_kernel(double alpha, double log_s);

double expm1_ratio(double z);             // expm1(z)/z
double expm1_ratio_derivative(double z);  // d/dz expm1(z)/z
double x_cot_x(double x);                 // x / tan(x)
double x_cot_x_derivative(double x);      // d/dx x / tan(x)

}  // namespace detail

}  // namespace stable_tmle
