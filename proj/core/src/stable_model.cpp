#include "stable_tmle/stable_model.hpp"

#include <cmath>
#include <numbers>

#include "stable_tmle/errors.hpp"

namespace stable_tmle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

double sign_of(double u) { return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0); }

}  // namespace

void StableParams::validate() const {
  if (!valid()) {
    throw InvalidArgument("invalid stable parameters (mu=" + std::to_string(mu) +
                          ", sigma=" + std::to_string(sigma) +
                          ", alpha=" + std::to_string(alpha) +
                          ", beta=" + std::to_string(beta) + ")");
  }
}

bool StableParams::valid() const noexcept {
  return std::isfinite(mu) && std::isfinite(sigma) && sigma > 0.0 && alpha > 0.0 &&
         alpha <= 2.0 && beta >= -1.0 && beta <= 1.0;
}

Complex ChfGradient::partial(int index) const {
  switch (index) {
    case StableParams::kMu:
      return d_mu;
    case StableParams::kSigma:
      return d_sigma;
    case StableParams::kAlpha:
      return d_alpha;
    case StableParams::kBeta:
      return d_beta;
    default:
      throw InvalidArgument("parameter index out of range");
  }
}

namespace detail {

double expm1_ratio(double z) {
  if (z == 0.0) return 1.0;
  if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
  return std::expm1(z) / z;
}

double expm1_ratio_derivative(double z) {
  // sum_{n>=1} n z^{n-1} / (n+1)!
  if (std::abs(z) < 0.5) {
    double p = 0.5;
    double sum = 0.0;
    for (int n = 1; n <= 24; ++n) {
      sum += n * p;
      p *= z / (n + 2);
    }
    return sum;
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

double x_cot_x(double x) {
  if (std::abs(x) < 0.1) {
    const double x2 = x * x;
    return 1.0 -
           x2 * (1.0 / 3.0 +
                 x2 * (1.0 / 45.0 +
                       x2 * (2.0 / 945.0 + x2 * (1.0 / 4725.0 + x2 * (2.0 / 93555.0)))));
  }
  return x * std::cos(x) / std::sin(x);
}

double x_cot_x_derivative(double x) {
  if (std::abs(x) < 0.1) {
    const double x2 = x * x;
    return -x * (2.0 / 3.0 +
                 x2 * (4.0 / 45.0 +
                       x2 * (12.0 / 945.0 +
                             x2 * (8.0 / 4725.0 + x2 * (20.0 / 93555.0 +
                                                        x2 * (12.0 * 1382.0 / 638512875.0))))));
  }
  const double s = std::sin(x);
  return std::cos(x) / s - x / (s * s);
}

SkewKernel skew_kernel(double alpha, double log_s) {
  const double d = 1.0 - alpha;
  const double x = 0.5 * kPi * d;
  const double c = x_cot_x(x);
  const double c_prime = x_cot_x_derivative(x);
  const double z = d * log_s;
  const double e = expm1_ratio(z);
  const double e_prime = expm1_ratio_derivative(z);

  SkewKernel k{};
  k.c_factor = c;
  k.value = log_s * e * kTwoOverPi * c;
  k.d_log = kTwoOverPi * c * std::exp(z);
  const double d_d = log_s * log_s * e_prime * kTwoOverPi * c + log_s * e * c_prime;
  k.d_alpha = -d_d;
  return k;
}

}  // namespace detail

Complex log_chf(double u, const StableParams& theta) {
  if (u == 0.0) return {0.0, 0.0};
  const double s = std::abs(theta.sigma * u);
  const double log_s = std::log(s);
  const double a = std::exp(theta.alpha * log_s);
  const double k = detail::skew_kernel(theta.alpha, log_s).value;
  return {-a, -a * theta.beta * sign_of(u) * k + theta.mu * u};
}

Complex chf(double u, const StableParams& theta) { return std::exp(log_chf(u, theta)); }

ChfGradient chf_gradient(double u, const StableParams& theta) {
  ChfGradient g{};
  if (u == 0.0) {
    g.value = {1.0, 0.0};
    return g;
  }
  const double sgn = sign_of(u);
  const double s = std::abs(theta.sigma * u);
  const double log_s = std::log(s);
  const double a = std::exp(theta.alpha * log_s);
  const detail::SkewKernel k = detail::skew_kernel(theta.alpha, log_s);
  const double bs = theta.beta * sgn;

  const Complex psi{-a, -a * bs * k.value + theta.mu * u};
  g.value = std::exp(psi);

  const Complex psi_mu{0.0, u};
  const Complex psi_beta{0.0, -sgn * a * k.value};
  const Complex psi_sigma{-theta.alpha * a / theta.sigma,
                          -(theta.alpha * a * bs * k.value + bs * kTwoOverPi * k.c_factor * s) /
                              theta.sigma};
  const Complex psi_alpha{-a * log_s, -a * log_s * bs * k.value - bs * a * k.d_alpha};

  g.d_mu = psi_mu * g.value;
  g.d_sigma = psi_sigma * g.value;
  g.d_alpha = psi_alpha * g.value;
  g.d_beta = psi_beta * g.value;
  return g;
}

}  // namespace stable_tmle
