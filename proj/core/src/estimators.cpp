#include "stable_tmle/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stable_tmle/errors.hpp"
#include "stable_tmle/numkit.hpp"

namespace stable_tmle {

namespace {

constexpr double kPrelimU1 = 0.2;
constexpr double kPrelimU2 = 1.0;

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ScoringOptions<4> scoring_options(const FitConfig& cfg) {
  ScoringOptions<4> opt;
  opt.max_iter = cfg.max_iter;
  opt.tol_step = cfg.tol_step;
  opt.tol_score = cfg.tol_score;
  opt.min_delta = cfg.min_delta;
  opt.lower = cfg.box.lower;
  opt.upper = cfg.box.upper;
  return opt;
}

FitResult to_fit_result(const ScoringOutcome<4>& out, std::size_t n) {
  FitResult r;
  r.theta_hat = StableParams::from_vector(out.theta);
  r.info = out.eval.info;
  r.iterations = out.iterations;
  r.final_score_norm = out.trace.back().score_norm;
  r.converged = out.converged;
  r.status = out.status;
  r.at_boundary = out.at_boundary;
  r.ridge_events = out.ridge_events;
  r.trace.reserve(out.trace.size());
  for (const auto& rec : out.trace) {
    r.trace.push_back({StableParams::from_vector(rec.theta), rec.score_norm, rec.delta});
  }
  try {
    const Eigen::Matrix4d inv = sym4_inverse(r.info);
    r.std_errors = (inv.diagonal() / static_cast<double>(n)).cwiseSqrt();
  } catch (const NotPositiveDefinite&) {
    r.std_errors.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return r;
}

StableParams starting_point(std::span<const double> data, const FitConfig& cfg,
                            const std::optional<StableParams>& init) {
  if (init) {
    init->validate();
    if (!cfg.box.contains(*init)) throw InvalidArgument("initial value lies outside the box");
    return *init;
  }
  return cfg.box.clamp(preliminary_estimate(data));
}

}  // namespace

bool ParamBox::contains(const StableParams& theta) const {
  const Eigen::Vector4d v = theta.to_vector();
  return (v.array() >= lower.array()).all() && (v.array() <= upper.array()).all();
}

StableParams ParamBox::clamp(const StableParams& theta) const {
  return StableParams::from_vector(theta.to_vector().cwiseMax(lower).cwiseMin(upper));
}

void FitConfig::validate() const {
  if (max_iter < 0) throw InvalidArgument("max_iter must be nonnegative");
  if (!(tol_step > 0.0) || !(tol_score > 0.0)) throw InvalidArgument("tolerances must be positive");
  if (!(min_delta > 0.0) || min_delta > 1.0) throw InvalidArgument("min_delta must lie in (0, 1]");
  if ((box.lower.array() > box.upper.array()).any()) throw InvalidArgument("empty parameter box");
  if (box.lower[StableParams::kSigma] <= 0.0 || box.lower[StableParams::kAlpha] <= 0.0 ||
      box.upper[StableParams::kAlpha] > 2.0 || box.lower[StableParams::kBeta] < -1.0 ||
      box.upper[StableParams::kBeta] > 1.0) {
    throw InvalidArgument("parameter box exceeds the parameter space");
  }
}

StableParams preliminary_from_chf(double u1, Complex phi1, double u2, Complex phi2) {
  if (!(u1 > 0.0) || !(u2 > u1)) throw InvalidArgument("need 0 < u1 < u2");
  const double m1 = std::abs(phi1);
  const double m2 = std::abs(phi2);
  for (double m : {m1, m2}) {
    if (!(m > 1e-12) || !(m < 1.0 - 1e-12)) {
      throw DegenerateSample("empirical characteristic function modulus " + std::to_string(m) +
                             " is too close to 0 or 1");
    }
  }
  const double l1 = std::log(m1);
  const double l2 = std::log(m2);
  double alpha = std::log(l1 / l2) / std::log(u1 / u2);
  if (!std::isfinite(alpha)) alpha = 1.95;
  alpha = std::clamp(alpha, 0.15, 1.95);
  const double sigma = std::pow(-l2, 1.0 / alpha) / u2;

  // arg phi(u) = mu u - beta A(u) K(u)
  auto skew_term = [&](double u) {
    const double log_s = std::log(sigma * u);
    return std::exp(alpha * log_s) * detail::skew_kernel(alpha, log_s).value;
  };
  const double c1 = skew_term(u1);
  const double c2 = skew_term(u2);
  const double p1 = std::arg(phi1);
  const double p2 = std::arg(phi2);
  const double det = -u1 * c2 + u2 * c1;
  double mu = 0.0;
  double beta = 0.0;
  if (std::abs(det) > 1e-12 * (u1 * std::abs(c2) + u2 * std::abs(c1))) {
    mu = (-p1 * c2 + p2 * c1) / det;
    beta = (u1 * p2 - u2 * p1) / det;
  } else {
    mu = p1 / u1;
  }
  beta = std::clamp(beta, -0.95, 0.95);
  return {mu, sigma, alpha, beta};
}

StableParams preliminary_estimate(std::span<const double> data) {
  if (data.size() < 20) throw InvalidArgument("preliminary_estimate needs at least 20 points");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double center = quantile_sorted(sorted, 0.5);
  const double spread = 0.5 * (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25));
  if (!(spread > 0.0) || !std::isfinite(spread)) {
    throw DegenerateSample("sample has zero interquartile range");
  }

  Complex e1{0.0, 0.0};
  Complex e2{0.0, 0.0};
  for (double x : data) {
    const double z = (x - center) / spread;
    e1 += Complex(std::cos(kPrelimU1 * z), std::sin(kPrelimU1 * z));
    e2 += Complex(std::cos(kPrelimU2 * z), std::sin(kPrelimU2 * z));
  }
  const double n = static_cast<double>(data.size());
  const StableParams std_theta = preliminary_from_chf(kPrelimU1, e1 / n, kPrelimU2, e2 / n);
  return {center + spread * std_theta.mu, spread * std_theta.sigma, std_theta.alpha,
          std_theta.beta};
}

FitResult tml_fit(std::span<const double> data, const FitConfig& cfg,
                  std::optional<StableParams> init) {
  if (data.empty()) throw InvalidArgument("tml_fit: empty sample");
  cfg.validate();
  const StableParams start = starting_point(data, cfg, init);
  const Eigen::VectorXd feature_mean = trig_feature_mean(data, cfg.grid);

  auto evaluate = [&](const Eigen::Vector4d& v) {
    const TrigMoments tm = trig_moments(cfg.grid, StableParams::from_vector(v));
    ScoringEvaluation<4> e;
    e.score = score_from_feature_mean(feature_mean, tm);
    e.info = info_matrix(tm);
    e.ridge = tm.ridge_used;
    return e;
  };
  return to_fit_result(run_scoring<4>(evaluate, start.to_vector(), scoring_options(cfg)),
                       data.size());
}

FitResult explicit_gmm_fit(std::span<const double> data, const FitConfig& cfg,
                           const StableParams& weight_theta, std::optional<StableParams> init) {
  if (data.empty()) throw InvalidArgument("explicit_gmm_fit: empty sample");
  cfg.validate();
  weight_theta.validate();
  const StableParams start = starting_point(data, cfg, init);
  const Eigen::VectorXd feature_mean = trig_feature_mean(data, cfg.grid);
  const RidgedFactor weight = factor_with_ridge(sigma_matrix(cfg.grid, weight_theta));

  auto evaluate = [&](const Eigen::Vector4d& v) {
    const StableParams theta = StableParams::from_vector(v);
    Eigen::MatrixXd w = gamma_jacobian(cfg.grid, theta).transpose();
    weight.factor.forward_solve_in_place(w);
    Eigen::VectorXd r = feature_mean - gamma_vector(cfg.grid, theta);
    weight.factor.forward_solve_in_place(r);
    ScoringEvaluation<4> e;
    e.score = w.transpose() * r;
    const Eigen::Matrix4d info = w.transpose() * w;
    e.info = 0.5 * (info + info.transpose());
    e.ridge = weight.ridge;
    return e;
  };
  return to_fit_result(run_scoring<4>(evaluate, start.to_vector(), scoring_options(cfg)),
                       data.size());
}

FitResult iterated_explicit_gmm(std::span<const double> data, const FitConfig& cfg, int rounds,
                                std::optional<StableParams> init) {
  if (rounds < 1) throw InvalidArgument("iterated_explicit_gmm: rounds must be positive");
  StableParams weight = starting_point(data, cfg, init);
  FitResult result;
  for (int r = 0; r < rounds; ++r) {
    result = explicit_gmm_fit(data, cfg, weight, weight);
    weight = result.theta_hat;
  }
  return result;
}

}  // namespace stable_tmle
