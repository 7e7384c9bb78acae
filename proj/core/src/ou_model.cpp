#include "stable_tmle/ou_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "stable_tmle/errors.hpp"
#include "stable_tmle/estimators.hpp"
#include "stable_tmle/numkit.hpp"

namespace stable_tmle {

namespace {

// Pieces of psi_{t|s} that do not involve x_prev.
struct CondParts {
  double modulus_log = 0.0;  // -A q / (lambda alpha)
  double d_alpha = 0.0;      // real
  double d_sigma = 0.0;      // real
  double d_lambda = 0.0;     // real part
};

CondParts cond_parts(double u, const OUParams& p, double dt) {
  CondParts c;
  if (u == 0.0) return c;
  const double s = std::abs(p.sigma * u);
  const double log_s = std::log(s);
  const double a = std::exp(p.alpha * log_s);
  const double al = p.alpha * p.lambda;
  const double q = -std::expm1(-al * dt);
  const double decay_a = std::exp(-al * dt);
  const double ratio = a / al;
  c.modulus_log = -ratio * q;
  c.d_lambda = ratio * (q / p.lambda - p.alpha * dt * decay_a);
  c.d_sigma = -a * q / (p.sigma * p.lambda);
  c.d_alpha = ratio * ((1.0 / p.alpha - log_s) * q - p.lambda * dt * decay_a);
  return c;
}

ScoringOptions<3> scoring_options(const OUFitConfig& cfg) {
  ScoringOptions<3> opt;
  opt.max_iter = cfg.max_iter;
  opt.tol_step = cfg.tol_step;
  opt.tol_score = cfg.tol_score;
  opt.min_delta = cfg.min_delta;
  opt.lower = cfg.box.lower;
  opt.upper = cfg.box.upper;
  return opt;
}

}  // namespace

Complex cond_chf(double u, const OUParams& p, double x_prev, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("cond_chf: dt must be positive");
  const CondParts c = cond_parts(u, p, dt);
  return std::exp(Complex(c.modulus_log, u * std::exp(-p.lambda * dt) * x_prev));
}

Complex CondChfGradient::partial(int index) const {
  switch (index) {
    case OUParams::kAlpha:
      return d_alpha;
    case OUParams::kSigma:
      return d_sigma;
    case OUParams::kLambda:
      return d_lambda;
    default:
      throw InvalidArgument("parameter index out of range");
  }
}

CondChfGradient cond_chf_gradient(double u, const OUParams& p, double x_prev, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("cond_chf_gradient: dt must be positive");
  const CondParts c = cond_parts(u, p, dt);
  const double decay = std::exp(-p.lambda * dt);
  CondChfGradient g;
  g.value = std::exp(Complex(c.modulus_log, u * decay * x_prev));
  g.d_alpha = c.d_alpha * g.value;
  g.d_sigma = c.d_sigma * g.value;
  g.d_lambda = Complex(c.d_lambda, -u * dt * x_prev * decay) * g.value;
  return g;
}

OUCondMoments ou_cond_moments(const Grid& grid, const OUParams& p, double x_prev, double dt) {
  const auto u = grid.points();
  const Eigen::Index k = static_cast<Eigen::Index>(u.size());
  OUCondMoments m;
  m.gamma.resize(2 * k);
  m.gamma_theta.resize(3, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const CondChfGradient d = cond_chf_gradient(u[i], p, x_prev, dt);
    m.gamma[i] = d.value.real();
    m.gamma[k + i] = d.value.imag();
    for (int r = 0; r < 3; ++r) {
      m.gamma_theta(r, i) = d.partial(r).real();
      m.gamma_theta(r, k + i) = d.partial(r).imag();
    }
  }
  m.sigma = trig_covariance(u, [&](double v) { return cond_chf(v, p, x_prev, dt); });
  RidgedFactor rf = factor_with_ridge(m.sigma);
  m.factor = std::move(rf.factor);
  m.ridge_used = rf.ridge;
  return m;
}

bool OUParamBox::contains(const OUParams& p) const {
  const Eigen::Vector3d v = p.to_vector();
  return (v.array() >= lower.array()).all() && (v.array() <= upper.array()).all();
}

OUParams OUParamBox::clamp(const OUParams& p) const {
  return OUParams::from_vector(p.to_vector().cwiseMax(lower).cwiseMin(upper));
}

void OUFitConfig::validate() const {
  if (max_iter < 0) throw InvalidArgument("max_iter must be nonnegative");
  if (!(tol_step > 0.0) || !(tol_score > 0.0)) throw InvalidArgument("tolerances must be positive");
  if (!(min_delta > 0.0) || min_delta > 1.0) throw InvalidArgument("min_delta must lie in (0, 1]");
  if ((box.lower.array() > box.upper.array()).any() || (box.lower.array() <= 0.0).any() ||
      box.upper[OUParams::kAlpha] > 2.0) {
    throw InvalidArgument("invalid OU parameter box");
  }
}

ConditionalScore conditional_score(const OUPath& path, const OUParams& p, const Grid& grid) {
  path.validate();
  const double h = path.h;
  const auto u = grid.points();
  const Eigen::Index k = static_cast<Eigen::Index>(u.size());
  const double decay = std::exp(-p.lambda * h);
  const double c = transition_scale(p, h);

  Eigen::VectorXd gamma_y = Eigen::VectorXd::Zero(2 * k);
  Eigen::MatrixXd j0 = Eigen::MatrixXd::Zero(2 * k, 3);
  Eigen::MatrixXd jx = Eigen::MatrixXd::Zero(2 * k, 3);
  for (Eigen::Index i = 0; i < k; ++i) {
    const CondParts parts = cond_parts(u[i], p, h);
    const double mod = std::exp(parts.modulus_log);
    gamma_y[i] = mod;
    j0(i, OUParams::kAlpha) = parts.d_alpha * mod;
    j0(i, OUParams::kSigma) = parts.d_sigma * mod;
    j0(i, OUParams::kLambda) = parts.d_lambda * mod;
    jx(k + i, OUParams::kLambda) = -u[i] * h * decay * mod;
  }

  const StableParams y_law{0.0, c, p.alpha, 0.0};
  const RidgedFactor rf =
      factor_with_ridge(trig_covariance(u, [&](double v) { return chf(v, y_law); }));

  Eigen::VectorXd r0 = Eigen::VectorXd::Zero(2 * k);
  Eigen::VectorXd r1 = Eigen::VectorXd::Zero(2 * k);
  double sum_x = 0.0;
  double sum_x2 = 0.0;
  const std::size_t m = path.values.size() - 1;
  for (std::size_t t = 0; t < m; ++t) {
    const double x = path.values[t];
    const double y = path.values[t + 1] - decay * x;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double a = u[i] * y;
      const double rc = std::cos(a) - gamma_y[i];
      const double rs = std::sin(a);
      r0[i] += rc;
      r0[k + i] += rs;
      r1[i] += x * rc;
      r1[k + i] += x * rs;
    }
    sum_x += x;
    sum_x2 += x * x;
  }

  rf.factor.forward_solve_in_place(j0);
  rf.factor.forward_solve_in_place(jx);
  rf.factor.forward_solve_in_place(r0);
  rf.factor.forward_solve_in_place(r1);

  const double md = static_cast<double>(m);
  ConditionalScore out;
  out.score = (j0.transpose() * r0 + jx.transpose() * r1) / md;
  const Eigen::Matrix3d a = j0.transpose() * j0;
  const Eigen::Matrix3d b = j0.transpose() * jx;
  const Eigen::Matrix3d cc = jx.transpose() * jx;
  const Eigen::Matrix3d info = (md * a + sum_x * (b + b.transpose()) + sum_x2 * cc) / md;
  out.info = 0.5 * (info + info.transpose());
  out.ridge = rf.ridge;
  return out;
}

Eigen::Vector3d conditional_transition_score(double x_prev, double x_next, const OUParams& p,
                                             double dt, const Grid& grid) {
  const OUCondMoments m = ou_cond_moments(grid, p, x_prev, dt);
  Eigen::MatrixXd w = m.gamma_theta.transpose();
  m.factor.forward_solve_in_place(w);
  Eigen::VectorXd r = trig_features(x_next, grid) - m.gamma;
  m.factor.forward_solve_in_place(r);
  return w.transpose() * r;
}

ConditionalScore conditional_score_reference(const OUPath& path, const OUParams& p,
                                             const Grid& grid) {
  path.validate();
  ConditionalScore out;
  const std::size_t m = path.values.size() - 1;
  for (std::size_t t = 0; t < m; ++t) {
    const OUCondMoments cm = ou_cond_moments(grid, p, path.values[t], path.h);
    Eigen::MatrixXd w = cm.gamma_theta.transpose();
    cm.factor.forward_solve_in_place(w);
    Eigen::VectorXd r = trig_features(path.values[t + 1], grid) - cm.gamma;
    cm.factor.forward_solve_in_place(r);
    out.score += w.transpose() * r;
    out.info += w.transpose() * w;
    out.ridge = std::max(out.ridge, cm.ridge_used);
  }
  out.score /= static_cast<double>(m);
  out.info /= static_cast<double>(m);
  out.info = 0.5 * (out.info + out.info.transpose()).eval();
  return out;
}

OUParams ou_preliminary_estimate(const OUPath& path, const OUParamBox& box) {
  path.validate();
  const auto& x = path.values;
  const std::size_t m = x.size() - 1;
  if (m < 20) throw InvalidArgument("ou_preliminary_estimate needs at least 21 observations");

  // Least-absolute-deviation slope of x[t+1] on x[t] through the origin: the
  // weighted median of x[t+1] / x[t] with weights |x[t]|.
  std::vector<std::pair<double, double>> ratios;
  ratios.reserve(m);
  double total = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    if (x[t] == 0.0) continue;
    ratios.emplace_back(x[t + 1] / x[t], std::abs(x[t]));
    total += std::abs(x[t]);
  }
  if (ratios.empty()) throw DegenerateSample("ou_preliminary_estimate: path is identically zero");
  std::sort(ratios.begin(), ratios.end());
  double rho = ratios.back().first;
  double acc = 0.0;
  for (const auto& [r, w] : ratios) {
    acc += w;
    if (acc >= 0.5 * total) {
      rho = r;
      break;
    }
  }

  const double lambda_lo = box.lower[OUParams::kLambda];
  const double lambda_hi = box.upper[OUParams::kLambda];
  rho = std::clamp(rho, std::exp(-lambda_hi * path.h), std::exp(-lambda_lo * path.h));
  const double lambda = std::clamp(-std::log(rho) / path.h, lambda_lo, lambda_hi);

  std::vector<double> increments(m);
  for (std::size_t t = 0; t < m; ++t) increments[t] = x[t + 1] - rho * x[t];
  const StableParams inc = preliminary_estimate(increments);

  const double alpha =
      std::clamp(inc.alpha, box.lower[OUParams::kAlpha], box.upper[OUParams::kAlpha]);
  const OUParams unit{alpha, 1.0, lambda};
  const double sigma = inc.sigma / transition_scale(unit, path.h);
  return box.clamp({alpha, sigma, lambda});
}

OUFitResult tcml_fit(const OUPath& path, const OUFitConfig& cfg, std::optional<OUParams> init) {
  path.validate();
  cfg.validate();
  OUParams start;
  if (init) {
    init->validate();
    if (!cfg.box.contains(*init)) throw InvalidArgument("initial value lies outside the box");
    start = *init;
  } else {
    start = ou_preliminary_estimate(path, cfg.box);
  }

  auto evaluate = [&](const Eigen::Vector3d& v) {
    const ConditionalScore cs = conditional_score(path, OUParams::from_vector(v), cfg.grid);
    ScoringEvaluation<3> e;
    e.score = cs.score;
    e.info = cs.info;
    e.ridge = cs.ridge;
    return e;
  };
  const ScoringOutcome<3> out = run_scoring<3>(evaluate, start.to_vector(), scoring_options(cfg));

  OUFitResult r;
  r.theta_hat = OUParams::from_vector(out.theta);
  r.info = out.eval.info;
  r.iterations = out.iterations;
  r.final_score_norm = out.trace.back().score_norm;
  r.converged = out.converged;
  r.status = out.status;
  r.at_boundary = out.at_boundary;
  r.ridge_events = out.ridge_events;
  for (const auto& rec : out.trace) {
    r.trace.push_back({OUParams::from_vector(rec.theta), rec.score_norm, rec.delta});
  }
  try {
    const Eigen::Matrix3d inv = small_spd_inverse<3>(r.info);
    r.std_errors =
        (inv.diagonal() / static_cast<double>(path.values.size() - 1)).cwiseSqrt();
  } catch (const NotPositiveDefinite&) {
    r.std_errors.setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return r;
}

double integrated_square(const OUPath& path) {
  double s = 0.0;
  for (double v : path.values) s += v * v;
  return path.h * s;
}

double lambda_star(std::span<const double> lambda_hats, std::span<const double> paths_w,
                   std::size_t index) {
  if (lambda_hats.size() < 2) throw InvalidArgument("lambda_star needs at least 2 replications");
  if (paths_w.size() != lambda_hats.size()) {
    throw DimensionMismatch("lambda_star: lambda and W lengths differ");
  }
  if (index >= lambda_hats.size()) throw InvalidArgument("lambda_star: index out of range");
  const double mean = std::accumulate(lambda_hats.begin(), lambda_hats.end(), 0.0) /
                      static_cast<double>(lambda_hats.size());
  return std::sqrt(paths_w[index]) * (lambda_hats[index] - mean);
}

std::vector<double> lambda_star_all(std::span<const double> lambda_hats,
                                    std::span<const double> paths_w) {
  std::vector<double> out(lambda_hats.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda_star(lambda_hats, paths_w, i);
  return out;
}

}  // namespace stable_tmle
