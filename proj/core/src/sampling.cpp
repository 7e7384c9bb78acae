#include "stable_tmle/sampling.hpp"

#include <cmath>
#include <numbers>

#include "stable_tmle/errors.hpp"

namespace stable_tmle {

namespace {

constexpr double kPi = std::numbers::pi;
// Within this distance of alpha = 1 the alpha = 1 branch is used; the general
// branch stays accurate to ~1e-9 absolute down to here.
constexpr double kAlphaOneBand = 1e-8;

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id & 0xffffffffu),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

RngStream RngStream::for_replication(std::uint64_t seed, std::uint64_t replication,
                                     std::uint64_t series) {
  return RngStream(seed, replication * 256u + series);
}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() { return -std::log(uniform()); }

double draw_stable(const StableParams& theta, RngStream& rng) {
  const double v = kPi * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double a = theta.alpha;
  const double b = theta.beta;

  if (std::abs(a - 1.0) < kAlphaOneBand) {
    const double half_pi_bv = 0.5 * kPi + b * v;
    const double z =
        (2.0 / kPi) * (half_pi_bv * std::tan(v) -
                       b * std::log((0.5 * kPi * w * std::cos(v)) / half_pi_bv));
    return theta.sigma * z + theta.mu;
  }

  const double t = std::tan(0.5 * kPi * a);
  const double shift = std::atan(b * t) / a;
  const double scale = std::pow(1.0 + b * b * t * t, 1.0 / (2.0 * a));
  const double z = scale * std::sin(a * (v + shift)) / std::pow(std::cos(v), 1.0 / a) *
                   std::pow(std::cos(v - a * (v + shift)) / w, (1.0 - a) / a);
  return theta.sigma * z + theta.mu - b * theta.sigma * t;
}

std::vector<double> sample_stable(std::size_t n, const StableParams& theta, RngStream& rng) {
  theta.validate();
  std::vector<double> out(n);
  for (double& x : out) x = draw_stable(theta, rng);
  return out;
}

bool OUParams::valid() const noexcept {
  return std::isfinite(sigma) && std::isfinite(lambda) && alpha > 0.0 && alpha <= 2.0 &&
         sigma > 0.0 && lambda > 0.0;
}

void OUParams::validate() const {
  if (!valid()) {
    throw InvalidArgument("invalid OU parameters (alpha=" + std::to_string(alpha) +
                          ", sigma=" + std::to_string(sigma) +
                          ", lambda=" + std::to_string(lambda) + ")");
  }
}

void OUPath::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("OU path step h must be positive");
  if (values.size() < 2) throw InvalidArgument("OU path needs at least two observations");
}

double transition_scale(const OUParams& p, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("transition_scale: dt must be positive");
  const double al = p.alpha * p.lambda;
  return p.sigma * std::pow(-std::expm1(-al * dt) / al, 1.0 / p.alpha);
}

double stationary_scale(const OUParams& p) {
  return p.sigma * std::pow(p.alpha * p.lambda, -1.0 / p.alpha);
}

OUPath continue_ou_path(const OUParams& p, double h, double x_last, std::size_t n,
                        RngStream& rng) {
  p.validate();
  if (!(h > 0.0)) throw InvalidArgument("OU step h must be positive");
  const double decay = std::exp(-p.lambda * h);
  const StableParams innovation{0.0, transition_scale(p, h), p.alpha, 0.0};
  OUPath path{h, std::vector<double>(n)};
  double x = x_last;
  for (double& out : path.values) {
    x = decay * x + draw_stable(innovation, rng);
    out = x;
  }
  return path;
}

OUPath sample_ou_path(const OUParams& p, double h, std::size_t n, RngStream& rng) {
  p.validate();
  if (n < 2) throw InvalidArgument("OU path needs n >= 2");
  const double x0 = draw_stable({0.0, stationary_scale(p), p.alpha, 0.0}, rng);
  return continue_ou_path(p, h, x0, n, rng);
}

}  // namespace stable_tmle
