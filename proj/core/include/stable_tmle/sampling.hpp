#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "stable_tmle/stable_model.hpp"

namespace stable_tmle {

/// Deterministic random stream identified by (seed, stream_id).
///
/// The engine is a 64-bit Mersenne twister seeded through std::seed_seq with
/// the four 32-bit halves of seed and stream_id, so distinct ids give
/// unrelated sequences and identical ids give bit-identical output on every
/// platform. Monte Carlo drivers use `for_replication`, which maps
/// (seed, replication, series) to stream_id = replication * 256 + series.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static RngStream for_replication(std::uint64_t seed, std::uint64_t replication,
                                   std::uint64_t series = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard exponential.
  double exponential();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// One stable draw with characteristic function `chf(., theta)`.
double draw_stable(const StableParams& theta, RngStream& rng);

/// n i.i.d. draws. Chambers-Mallows-Stuck in the S1 parametrization, shifted
/// into the continuous parametrization by X = sigma Z + mu - beta sigma
/// tan(pi alpha / 2) (alpha != 1) or X = sigma Z + mu (alpha = 1).
std::vector<double> sample_stable(std::size_t n, const StableParams& theta, RngStream& rng);

/// Symmetric alpha-stable Ornstein-Uhlenbeck parameters; order (alpha, sigma, lambda).
struct OUParams {
  double alpha = 2.0;
  double sigma = 1.0;
  double lambda = 1.0;

  static constexpr int kDim = 3;
  enum Index : int { kAlpha = 0, kSigma = 1, kLambda = 2 };

  void validate() const;
  bool valid() const noexcept;

  Eigen::Vector3d to_vector() const { return {alpha, sigma, lambda}; }
  static OUParams from_vector(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

  friend bool operator==(const OUParams&, const OUParams&) = default;
};

/// Observations X_h, X_2h, ..., X_nh.
struct OUPath {
  double h = 1.0;
  std::vector<double> values;

  void validate() const;
};

/// Scale of int_s^t e^{-lambda (t - v)} dZ_v over a gap dt:
/// sigma ((1 - e^{-alpha lambda dt}) / (alpha lambda))^{1/alpha}.
double transition_scale(const OUParams& p, double dt);

/// Scale of the stationary marginal, sigma (alpha lambda)^{-1/alpha}.
double stationary_scale(const OUParams& p);

/// Exact simulation: X_0 from the stationary law, then
/// X_{(t+1)h} = e^{-lambda h} X_{th} + eps_t with eps_t symmetric stable of
/// scale transition_scale(p, h). X_0 itself is not part of the returned path.
///
/// Draws are consumed in time order from `rng`, so a path of n1 + n2 points
/// equals sample_ou_path(n1) followed by continue_ou_path(n2) from its last
/// value when both calls share the same stream object.
OUPath sample_ou_path(const OUParams& p, double h, std::size_t n, RngStream& rng);

/// Appends n further exact transitions starting from x_last.
OUPath continue_ou_path(const OUParams& p, double h, double x_last, std::size_t n,
                        RngStream& rng);

}  // namespace stable_tmle
