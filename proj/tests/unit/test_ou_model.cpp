#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "stable_tmle/errors.hpp"
#include "stable_tmle/estimators.hpp"
#include "stable_tmle/ou_model.hpp"
#include "stable_tmle/sampling.hpp"
#include "test_helpers.hpp"

using namespace stable_tmle;
using test_util::close;

TEST_SUITE("ou_model") {

TEST_CASE("conditional ch.f. basics") {
  const OUParams p{1.5, 1.0, 1.0};
  CHECK(cond_chf(0.0, p, 0.7, 0.1) == Complex(1.0, 0.0));
  const Complex v = cond_chf(1.0, p, 0.7, 0.1);
  CHECK(v.real() == doctest::Approx(0.73454924242946670).epsilon(1e-13));
  CHECK(v.imag() == doctest::Approx(0.53938972348308080).epsilon(1e-13));
  CHECK_THROWS_AS(cond_chf(1.0, p, 0.0, 0.0), InvalidArgument);
  CHECK(std::abs(cond_chf(-1.3, p, 0.4, 0.2) - std::conj(cond_chf(1.3, p, 0.4, 0.2))) < 1e-15);
}

TEST_CASE("long gaps reach the stationary law") {
  const OUParams p{1.3, 1.2, 0.5};
  const double dt = 50.0 / p.lambda;
  for (double u : {0.3, 1.0, 2.0}) {
    const Complex v = cond_chf(u, p, 2.5, dt);
    const double stationary = std::exp(-std::pow(std::abs(p.sigma * u), p.alpha) / (p.alpha * p.lambda));
    CHECK(std::abs(std::abs(v) - stationary) < 1e-10);
    CHECK(std::abs(std::arg(v)) < 1e-10);
  }
}

TEST_CASE("conditional ch.f. against simulated transitions") {
  const OUParams p{1.5, 1.0, 1.0};
  const double x_prev = 0.7;
  const double dt = 0.1;
  RngStream rng(61, 0);
  const std::size_t n = 1000000;
  double c = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = continue_ou_path(p, dt, x_prev, 1, rng).values[0];
    c += std::cos(x);
    s += std::sin(x);
  }
  const Complex v = cond_chf(1.0, p, x_prev, dt);
  CHECK(std::abs(c / n - v.real()) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s / n - v.imag()) < 4.0 / std::sqrt(n));
}

TEST_CASE("log-derivative closed forms") {
  const OUParams gauss{2.0, 1.0, 1.0};
  const CondChfGradient g = cond_chf_gradient(1.0, gauss, 0.3, 0.1);
  CHECK((g.d_sigma / g.value).real() == doctest::Approx(-(1.0 - std::exp(-0.2))).epsilon(1e-13));
  CHECK((g.d_sigma / g.value).real() == doctest::Approx(-0.181269).epsilon(1e-6));
  CHECK(std::abs((g.d_sigma / g.value).imag()) < 1e-15);

  for (const OUParams p : {OUParams{1.5, 1.2, 0.8}, OUParams{0.7, 0.6, 2.0}}) {
    for (double x : {0.0, -1.4}) {
      const double u = 1.7;
      const double dt = 0.25;
      const CondChfGradient d = cond_chf_gradient(u, p, x, dt);
      const double a = std::pow(std::abs(p.sigma * u), p.alpha);
      const double e = std::exp(-p.alpha * p.lambda * dt);
      const Complex i(0.0, 1.0);
      const Complex psi_lambda = -i * u * dt * x * std::exp(-p.lambda * dt) +
                                 a / (p.lambda * p.alpha) * ((1.0 - e) / p.lambda - p.alpha * dt * e);
      const double psi_sigma = -std::pow(p.sigma, p.alpha - 1) * std::pow(std::abs(u), p.alpha) / p.lambda * (1.0 - e);
      const double psi_alpha = a / (p.lambda * p.alpha) *
                               ((-std::log(std::abs(p.sigma * u)) + 1.0 / p.alpha) * (1.0 - e) - p.lambda * dt * e);
      CHECK(close(d.d_lambda / d.value, psi_lambda, 1e-12, 1e-14));
      CHECK(close(d.d_sigma / d.value, Complex(psi_sigma, 0.0), 1e-12, 1e-14));
      CHECK(close(d.d_alpha / d.value, Complex(psi_alpha, 0.0), 1e-12, 1e-14));
      if (x == 0.0) CHECK((d.d_lambda / d.value).imag() == 0.0);
    }
  }
  CHECK_THROWS_AS(CondChfGradient{}.partial(3), InvalidArgument);
}

TEST_CASE("conditional gradient matches central differences") {
  const double h = 1e-6;
  for (double a : {0.5, 1.0, 1.5, 1.9}) {
    for (double s : {0.5, 2.0}) {
      for (double l : {0.3, 3.0}) {
        for (double u : {0.1, 1.0, 5.0}) {
          const OUParams p{a, s, l};
          const CondChfGradient g = cond_chf_gradient(u, p, 0.8, 0.1);
          for (int i = 0; i < 3; ++i) {
            Eigen::Vector3d up = p.to_vector();
            Eigen::Vector3d dn = p.to_vector();
            up[i] += h;
            dn[i] -= h;
            const Complex fd = (cond_chf(u, OUParams::from_vector(up), 0.8, 0.1) -
                                cond_chf(u, OUParams::from_vector(dn), 0.8, 0.1)) / (2 * h);
            CHECK(close(g.partial(i), fd, 1e-5, 1e-8));
          }
        }
      }
    }
  }
}

TEST_CASE("conditional moments are positive definite") {
  const OUCondMoments m = ou_cond_moments(default_ou_grid(), {1.5, 1.0, 1.0}, -2.0, 0.1);
  CHECK(m.ridge_used == 0.0);
  CHECK(m.gamma.size() == 202);
  CHECK(m.gamma_theta.rows() == 3);
  CHECK((m.factor.reconstruct() - m.sigma).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fast conditional score agrees with the per-transition route") {
  RngStream rng(71, 0);
  const OUParams truth{1.5, 1.0, 1.0};
  const OUPath path = sample_ou_path(truth, 0.1, 60, rng);
  const Grid grid = equidistant_grid(0.05, 0.1, 40);
  for (const OUParams p : {truth, OUParams{1.2, 1.4, 0.6}}) {
    const ConditionalScore fast = conditional_score(path, p, grid);
    const ConditionalScore ref = conditional_score_reference(path, p, grid);
    CHECK((fast.score - ref.score).cwiseAbs().maxCoeff() < 1e-8 * (1.0 + ref.score.cwiseAbs().maxCoeff()));
    CHECK((fast.info - ref.info).cwiseAbs().maxCoeff() < 1e-8 * ref.info.cwiseAbs().maxCoeff());
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (std::size_t t = 0; t + 1 < path.values.size(); ++t) {
      sum += conditional_transition_score(path.values[t], path.values[t + 1], p, path.h, grid);
    }
    sum /= static_cast<double>(path.values.size() - 1);
    CHECK((sum - ref.score).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("preliminary OU estimate") {
  RngStream rng(73, 0);
  const OUPath path = sample_ou_path({1.5, 1.0, 1.0}, 0.1, 5000, rng);
  const OUParams p = ou_preliminary_estimate(path);
  CHECK(std::abs(p.alpha - 1.5) < 0.15);
  CHECK(std::abs(p.sigma - 1.0) < 0.15);
  CHECK(std::abs(p.lambda - 1.0) < 0.3);
  const OUPath short_path{0.1, std::vector<double>(10, 0.5)};
  CHECK_THROWS_AS(ou_preliminary_estimate(short_path), InvalidArgument);
  const OUPath zero{0.1, std::vector<double>(50, 0.0)};
  CHECK_THROWS_AS(ou_preliminary_estimate(zero), DegenerateSample);
}

TEST_CASE("tcml fit on one path") {
  RngStream rng(79, 0);
  const OUParams truth{1.5, 1.0, 1.0};
  const OUPath path = sample_ou_path(truth, 0.1, 1000, rng);
  const OUFitConfig cfg;
  const OUFitResult r = tcml_fit(path, cfg);
  REQUIRE(r.converged);
  CHECK(r.final_score_norm <= cfg.tol_score);
  const ConditionalScore cs = conditional_score(path, r.theta_hat, cfg.grid);
  CHECK(cs.score.cwiseAbs().maxCoeff() <= cfg.tol_score);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(r.theta_hat.to_vector()[i] - truth.to_vector()[i]) < 4.0 * r.std_errors[i]);
  }
  CHECK_THROWS_AS(tcml_fit(path, cfg, OUParams{0.1, 1.0, 1.0}), InvalidArgument);
  OUFitConfig bad = cfg;
  bad.box.lower[OUParams::kLambda] = 0.0;
  CHECK_THROWS_AS(tcml_fit(path, bad), InvalidArgument);
}

TEST_CASE("widely spaced observations reproduce the marginal fit") {
  RngStream rng(83, 0);
  const OUParams truth{1.5, 1.0, 1.0};
  const OUPath path = sample_ou_path(truth, 20.0, 1000, rng);
  const OUFitResult r = tcml_fit(path, OUFitConfig{});
  const FitResult m = tml_fit(path.values, FitConfig{});
  REQUIRE(m.converged);
  CHECK(std::abs(r.theta_hat.alpha - m.theta_hat.alpha) < 3.0 * m.std_errors[StableParams::kAlpha]);
  // sigma and lambda are confounded at this spacing; the stationary scale is not.
  const double implied = transition_scale(r.theta_hat, path.h);
  CHECK(std::abs(implied - m.theta_hat.sigma) < 3.0 * m.std_errors[StableParams::kSigma]);
}

TEST_CASE("lambda star") {
  const std::vector<double> same{1.1, 1.1, 1.1};
  const std::vector<double> w{2.0, 3.0, 4.0};
  for (std::size_t i = 0; i < 3; ++i) CHECK(lambda_star(same, w, i) == 0.0);
  const std::vector<double> lh{1.0, 1.2};
  const std::vector<double> ww{4.0, 9.0};
  CHECK(lambda_star(lh, ww, 0) == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(lambda_star(lh, ww, 1) == doctest::Approx(0.3).epsilon(1e-14));
  const std::vector<double> all = lambda_star_all(lh, ww);
  CHECK(all.size() == 2);
  CHECK(all[1] == doctest::Approx(0.3));
  CHECK_THROWS_AS(lambda_star(std::vector<double>{1.0}, std::vector<double>{1.0}, 0), InvalidArgument);
  CHECK_THROWS_AS(lambda_star(lh, std::vector<double>{1.0}, 0), DimensionMismatch);
  CHECK_THROWS_AS(lambda_star(lh, ww, 2), InvalidArgument);

  const OUPath p{0.5, {1.0, -2.0, 3.0}};
  CHECK(integrated_square(p) == doctest::Approx(0.5 * 14.0));
}

}  // TEST_SUITE
