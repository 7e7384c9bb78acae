#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stable_tmle/errors.hpp"
#include "stable_tmle/stable_model.hpp"
#include "test_helpers.hpp"

using namespace stable_tmle;
using test_util::close;

TEST_SUITE("stable_model") {

TEST_CASE("log_chf vanishes at the origin") {
  for (const StableParams th : {StableParams{0.3, 2.0, 0.7, -0.4}, StableParams{0, 1, 1, 0.9},
                                StableParams{-1, 0.5, 1.9, 0.2}}) {
    const Complex z = log_chf(0.0, th);
    CHECK(z.real() == 0.0);
    CHECK(z.imag() == 0.0);
    CHECK(chf(0.0, th) == Complex(1.0, 0.0));
  }
}

TEST_CASE("Gaussian endpoint drops the skewness term") {
  const Complex z = log_chf(1.0, {0, 1, 2, 0.7});
  CHECK(z.real() == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(z.imag()) < 1e-15);
  const Complex phi = chf(1.0, {0, 1, 2, 0});
  CHECK(phi.real() == doctest::Approx(0.36787944117144233).epsilon(1e-14));
  CHECK(phi.imag() == 0.0);
}

TEST_CASE("alpha = 1 at unit scale has no imaginary part") {
  const Complex z = log_chf(1.0, {0, 1, 1, 0.5});
  CHECK(z.real() == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(z.imag()) < 1e-15);
}

TEST_CASE("direct evaluation at alpha = 0.5 and the nearby branches") {
  const StableParams th{0, 1, 0.5, 0.5};
  const Complex phi = chf(2.0, th);
  CHECK(phi.real() == doctest::Approx(0.23276301113532866).epsilon(1e-13));
  CHECK(phi.imag() == doctest::Approx(-0.070193498339740166).epsilon(1e-13));
  for (double d : {-1e-8, 1e-8}) {
    const Complex near = chf(2.0, {0, 1, 0.5 + d, 0.5});
    CHECK(std::abs(near - phi) < 1e-7);
  }
}

TEST_CASE("symmetric law with zero location has a real ch.f.") {
  const Complex phi = chf(0.7, {0, 1, 1.5, 0});
  CHECK(phi.imag() == 0.0);
  CHECK(phi.real() > 0.0);
}

TEST_CASE("conjugate symmetry") {
  for (double u : {0.1, 0.9, 3.0}) {
    for (const StableParams th : {StableParams{0.4, 1.3, 0.8, 0.6}, StableParams{-2, 0.7, 1.0, -0.8},
                                  StableParams{0, 1, 1.7, 0.3}}) {
      CHECK(std::abs(chf(-u, th) - std::conj(chf(u, th))) < 1e-15);
    }
  }
}

TEST_CASE("continuity across the alpha = 1 seam") {
  for (double u : {0.05, 0.5, 1.0, 3.0}) {
    for (double beta : {-1.0, -0.3, 0.5, 1.0}) {
      const StableParams at{0.2, 1.4, 1.0, beta};
      const Complex z0 = log_chf(u, at);
      const double s = 1.4 * u;
      const Complex expect =
          -s * (1.0 + Complex(0.0, beta * 2.0 / std::numbers::pi * std::log(s))) +
          Complex(0.0, 0.2 * u);
      CHECK(close(z0, expect, 1e-14, 1e-14));
      const ChfGradient g0 = chf_gradient(u, at);
      for (double d : {-1e-7, 1e-7}) {
        const StableParams near{0.2, 1.4, 1.0 + d, beta};
        const Complex z = log_chf(u, near);
        CHECK(std::abs(z.real() - z0.real()) < 1e-6);
        CHECK(std::abs(z.imag() - z0.imag()) < 1e-6);
        const ChfGradient g = chf_gradient(u, near);
        for (int i = 0; i < 4; ++i) {
          CHECK(std::abs(g.partial(i).real() - g0.partial(i).real()) < 1e-6);
          CHECK(std::abs(g.partial(i).imag() - g0.partial(i).imag()) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("scale and location act as documented") {
  const StableParams base{0, 1, 1.3, 0.4};
  for (double u : {0.2, 1.0, 2.5}) {
    const double c = 1.7;
    const double m = -0.6;
    const Complex lhs = log_chf(u, {m, c, 1.3, 0.4});
    const Complex rhs = log_chf(c * u, base) + Complex(0.0, m * u);
    CHECK(close(lhs, rhs, 1e-13, 1e-14));
  }
}

TEST_CASE("gradient conjugate symmetry") {
  const StableParams th{0.4, 1.3, 0.8, 0.6};
  for (double u : {0.2, 1.7}) {
    const ChfGradient p = chf_gradient(u, th);
    const ChfGradient m = chf_gradient(-u, th);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(m.partial(i) - std::conj(p.partial(i))) < 1e-15);
  }
}

TEST_CASE("chf modulus is bounded by one") {
  for (double a : {0.3, 1.0, 1.6, 2.0}) {
    for (double u : {0.0, 0.1, 1.0, 10.0}) CHECK(std::abs(chf(u, {1, 2, a, -0.7})) <= 1.0);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((StableParams{0, 0.0, 1.5, 0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((StableParams{0, 1, 2.1, 0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((StableParams{0, 1, 0.0, 0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((StableParams{0, 1, 1.5, 1.2}.validate()), InvalidArgument);
  CHECK_THROWS_AS((StableParams{std::nan(""), 1, 1.5, 0}.validate()), InvalidArgument);
  CHECK_FALSE(StableParams{0, -1, 1, 0}.valid());
  CHECK(StableParams{0, 1, 1, 0}.valid());
  CHECK_THROWS_AS(ChfGradient{}.partial(4), InvalidArgument);
}

TEST_CASE("gradient location partial equals iu phi") {
  const ChfGradient g = chf_gradient(1.0, {0, 1, 2, 0});
  CHECK(std::abs(g.d_mu.real()) < 1e-16);
  CHECK(g.d_mu.imag() == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  for (double u : {0.3, 2.0}) {
    const StableParams th{0.5, 0.8, 0.9, -0.4};
    const ChfGradient h = chf_gradient(u, th);
    CHECK(close(h.d_mu, Complex(0.0, u) * h.value, 1e-14, 1e-16));
  }
}

TEST_CASE("gradient parity for a centred symmetric law") {
  for (double u : {0.2, 1.0, 4.0}) {
    const ChfGradient g = chf_gradient(u, {0, 1.3, 1.2, 0});
    CHECK(g.d_alpha.imag() == 0.0);
    CHECK(g.d_sigma.imag() == 0.0);
    CHECK(std::abs(g.d_mu.real()) == 0.0);
    CHECK(std::abs(g.d_beta.real()) == 0.0);
  }
}

TEST_CASE("gradient at the origin is zero") {
  const ChfGradient g = chf_gradient(0.0, {1, 2, 0.8, 0.5});
  CHECK(g.value == Complex(1.0, 0.0));
  for (int i = 0; i < 4; ++i) CHECK(g.partial(i) == Complex(0.0, 0.0));
}

TEST_CASE("log-derivatives at unit scale match the closed forms") {
  for (double a : {0.6, 1.3, 1.8}) {
    for (double b : {-0.5, 0.7}) {
      for (double u : {-2.0, 0.4, 1.5}) {
        const StableParams th{0.3, 1.0, a, b};
        const ChfGradient g = chf_gradient(u, th);
        const double au = std::abs(u);
        const double t = std::tan(std::numbers::pi * a / 2.0);
        const double l = std::log(au);
        const Complex i(0.0, 1.0);
        const Complex psi_sigma = -a * std::pow(au, a) + i * u * (a * std::pow(au, a - 1) - 1.0) * b * t;
        const double c = std::cos(std::numbers::pi * a / 2.0);
        const Complex psi_alpha = -std::pow(au, a) * l + i * u * std::pow(au, a - 1) * l * b * t +
                                  i * u * (std::pow(au, a - 1) - 1.0) * (std::numbers::pi * b / 2.0) / (c * c);
        const Complex psi_beta = i * u * (std::pow(au, a - 1) - 1.0) * t;
        CHECK(close(g.d_sigma / g.value, psi_sigma, 1e-12, 1e-13));
        CHECK(close(g.d_alpha / g.value, psi_alpha, 1e-12, 1e-13));
        CHECK(close(g.d_beta / g.value, psi_beta, 1e-12, 1e-13));
        CHECK(close(g.d_mu / g.value, i * u, 1e-14, 1e-15));
      }
    }
  }
}

TEST_CASE("gradient matches central differences at a single point") {
  const StableParams th{0.2, 1.1, 1.4, -0.3};
  const double u = 1.3;
  const ChfGradient g = chf_gradient(u, th);
  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    Eigen::Vector4d up = th.to_vector();
    Eigen::Vector4d dn = th.to_vector();
    up[i] += h;
    dn[i] -= h;
    const Complex fd = (chf(u, StableParams::from_vector(up)) - chf(u, StableParams::from_vector(dn))) / (2 * h);
    CHECK(close(g.partial(i), fd, 1e-5, 1e-8));
  }
}

TEST_CASE("skew kernel helpers") {
  using namespace detail;
  CHECK(expm1_ratio(0.0) == 1.0);
  CHECK(expm1_ratio(1e-3) == doctest::Approx(std::expm1(1e-3) / 1e-3).epsilon(1e-15));
  CHECK(expm1_ratio(2.0) == doctest::Approx(std::expm1(2.0) / 2.0).epsilon(1e-15));
  CHECK(expm1_ratio(-0.49) == doctest::Approx(std::expm1(-0.49) / -0.49).epsilon(1e-14));
  CHECK(expm1_ratio_derivative(0.0) == doctest::Approx(0.5));
  CHECK(x_cot_x(0.0) == 1.0);
  CHECK(x_cot_x(0.05) == doctest::Approx(0.05 / std::tan(0.05)).epsilon(1e-15));
  CHECK(x_cot_x(0.7) == doctest::Approx(0.7 / std::tan(0.7)).epsilon(1e-15));
  CHECK(x_cot_x_derivative(0.0) == 0.0);
  for (double z : {-0.3, 0.01, 0.6}) {
    const double h = 1e-6;
    CHECK(expm1_ratio_derivative(z) ==
          doctest::Approx((expm1_ratio(z + h) - expm1_ratio(z - h)) / (2 * h)).epsilon(1e-8));
    CHECK(x_cot_x_derivative(z) ==
          doctest::Approx((x_cot_x(z + h) - x_cot_x(z - h)) / (2 * h)).epsilon(1e-7));
  }
  const SkewKernel k = skew_kernel(1.0, std::log(3.0));
  CHECK(k.value == doctest::Approx(2.0 / std::numbers::pi * std::log(3.0)).epsilon(1e-15));
  const SkewKernel k2 = skew_kernel(1.5, std::log(2.0));
  CHECK(k2.value == doctest::Approx(std::tan(0.75 * std::numbers::pi) * (std::pow(2.0, -0.5) - 1.0)).epsilon(1e-14));
}

}  // TEST_SUITE
