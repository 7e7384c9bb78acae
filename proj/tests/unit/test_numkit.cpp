#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "stable_tmle/errors.hpp"
#include "stable_tmle/numkit.hpp"

using namespace stable_tmle;

namespace {

Eigen::MatrixXd random_spd(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = nd(gen);
  }
  return a * a.transpose() + Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_SUITE("numkit") {

TEST_CASE("identity factors to identity") {
  const SpdFactor f = spd_factor(Eigen::MatrixXd::Identity(5, 5));
  CHECK(f.lower().isApprox(Eigen::MatrixXd::Identity(5, 5)));
  CHECK(f.dim() == 5);
}

TEST_CASE("two by two by hand") {
  Eigen::MatrixXd m(2, 2);
  m << 4, 2, 2, 3;
  const SpdFactor f = spd_factor(m);
  CHECK(f.lower()(0, 0) == doctest::Approx(2.0));
  CHECK(f.lower()(0, 1) == 0.0);
  CHECK(f.lower()(1, 0) == doctest::Approx(1.0));
  CHECK(f.lower()(1, 1) == doctest::Approx(std::sqrt(2.0)));
  Eigen::VectorXd b(2);
  b << 2, 1;
  const Eigen::VectorXd x = spd_solve(f, b);
  CHECK((m * x - b).norm() < 1e-14);
}

TEST_CASE("large random SPD round trip") {
  const Eigen::MatrixXd m = random_spd(202, 7);
  const SpdFactor f = spd_factor(m);
  CHECK((f.reconstruct() - m).cwiseAbs().maxCoeff() < 1e-10 * m.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd b = Eigen::MatrixXd::Random(202, 3);
  const Eigen::MatrixXd x = spd_solve(f, b);
  CHECK((m * x - b).norm() / b.norm() < 1e-10);
}

TEST_CASE("identity factor leaves the right-hand side unchanged") {
  const SpdFactor f = spd_factor(Eigen::MatrixXd::Identity(3, 3));
  Eigen::VectorXd v(3);
  v << 1, -2, 3;
  const Eigen::VectorXd w = spd_solve(f, v);
  CHECK(w == v);
  Eigen::VectorXd y = v;
  f.forward_solve_in_place(y);
  CHECK(y == v);
}

TEST_CASE("indefinite and singular inputs report the pivot") {
  Eigen::MatrixXd m(3, 3);
  m << 1, 0, 0, 0, -1, 0, 0, 0, 1;
  try {
    spd_factor(m);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 1);
    CHECK(e.value() == doctest::Approx(-1.0));
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(spd_factor(s), NotPositiveDefinite);
  Eigen::MatrixXd tiny = Eigen::MatrixXd::Identity(2, 2);
  tiny(1, 1) = 1e-14;
  CHECK_NOTHROW(spd_factor(tiny));
  CHECK_THROWS_AS(spd_factor(tiny, 1e-12), NotPositiveDefinite);
}

TEST_CASE("dimension checks") {
  CHECK_THROWS_AS(spd_factor(Eigen::MatrixXd::Identity(2, 3)), DimensionMismatch);
  const SpdFactor f = spd_factor(Eigen::MatrixXd::Identity(3, 3));
  CHECK_THROWS_AS(spd_solve(f, Eigen::VectorXd(Eigen::VectorXd::Ones(2))), DimensionMismatch);
  Eigen::MatrixXd b = Eigen::MatrixXd::Ones(4, 2);
  CHECK_THROWS_AS(f.forward_solve_in_place(b), DimensionMismatch);
}

TEST_CASE("small inverses") {
  CHECK(sym4_inverse(Eigen::Matrix4d::Identity()).isApprox(Eigen::Matrix4d::Identity()));
  const Eigen::Matrix4d d = Eigen::Vector4d(1, 2, 4, 8).asDiagonal();
  const Eigen::Matrix4d di = sym4_inverse(d);
  CHECK(di.isApprox(Eigen::Matrix4d(Eigen::Vector4d(1, 0.5, 0.25, 0.125).asDiagonal()), 1e-15));
  const Eigen::Matrix4d r = random_spd(4, 3);
  const Eigen::Matrix4d ri = sym4_inverse(r);
  CHECK((ri * r - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ri - ri.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::Matrix3d r3 = random_spd(3, 5);
  CHECK((small_spd_inverse<3>(r3) * r3 - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::Matrix4d sing = Eigen::Matrix4d::Identity();
  sing(3, 3) = 0.0;
  CHECK_THROWS_AS(sym4_inverse(sing), NotPositiveDefinite);
}

TEST_CASE("finite-difference Jacobian") {
  const auto linear = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(2);
    y << 3 * x[0] - x[1], 2 * x[1];
    return y;
  };
  Eigen::VectorXd x0(2);
  x0 << 0.4, -1.0;
  const Eigen::MatrixXd j = finite_diff_jacobian(linear, x0, 1e-3);
  CHECK(j(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(j(0, 1) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(j(1, 0) == doctest::Approx(0.0));
  CHECK(j(1, 1) == doctest::Approx(2.0).epsilon(1e-12));

  const auto quad = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(1);
    y << x[0] * x[0] + 3 * x[0] * x[1];
    return y;
  };
  for (double h : {1e-4, 0.1, 1.0}) {
    const Eigen::MatrixXd q = finite_diff_jacobian(quad, x0, h);
    CHECK(q(0, 0) == doctest::Approx(2 * 0.4 + 3 * -1.0).epsilon(1e-9));
    CHECK(q(0, 1) == doctest::Approx(3 * 0.4).epsilon(1e-9));
  }
  CHECK_THROWS_AS(finite_diff_jacobian(linear, x0, 0.0), InvalidArgument);

  const auto on_params = [](const StableParams& t) {
    Eigen::VectorXd y(1);
    y << t.mu + 2 * t.beta;
    return y;
  };
  const Eigen::MatrixXd jp = finite_diff_jacobian(on_params, StableParams{0, 1, 1.5, 0}, 1e-4);
  CHECK(jp.rows() == 1);
  CHECK(jp.cols() == 4);
  CHECK(jp(0, 3) == doctest::Approx(2.0));
}

}  // TEST_SUITE
