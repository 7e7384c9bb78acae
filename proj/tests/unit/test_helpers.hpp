#pragma once

#include <cmath>
#include <complex>

#include "stable_tmle/stable_model.hpp"

namespace test_util {

inline bool close(double a, double b, double rel, double abs_tol) {
  return std::abs(a - b) <= rel * std::abs(a) + abs_tol;
}

inline bool close(std::complex<double> a, std::complex<double> b, double rel, double abs_tol) {
  return close(a.real(), b.real(), rel, abs_tol) && close(a.imag(), b.imag(), rel, abs_tol);
}

}  // namespace test_util
