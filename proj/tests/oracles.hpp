#pragma once

// Reference values computed independently of the library: multiprecision arithmetic,
// elementary closed forms and direct ODE integration.

#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using big = boost::multiprecision::cpp_bin_float_50;

/// E_{1/2,1}(z) = exp(z^2) erfc(-z) in 50-digit arithmetic.
inline double ml_half(double z) {
  const big bz = z;
  return static_cast<double>(exp(bz * bz) * erfc(-bz));
}

/// Plain power series of E_{nu,1}(x) in 100-digit arithmetic, summed until the terms are
/// negligible. Peak terms grow like exp(|x|^{1/nu}); keep that below ~1e60.
inline double ml_series_big(double nu, double x) {
  using wide = boost::multiprecision::cpp_bin_float_100;
  wide sum = 0, power = 1;
  const wide bx = x, bnu = nu;
  for (int h = 0; h < 20000; ++h) {
    const wide term = power / boost::multiprecision::tgamma(bnu * h + 1);
    sum += term;
    if (h > 10 && abs(term) < 1e-40 * abs(sum) && abs(term) < 1e-40) break;
    power *= bx;
  }
  return static_cast<double>(sum);
}

/// Classical pure birth pmf by RK4 integration of the forward equations.
inline std::vector<double> birth_ode(const std::vector<double>& lam, double t, int steps = 20000) {
  const std::size_t K = lam.size();
  std::vector<double> p(K, 0.0);
  p[0] = 1.0;
  const double h = t / steps;
  auto rhs = [&](const std::vector<double>& q) {
    std::vector<double> d(K);
    for (std::size_t k = 0; k < K; ++k) d[k] = -lam[k] * q[k] + (k > 0 ? lam[k - 1] * q[k - 1] : 0.0);
    return d;
  };
  for (int s = 0; s < steps; ++s) {
    auto k1 = rhs(p);
    std::vector<double> tmp(K);
    for (std::size_t i = 0; i < K; ++i) tmp[i] = p[i] + 0.5 * h * k1[i];
    auto k2 = rhs(tmp);
    for (std::size_t i = 0; i < K; ++i) tmp[i] = p[i] + 0.5 * h * k2[i];
    auto k3 = rhs(tmp);
    for (std::size_t i = 0; i < K; ++i) tmp[i] = p[i] + h * k3[i];
    auto k4 = rhs(tmp);
    for (std::size_t i = 0; i < K; ++i) p[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return p;
}

}  // namespace oracle
