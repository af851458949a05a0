#pragma once

// Globally adaptive Gauss-Kronrod (G10/K21) quadrature with QUADPACK-style
// error estimates, plus the semi-infinite transformation x = a + (1-u)/u.

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "fracbirth/error.hpp"

namespace fracbirth::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478956, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment kronrod21(F& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double tiny = std::numeric_limits<double>::min();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = 0.0;
  double resk = kWgk[10] * fc;
  double resabs = std::abs(resk);
  std::array<double, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double sum = f1[j] + f2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j) resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
  const double value = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, value, err};
}

}  // namespace detail

/// Integrates f over consecutive breakpoints [p0, p1, ..., pn].
template <class F>
Result gauss_kronrod(F&& f, std::span<const double> points, const Options& opt = {}) {
  Result out;
  if (points.size() < 2) return out;
  std::priority_queue<detail::Segment> heap;
  std::vector<detail::Segment> frozen;
  double total = 0.0, error = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1] > points[i])) continue;
    auto seg = detail::kronrod21(f, points[i], points[i + 1]);
    out.evaluations += 21;
    total += seg.value;
    error += seg.error;
    heap.push(seg);
  }
  auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
  int intervals = static_cast<int>(heap.size());
  while (!heap.empty() && error > tolerance() && intervals < opt.max_intervals) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        (worst.b - worst.a) < 8.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(worst.a), std::abs(worst.b))) {
      frozen.push_back(worst);
      continue;
    }
    auto left = detail::kronrod21(f, worst.a, mid);
    auto right = detail::kronrod21(f, mid, worst.b);
    out.evaluations += 42;
    ++intervals;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from scratch so round-off from the incremental updates does not accumulate.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  for (const auto& s : frozen) {
    total += s.value;
    error += s.error;
  }
  out.value = total;
  out.abs_error = error;
  out.intervals = intervals;
  out.converged = std::isfinite(total) && error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  return out;
}

template <class F>
Result gauss_kronrod(F&& f, double a, double b, const Options& opt = {}) {
  const std::array<double, 2> pts{a, b};
  return gauss_kronrod(f, std::span<const double>(pts), opt);
}

/// Integral over [a, inf) through x = a + (1-u)/u, u in (0, 1].
template <class F>
Result gauss_kronrod_to_infinity(F&& f, double a, const Options& opt = {}) {
  auto mapped = [&](double u) {
    const double x = a + (1.0 - u) / u;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v / (u * u);
  };
  return gauss_kronrod(mapped, 0.0, 1.0, opt);
}

inline double checked(const Result& r, const char* what) {
  if (!r.converged)
    fail(ErrorCode::QuadratureFailure, std::string(what) + ": estimated error " + std::to_string(r.abs_error) +
                                           " after " + std::to_string(r.intervals) + " intervals");
  return r.value;
}

template <class F>
double integrate(F&& f, double a, double b, const Options& opt, const char* what) {
  return checked(gauss_kronrod(f, a, b, opt), what);
}

template <class F>
double integrate(F&& f, std::span<const double> points, const Options& opt, const char* what) {
  return checked(gauss_kronrod(f, points, opt), what);
}

/// Sorted, de-duplicated breakpoints clipped to [a, b].
inline std::vector<double> breakpoints(double a, double b, std::initializer_list<double> interior) {
  std::vector<double> pts{a, b};
  for (double p : interior)
    if (std::isfinite(p) && p > a && p < b) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace fracbirth::quad
