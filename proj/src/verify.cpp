#include "fracbirth/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fracbirth/analytic.hpp"
#include "fracbirth/error.hpp"
#include "fracbirth/quadrature.hpp"
#include "log.hpp"

namespace fracbirth {

namespace {

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// b_m = (m+1)^{1-nu} - m^{1-nu} of the L1 scheme.
std::vector<double> l1_weights(double nu, std::size_t n) {
  std::vector<double> b(n);
  const double e = 1.0 - nu;
  for (std::size_t m = 0; m < n; ++m) b[m] = std::pow(m + 1.0, e) - (m == 0 ? 0.0 : std::pow(static_cast<double>(m), e));
  return b;
}

// p_1..p_{k_max} at time t by the implicit L1 scheme on `steps` uniform intervals.
std::vector<double> l1_solve(const std::vector<double>& lam, double nu, double t, std::size_t steps) {
  const std::size_t K = lam.size();
  const double h = t / static_cast<double>(steps);
  const double g = std::pow(h, -nu) / std::tgamma(2.0 - nu);
  const auto b = l1_weights(nu, steps);
  // inc[k][j] = p_k(t_{j+1}) - p_k(t_j)
  std::vector<std::vector<double>> inc(K, std::vector<double>(steps, 0.0));
  std::vector<double> cur(K, 0.0), next(K, 0.0);
  cur[0] = 1.0;
  for (std::size_t n = 1; n <= steps; ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      double hist = 0.0;
      for (std::size_t j = 0; j + 1 < n; ++j) hist += b[n - 1 - j] * inc[k][j];
      const double feed = k > 0 ? lam[k - 1] * next[k - 1] : 0.0;
      next[k] = (g * b[0] * cur[k] - g * hist + feed) / (g * b[0] + lam[k]);
      inc[k][n - 1] = next[k] - cur[k];
    }
    cur = next;
  }
  return cur;
}

}  // namespace

IdentityReport make_report(std::string name, double lhs, double rhs, double tol) {
  IdentityReport r;
  r.identity_name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_err = std::abs(lhs - rhs);
  r.tol = tol;
  r.passed = std::isfinite(r.abs_err) && r.abs_err <= tol;
  return r;
}

double laplace_numeric(const std::function<double(double)>& f, double mu, double tol, double bound, double growth) {
  if (!(mu > growth)) fail(ErrorCode::DomainError, "Laplace transform needs mu above the growth rate of f");
  if (!(tol > 0.0) || !(bound > 0.0)) fail(ErrorCode::DomainError, "Laplace transform needs positive tol and bound");
  const double rate = mu - growth;
  const double t_star = std::max(std::log(10.0 * bound / tol), std::log(10.0 * bound / (rate * tol))) / rate;
  quad::Options opt;
  opt.abs_tol = 0.1 * tol;
  opt.rel_tol = 1e-12;
  opt.max_intervals = 20000;
  std::vector<double> pts{0.0};
  for (double p = 1e-8; p < t_star; p *= (p < 0.1 ? 100.0 : 2.0)) pts.push_back(p);
  pts.push_back(t_star);
  return quad::integrate([&](double t) { return std::exp(-mu * t) * f(t); }, std::span<const double>(pts), opt,
                         "Laplace transform");
}

IdentityReport verify_pmf_laplace(double lambda, double nu, std::int64_t k, double mu, double tol) {
  const double lhs = laplace_numeric([&](double t) { return pmf_linear(lambda, nu, t, k); }, mu, 0.1 * tol);
  const double mn = std::pow(mu, nu);
  long double sum = 0.0L, binom = 1.0L;
  for (std::int64_t j = 1; j <= k; ++j) {
    if (j > 1) binom = binom * static_cast<long double>(k - j + 1) / static_cast<long double>(j - 1);
    sum += (j % 2 == 1 ? 1.0L : -1.0L) * binom / (mn + static_cast<long double>(j) * lambda);
  }
  const double rhs = static_cast<double>(std::pow(mu, nu - 1.0) * sum);
  return make_report("pmf-laplace lambda=" + fmt_num(lambda) + " nu=" + fmt_num(nu) + " k=" + std::to_string(k) +
                         " mu=" + fmt_num(mu),
                     lhs, rhs, tol);
}

double pgf_laplace_rhs(double lambda, double nu, double u, double mu) {
  if (!(u >= 0.0 && u <= 1.0)) fail(ErrorCode::DomainError, "u must lie in [0, 1]");
  if (!(lambda > 0.0) || !(mu > 0.0)) fail(ErrorCode::DomainError, "lambda and mu must be positive");
  const double c = std::pow(mu, nu) / lambda;
  const double pre = u * std::pow(mu, nu - 1.0) / lambda;
  quad::Options opt;
  opt.abs_tol = 1e-14;
  opt.rel_tol = 1e-13;
  double integral;
  if (c < 1.0) {
    // 1 - x = w^q with q c = 1 removes the endpoint singularity at u = 1.
    const double q = 1.0 / c;
    integral = quad::integrate(
        [&](double w) {
          const double wq = std::pow(w, q);
          if (u == 1.0) return q;
          return q * wq / (1.0 - u + u * wq);
        },
        0.0, 1.0, opt, "generating-function transform");
  } else {
    integral = quad::integrate([&](double x) { return std::pow(1.0 - x, c) / (1.0 - x * u); }, 0.0, 1.0, opt,
                               "generating-function transform");
  }
  return pre * integral;
}

double pgf_laplace_rhs_derivative_at_one(double lambda, double nu, double mu) {
  const double c = std::pow(mu, nu) / lambda;
  if (!(c > 1.0)) fail(ErrorCode::DomainError, "derivative at u = 1 exists only for mu^nu > lambda");
  quad::Options opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-13;
  // d/du [u int (1-x)^c / (1 - x u)] at u = 1 = int (1-x)^{c-1} + int x (1-x)^{c-2}.
  double integral;
  if (c < 3.0) {
    const double p = 2.0 / (c - 1.0);  // 1 - x = w^p
    integral = quad::integrate(
        [&](double w) {
          const double wp = std::pow(w, p);
          return p * wp * w + p * (1.0 - wp) * w;
        },
        0.0, 1.0, opt, "generating-function derivative");
  } else {
    integral = quad::integrate(
        [&](double x) { return std::pow(1.0 - x, c - 1.0) + x * std::pow(1.0 - x, c - 2.0); }, 0.0, 1.0, opt,
        "generating-function derivative");
  }
  return std::pow(mu, nu - 1.0) / lambda * integral;
}

IdentityReport verify_pgf_laplace(double lambda, double nu, double u, double mu, double tol) {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::DomainError, "u must lie strictly inside (0, 1)");
  const double lhs = laplace_numeric([&](double t) { return pgf_linear(lambda, nu, t, u); }, mu, 0.1 * tol);
  const double rhs = pgf_laplace_rhs(lambda, nu, u, mu);
  return make_report("pgf-laplace lambda=" + fmt_num(lambda) + " nu=" + fmt_num(nu) + " u=" + fmt_num(u) +
                         " mu=" + fmt_num(mu),
                     lhs, rhs, tol);
}

IdentityReport verify_pgf_limit(double lambda, double nu, double mu, double tol) {
  return make_report("pgf-limit-u1 lambda=" + fmt_num(lambda) + " nu=" + fmt_num(nu) + " mu=" + fmt_num(mu),
                     pgf_laplace_rhs(lambda, nu, 1.0, mu), 1.0 / mu, tol);
}

IdentityReport verify_pgf_derivative(double lambda, double nu, double mu, double tol) {
  return make_report("pgf-derivative-u1 lambda=" + fmt_num(lambda) + " nu=" + fmt_num(nu) + " mu=" + fmt_num(mu),
                     pgf_laplace_rhs_derivative_at_one(lambda, nu, mu),
                     std::pow(mu, nu - 1.0) / (std::pow(mu, nu) - lambda), tol);
}

IdentityReport verify_mean_laplace(double lambda, double nu, double mu, double tol) {
  if (!(std::pow(mu, nu) > lambda)) fail(ErrorCode::DomainError, "mean transform exists only for mu^nu > lambda");
  const double growth = std::pow(lambda, 1.0 / nu);
  const double lhs = laplace_numeric([&](double t) { return mean_linear(lambda, nu, t); }, mu, 0.1 * tol,
                                     2.0 / nu + 1.0, growth);
  return make_report("mean-laplace lambda=" + fmt_num(lambda) + " nu=" + fmt_num(nu) + " mu=" + fmt_num(mu), lhs,
                     std::pow(mu, nu - 1.0) / (std::pow(mu, nu) - lambda), tol);
}

std::vector<double> solve_caputo_system(const RateSchedule& schedule, double nu, double t, std::size_t k_max,
                                        std::size_t steps) {
  if (!(nu > 0.0 && nu <= 1.0)) fail(ErrorCode::DomainError, "order nu must lie in (0, 1]");
  if (!(t > 0.0)) fail(ErrorCode::DomainError, "ODE solve needs t > 0");
  if (k_max == 0 || steps < 4) fail(ErrorCode::DomainError, "ODE solve needs k_max >= 1 and steps >= 4");
  const RateSchedule v = validate(schedule, k_max);
  std::vector<double> lam(k_max);
  for (std::size_t k = 0; k < k_max; ++k) lam[k] = rate_at(v, k + 1);
  const auto p1 = l1_solve(lam, nu, t, steps);
  const auto p2 = l1_solve(lam, nu, t, 2 * steps);
  const auto p4 = l1_solve(lam, nu, t, 4 * steps);
  std::vector<double> out(k_max);
  for (std::size_t k = 0; k < k_max; ++k) {
    const double d1 = p1[k] - p2[k];
    const double d2 = p2[k] - p4[k];
    double order = 1.0;
    if (d2 != 0.0 && d1 / d2 > 1.0) order = std::clamp(std::log2(d1 / d2), 0.3, 2.5);
    out[k] = p4[k] + (d2 == 0.0 ? 0.0 : -d2 / (std::exp2(order) - 1.0));
    logger()->debug("caputo ode k={} order={:.3f} correction={:.3e}", k + 1, order, -d2 / (std::exp2(order) - 1.0));
  }
  return out;
}

namespace {

struct L1Residual {
  double residual;
  double h;
};

// L1 derivative of s -> p(s) at t on n intervals minus the governing right side.
L1Residual l1_residual(const std::vector<double>& values, double nu, double t, std::size_t n, double rhs) {
  const std::size_t stride = (values.size() - 1) / n;
  const double h = t / static_cast<double>(n);
  const auto b = l1_weights(nu, n);
  long double sum = 0.0L;
  for (std::size_t j = 0; j < n; ++j) sum += b[n - 1 - j] * (values[(j + 1) * stride] - values[j * stride]);
  const double d = static_cast<double>(sum) * std::pow(h, -nu) / std::tgamma(2.0 - nu);
  return {d - rhs, h};
}

}  // namespace

IdentityReport caputo_residual(const RateSchedule& schedule, double nu, double t, std::size_t k, double h_grid) {
  if (!(h_grid > 0.0 && h_grid < t)) fail(ErrorCode::DomainError, "h_grid must lie in (0, t)");
  if (k == 0) fail(ErrorCode::IndexOutOfRange, "pmf index starts at 1");
  const RateSchedule v = validate(schedule, k);
  auto n = static_cast<std::size_t>(std::llround(t / h_grid));
  n += n % 2;  // the calibration uses every other node
  const double order = std::min(1.0, 2.0 - nu);
  auto sample_values = [&](std::size_t kk) {
    std::vector<double> vals(n + 1);
    for (std::size_t j = 0; j <= n; ++j) vals[j] = pmf_general(v, nu, t * static_cast<double>(j) / static_cast<double>(n), kk);
    return vals;
  };
  auto rhs_at = [&](std::size_t kk) {
    double r = -rate_at(v, kk) * pmf_general(v, nu, t, kk);
    if (kk > 1) r += rate_at(v, kk - 1) * pmf_general(v, nu, t, kk - 1);
    return r;
  };
  // C from the k = 1 residual on the doubled step, scaled by the rate so larger rates get room.
  const auto base = sample_values(1);
  const auto coarse = l1_residual(base, nu, t, n / 2, rhs_at(1));
  const double c = 4.0 * std::abs(coarse.residual) / std::pow(coarse.h, order);
  const double scale = std::max(1.0, rate_at(v, k) / rate_at(v, 1));
  const auto vals = k == 1 ? base : sample_values(k);
  const auto fine = l1_residual(vals, nu, t, n, rhs_at(k));
  const double tol = std::max(c * scale * std::pow(fine.h, order), 1e-12);
  return make_report("caputo-residual nu=" + fmt_num(nu) + " t=" + fmt_num(t) + " k=" + std::to_string(k) +
                         " h=" + fmt_num(fine.h),
                     fine.residual, 0.0, tol);
}

IdentityReport verify_general_vs_ode(const RateSchedule& schedule, double nu, double t, std::size_t k, double tol) {
  const auto ode = solve_caputo_system(schedule, nu, t, k);
  return make_report("general-vs-ode nu=" + fmt_num(nu) + " t=" + fmt_num(t) + " k=" + std::to_string(k),
                     pmf_general(schedule, nu, t, k), ode[k - 1], tol);
}

IdentityReport verify_relation(const RateSchedule& schedule, std::size_t k) {
  if (k < 2) fail(ErrorCode::DomainError, "relation needs k >= 2");
  const auto pf = partial_fraction_coeffs(schedule, k);
  long double lhs = 0.0L;
  for (std::size_t m = 0; m + 1 < k; ++m) lhs -= pf.weights[m];
  const RateSchedule v = validate(schedule, k);
  long double prod = 1.0L;
  for (std::size_t l = 1; l < k; ++l) prod *= static_cast<long double>(rate_at(v, l)) - rate_at(v, k);
  const double rhs = static_cast<double>(1.0L / prod);
  auto r = make_report("vandermonde-relation k=" + std::to_string(k), static_cast<double>(lhs), rhs,
                       1e-9 * std::abs(rhs));
  return r;
}

IdentityReport verify_kirschenhofer(double x, int n) {
  long double lhs = 0.0L, binom = 1.0L;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) binom = binom * (n - j + 1) / j;
    lhs += (j % 2 == 0 ? 1.0L : -1.0L) * binom / (x + j);
  }
  long double rhs = std::tgamma(n + 1.0L);
  for (int j = 0; j <= n; ++j) rhs /= (x + j);
  return make_report("kirschenhofer x=" + fmt_num(x) + " n=" + std::to_string(n), static_cast<double>(lhs),
                     static_cast<double>(rhs), 1e-12 * std::max(1.0, std::abs(static_cast<double>(rhs))));
}

IdentityReport verify_power_sum(int big_n, int n) {
  if (big_n < 0 || n < 0 || n > big_n) fail(ErrorCode::DomainError, "power sum needs 0 <= n <= N");
  long double lhs = 0.0L, binom = 1.0L;
  for (int j = 0; j <= big_n; ++j) {
    if (j > 0) binom = binom * (big_n - j + 1) / j;
    lhs += (j % 2 == 0 ? 1.0L : -1.0L) * binom * std::pow(static_cast<long double>(j + 1), n);
  }
  const long double rhs = n < big_n ? 0.0L : (big_n % 2 == 0 ? 1.0L : -1.0L) * std::tgamma(big_n + 1.0L);
  return make_report("power-sum N=" + std::to_string(big_n) + " n=" + std::to_string(n), static_cast<double>(lhs),
                     static_cast<double>(rhs), 1e-12 * std::max(1.0L, std::abs(rhs)));
}

IdentityReport verify_normalization(double lambda, double nu, double t, double tail_tol) {
  TablePolicy policy;
  policy.tail_tol = tail_tol;
  const auto table = pmf_table_linear(lambda, nu, t, 1, policy);
  const double tail = linear_tail_probability(lambda, nu, t, table.k_cut);
  auto r = make_report("normalization nu=" + fmt_num(nu) + " t=" + fmt_num(t) + " k_cut=" + std::to_string(table.k_cut),
                       table.sum() + tail, 1.0, 1e-9);
  if (tail > tail_tol + 1e-9) r.passed = false;
  return r;
}

std::vector<IdentityReport> run_identity_suite(const SuiteConfig& config) {
  std::vector<IdentityReport> out;
  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const Error& e) {
      IdentityReport r;
      r.identity_name = name + " (" + e.what() + ")";
      r.lhs = r.rhs = r.abs_err = std::numeric_limits<double>::quiet_NaN();
      r.passed = false;
      out.push_back(r);
    }
  };
  const double lam = config.lambda;
  const RateSchedule linear = RateSchedule::linear(lam);
  guarded("kirschenhofer", [] { return verify_kirschenhofer(2.0, 3); });
  for (int big_n = 1; big_n <= 6; ++big_n)
    for (int n = 0; n <= big_n; ++n) guarded("power-sum", [&] { return verify_power_sum(big_n, n); });
  const RateSchedule explicit4 = RateSchedule::explicit_rates({1.0, 2.0, 3.0, 4.0});
  for (std::size_t k = 2; k <= 4; ++k) guarded("vandermonde-relation", [&] { return verify_relation(explicit4, k); });
  for (std::size_t k = 2; k <= 12; ++k) guarded("vandermonde-relation", [&] { return verify_relation(linear, k); });
  for (double nu : config.nus) {
    for (double t : config.ts) {
      guarded("normalization", [&] { return verify_normalization(lam, nu, t); });
      for (std::size_t k = 1; k <= 3; ++k)
        guarded("caputo-residual", [&] { return caputo_residual(linear, nu, t, k, t / 2000.0); });
    }
    for (double mu : config.mus) {
      for (auto k : config.ks) guarded("pmf-laplace", [&] { return verify_pmf_laplace(lam, nu, k, mu); });
      for (double u : config.us) guarded("pgf-laplace", [&] { return verify_pgf_laplace(lam, nu, u, mu); });
      guarded("pgf-limit-u1", [&] { return verify_pgf_limit(lam, nu, mu); });
      if (std::pow(mu, nu) > lam) {
        guarded("pgf-derivative-u1", [&] { return verify_pgf_derivative(lam, nu, mu); });
        guarded("mean-laplace", [&] { return verify_mean_laplace(lam, nu, mu); });
      }
    }
  }
  return out;
}

}  // namespace fracbirth
