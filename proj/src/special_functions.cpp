#include "fracbirth/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "fracbirth/error.hpp"
#include "fracbirth/quadrature.hpp"

namespace fracbirth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long double kEpsLd = std::numeric_limits<long double>::epsilon();

void check_nu(double nu) {
  if (!(nu > 0.0 && nu <= 1.0)) fail(ErrorCode::DomainError, "order nu must lie in (0, 1], got " + std::to_string(nu));
}

// Per-thread cache of 1/Gamma(nu h + 1) for the last few orders seen.
struct CoefficientTable {
  double nu = -1.0;
  std::vector<long double> c;
  unsigned long stamp = 0;
};

const std::vector<long double>& series_coefficients(double nu, std::size_t count) {
  thread_local std::array<CoefficientTable, 4> cache;
  thread_local unsigned long clock = 0;
  CoefficientTable* slot = nullptr;
  for (auto& entry : cache)
    if (entry.nu == nu) slot = &entry;
  if (!slot) {
    slot = &cache[0];
    for (auto& entry : cache)
      if (entry.stamp < slot->stamp) slot = &entry;
    slot->nu = nu;
    slot->c.clear();
  }
  slot->stamp = ++clock;
  const long double lnu = nu;
  while (slot->c.size() < count) {
    const long double h = static_cast<long double>(slot->c.size());
    slot->c.push_back(std::exp(-std::lgamma(lnu * h + 1.0L)));
  }
  return slot->c;
}

struct Kahan {
  long double sum = 0.0L, comp = 0.0L;
  void add(long double v) {
    const long double y = v - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// Positive terms evaluated in log space; used only for x > 0 beyond the fast path.
double positive_series_log(double nu, double x, const MlEvalConfig& cfg) {
  const long double lx = std::log(static_cast<long double>(x));
  const double h_peak = std::pow(x, 1.0 / nu) / nu;
  long double peak_log = 0.0L;
  for (int h = 0; h < cfg.max_terms; ++h) {
    const long double lt = h * lx - std::lgamma(static_cast<long double>(nu) * h + 1.0L);
    peak_log = std::max(peak_log, lt);
    if (h > h_peak + 1 && lt < peak_log - 50.0L) {
      // Second pass: scaled sum around the peak for accuracy and range.
      Kahan acc;
      for (int j = 0; j <= h; ++j)
        acc.add(std::exp(j * lx - std::lgamma(static_cast<long double>(nu) * j + 1.0L) - peak_log));
      const long double log_value = peak_log + std::log(acc.sum);
      if (log_value > std::log(static_cast<long double>(std::numeric_limits<double>::max())))
        fail(ErrorCode::NonConvergence, "E_{nu,1}(" + std::to_string(x) + ") overflows double precision");
      return static_cast<double>(std::exp(log_value));
    }
  }
  fail(ErrorCode::NonConvergence, "Mittag-Leffler series did not converge within max_terms");
}

double integral_negative(double nu, double y, const MlEvalConfig& cfg) {
  const double c = std::cos(nu * kPi);
  const double s = std::sin(nu * kPi);
  const double inv = 1.0 / nu;
  auto integrand = [&](double w) {
    const double near = std::exp(-std::pow(y * w, inv));
    const double far = std::exp(-std::pow(y / w, inv));
    return (near + far) / (w * w + 2.0 * w * c + 1.0);
  };
  const double prefactor = s / (nu * kPi);
  quad::Options opt;
  opt.abs_tol = 0.1 * cfg.abs_tol / prefactor;
  opt.rel_tol = 1e-13;
  const auto pts = quad::breakpoints(0.0, 1.0, {-c, 1.0 / y, 0.1 / y, -c - s, -c + s});
  const auto r = quad::gauss_kronrod(integrand, std::span<const double>(pts), opt);
  if (!r.converged) fail(ErrorCode::NonConvergence, "Mittag-Leffler integral route missed abs_tol");
  return prefactor * r.value;
}

double integral_positive(double nu, double x, const MlEvalConfig& cfg) {
  const double c = std::cos(nu * kPi);
  const double s = std::sin(nu * kPi);
  const double inv = 1.0 / nu;
  const double pole = std::pow(x, inv);
  if (pole > std::log(std::numeric_limits<double>::max()) - 1.0)
    fail(ErrorCode::NonConvergence, "E_{nu,1}(" + std::to_string(x) + ") overflows double precision");
  auto integrand = [&](double w) {
    const double near = std::exp(-std::pow(x * w, inv));
    const double far = std::exp(-std::pow(x / w, inv));
    return (near + far) / (w * w - 2.0 * w * c + 1.0);
  };
  const double prefactor = s / (nu * kPi);
  quad::Options opt;
  opt.abs_tol = 0.1 * cfg.abs_tol / prefactor;
  opt.rel_tol = 1e-13;
  const auto pts = quad::breakpoints(0.0, 1.0, {c, 1.0 / x, c - s, c + s});
  const auto r = quad::gauss_kronrod(integrand, std::span<const double>(pts), opt);
  if (!r.converged) fail(ErrorCode::NonConvergence, "Mittag-Leffler integral route missed abs_tol");
  return std::exp(pole) / nu - prefactor * r.value;
}

}  // namespace

void MlEvalConfig::validate() const {
  if (!(abs_tol > 0.0)) fail(ErrorCode::DomainError, "MlEvalConfig.abs_tol must be positive");
  if (max_terms < 1) fail(ErrorCode::DomainError, "MlEvalConfig.max_terms must be at least 1");
  if (!(series_threshold >= 0.0)) fail(ErrorCode::DomainError, "MlEvalConfig.series_threshold must be non-negative");
}

double mittag_leffler_series(double nu, double x, const MlEvalConfig& cfg) {
  check_nu(nu);
  cfg.validate();
  if (!std::isfinite(x)) fail(ErrorCode::DomainError, "Mittag-Leffler argument must be finite");
  if (x == 0.0) return 1.0;
  const double h_peak = std::pow(std::abs(x), 1.0 / nu) / nu;
  if (h_peak + 2.0 > cfg.max_terms)
    fail(ErrorCode::NonConvergence, "Mittag-Leffler series needs more than max_terms terms");
  if (x > 0.0 && x > cfg.series_threshold) return positive_series_log(nu, x, cfg);

  const auto& coeff = series_coefficients(nu, static_cast<std::size_t>(cfg.max_terms));
  const long double lx = x;
  const long double stop = 1e-4L * cfg.abs_tol;
  Kahan acc;
  long double power = 1.0L;
  long double max_abs = 0.0L;
  int h = 0;
  bool converged = false;
  for (; h < cfg.max_terms; ++h) {
    if (h > 0) power *= lx;
    const long double term = power * coeff[h];
    acc.add(term);
    max_abs = std::max(max_abs, std::abs(term));
    if (h > h_peak + 1.0 && (std::abs(term) <= stop || std::abs(term) <= 1e-21L * std::abs(acc.sum))) {
      converged = true;
      break;
    }
  }
  if (!converged) fail(ErrorCode::NonConvergence, "Mittag-Leffler series did not converge within max_terms");
  const long double roundoff = 8.0L * kEpsLd * max_abs * std::sqrt(static_cast<long double>(h + 1));
  if (roundoff > 0.1L * cfg.abs_tol && roundoff > 1e-15L * std::abs(acc.sum))
    fail(ErrorCode::NonConvergence, "Mittag-Leffler series loses accuracy to cancellation");
  return static_cast<double>(acc.sum);
}

double mittag_leffler_integral(double nu, double x, const MlEvalConfig& cfg) {
  check_nu(nu);
  cfg.validate();
  if (!std::isfinite(x)) fail(ErrorCode::DomainError, "Mittag-Leffler argument must be finite");
  if (nu == 1.0) return std::exp(x);
  if (x == 0.0) return 1.0;
  return x < 0.0 ? integral_negative(nu, -x, cfg) : integral_positive(nu, x, cfg);
}

double mittag_leffler(double nu, double x, const MlEvalConfig& cfg) {
  check_nu(nu);
  cfg.validate();
  if (!std::isfinite(x)) fail(ErrorCode::DomainError, "Mittag-Leffler argument must be finite");
  if (nu == 1.0) return std::exp(x);
  if (x == 0.0) return 1.0;
  if (std::abs(x) <= cfg.series_threshold) {
    try {
      return mittag_leffler_series(nu, x, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonConvergence) throw;
    }
    return mittag_leffler_integral(nu, x, cfg);
  }
  if (x < 0.0) return integral_negative(nu, -x, cfg);
  const double h_peak = std::pow(x, 1.0 / nu) / nu;
  if (h_peak + 60.0 < cfg.max_terms) return positive_series_log(nu, x, cfg);
  return integral_positive(nu, x, cfg);
}

double airy_ai(double x) {
  if (!std::isfinite(x)) fail(ErrorCode::DomainError, "Airy argument must be finite");
  constexpr long double ai0 = 0.355028053887817239260063186004183176L;
  constexpr long double dai0 = 0.258819403792806798405183560189203963L;  // -Ai'(0)
  if (std::abs(x) <= 8.0) {
    const long double lx = x;
    const long double x3 = lx * lx * lx;
    long double f = 1.0L, g = lx;
    long double tf = 1.0L, tg = lx;
    for (int k = 0; k < 200; ++k) {
      tf *= x3 / ((3.0L * k + 2.0L) * (3.0L * k + 3.0L));
      tg *= x3 / ((3.0L * k + 3.0L) * (3.0L * k + 4.0L));
      f += tf;
      g += tg;
      if (std::abs(tf) + std::abs(tg) < 1e-24L * (std::abs(f) + std::abs(g))) break;
    }
    return static_cast<double>(ai0 * f - dai0 * g);
  }

  const double z = std::abs(x);
  const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
  // u_k = Gamma(3k + 1/2) / (54^k k! Gamma(k + 1/2))
  std::array<double, 40> u{};
  u[0] = 1.0;
  for (int k = 1; k < 40; ++k) u[k] = u[k - 1] * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);

  if (x > 0.0) {
    double sum = 0.0, power = 1.0, last = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 40; ++k) {
      const double term = u[k] * power;
      if (term > last || term < 1e-17) break;
      sum += (k % 2 == 0 ? term : -term);
      last = term;
      power /= zeta;
    }
    return std::exp(-zeta) / (2.0 * std::sqrt(kPi) * std::pow(z, 0.25)) * sum;
  }

  double p = 0.0, q = 0.0, power = 1.0, last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 40; ++k) {
    const double term = u[k] * power;
    if (term > last || term < 1e-17) break;
    const int sign = (k / 2) % 2 == 0 ? 1 : -1;
    (k % 2 == 0 ? p : q) += sign * term;
    last = term;
    power /= zeta;
  }
  const double phase = zeta + 0.25 * kPi;
  return (std::sin(phase) * p - std::cos(phase) * q) / (std::sqrt(kPi) * std::pow(z, 0.25));
}

double sin_pi(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0.0) r += 2.0;
  if (r == 0.0 || r == 1.0) return 0.0;
  if (r < 0.5) return std::sin(kPi * r);
  if (r < 1.5) return std::sin(kPi * (1.0 - r));
  return std::sin(kPi * (r - 2.0));
}

double rgamma(double x) {
  if (x > 0.0) return x < 170.0 ? 1.0 / std::tgamma(x) : std::exp(-std::lgamma(x));
  if (x == std::floor(x)) return 0.0;
  // Reflection: 1/Gamma(x) = Gamma(1 - x) sin(pi x) / pi
  return sin_pi(x) * std::exp(std::lgamma(1.0 - x)) / kPi;
}

double kanter_log_a(double nu, double u) {
  const double a = nu / (1.0 - nu);
  const double b = 1.0 / (1.0 - nu);
  return a * std::log(sin_pi(nu * u)) + std::log(sin_pi((1.0 - nu) * u)) - b * std::log(sin_pi(u));
}

double log_stable_positive_sample(double nu, CounterRng& rng) {
  if (!(nu > 0.0 && nu < 1.0)) fail(ErrorCode::DomainError, "stable index must lie in (0, 1), got " + std::to_string(nu));
  const double u = rng.uniform();
  const double e = rng.exponential();
  return (1.0 - nu) / nu * (kanter_log_a(nu, u) - std::log(e));
}

double stable_positive_sample(double nu, CounterRng& rng) {
  const double log_s = log_stable_positive_sample(nu, rng);
  const double s = std::exp(log_s);
  return s > 0.0 ? s : std::numeric_limits<double>::denorm_min();
}

}  // namespace fracbirth
