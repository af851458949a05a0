#include "fracbirth/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fracbirth/error.hpp"
#include "fracbirth/quadrature.hpp"

namespace fracbirth {

namespace {

constexpr double kClampBand = 1e-9;

void check_args(double nu, double t) {
  if (!(nu > 0.0 && nu <= 1.0)) fail(ErrorCode::DomainError, "order nu must lie in (0, 1], got " + std::to_string(nu));
  if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorCode::DomainError, "time t must be finite and non-negative");
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorCode::NonPositiveRate, "lambda must be positive and finite");
}

double clamp_probability(double p, const char* what) {
  if (std::isnan(p) || p < -kClampBand || p > 1.0 + kClampBand)
    fail(ErrorCode::NumericalBreakdown, std::string(what) + " produced " + std::to_string(p) + " outside [0, 1]");
  return std::clamp(p, 0.0, 1.0);
}

long double log_binomial(std::int64_t n, std::int64_t r) {
  return std::lgamma(n + 1.0L) - std::lgamma(r + 1.0L) - std::lgamma(n - r + 1.0L);
}

// Mittag-Leffler evaluation tightened for use inside alternating sums.
MlEvalConfig tight_config() {
  MlEvalConfig cfg;
  cfg.abs_tol = 1e-13;
  return cfg;
}

// sum_{r=0}^{m} C(m, r) (-1)^r E(-(n0 + r) a) with compensated summation.
struct AltResult {
  long double value = 0.0L;
  long double abs_sum = 0.0L;
  long double error = 0.0L;
};

AltResult alternating_ml_sum(double nu, double a, std::int64_t n0, std::int64_t m, const MlEvalConfig& cfg) {
  AltResult out;
  long double sum = 0.0L, comp = 0.0L, binom = 1.0L, binom_total = 0.0L;
  for (std::int64_t r = 0; r <= m; ++r) {
    if (r > 0) binom = binom * static_cast<long double>(m - r + 1) / static_cast<long double>(r);
    const long double term = (r % 2 == 0 ? 1.0L : -1.0L) * binom * mittag_leffler(nu, -a * static_cast<double>(n0 + r), cfg);
    const long double y = term - comp;
    const long double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
    out.abs_sum += std::abs(term);
    binom_total += binom;
  }
  out.value = sum;
  // Kernel error per term plus rounding of the largest terms.
  out.error = binom_total * cfg.abs_tol + out.abs_sum * std::numeric_limits<double>::epsilon();
  return out;
}

// C(k-1, k-n0) E[ y^{n0} x^{k-n0} ] over the subordination grid, y = exp(-a Z), x = 1 - y.
double subordinated_negbin(const SubordinationGrid& g, double a, std::int64_t n0, std::int64_t k) {
  const long double lb = log_binomial(k - 1, k - n0);
  long double sum = 0.0L;
  for (std::size_t i = 0; i < g.z.size(); ++i) {
    const double az = a * g.z[i];
    const long double log_term = lb - n0 * static_cast<long double>(az) +
                                 (k - n0) * static_cast<long double>(std::log(-std::expm1(-az)));
    sum += g.w[i] * std::exp(log_term);
  }
  return static_cast<double>(sum);
}

double negbin(double a, std::int64_t n0, std::int64_t k) {
  const long double log_p = log_binomial(k - 1, k - n0) - n0 * static_cast<long double>(a) +
                            (k - n0) * static_cast<long double>(std::log(-std::expm1(-a)));
  return static_cast<double>(std::exp(log_p));
}

}  // namespace

double PmfTable::at(std::int64_t k) const {
  if (k < n0 || k > k_cut) return 0.0;
  return probs[static_cast<std::size_t>(k - n0)];
}

double PmfTable::sum() const {
  long double s = 0.0L;
  for (double p : probs) s += p;
  return static_cast<double>(s);
}

double PmfTable::first_moment() const {
  long double s = 0.0L;
  for (std::size_t i = 0; i < probs.size(); ++i) s += static_cast<long double>(n0 + static_cast<std::int64_t>(i)) * probs[i];
  return static_cast<double>(s);
}

PartialFractionCoeffs partial_fraction_coeffs(const RateSchedule& schedule, std::size_t k) {
  if (k == 0) fail(ErrorCode::IndexOutOfRange, "pmf index starts at 1");
  const RateSchedule v = validate(schedule, k);
  std::vector<long double> lam(k);
  for (std::size_t i = 0; i < k; ++i) lam[i] = rate_at(v, i + 1);
  PartialFractionCoeffs out;
  out.k = k;
  long double pref = 1.0L;
  for (std::size_t j = 0; j + 1 < k; ++j) pref *= lam[j];
  out.prefactor = static_cast<double>(pref);
  out.weights.resize(k);
  for (std::size_t m = 0; m < k; ++m) {
    long double prod = 1.0L;
    for (std::size_t l = 0; l < k; ++l) {
      if (l == m) continue;
      const long double d = lam[l] - lam[m];
      if (d == 0.0L) fail(ErrorCode::DegenerateRates, "rate difference underflows to zero");
      prod *= d;
    }
    out.weights[m] = static_cast<double>(1.0L / prod);
    if (!std::isfinite(out.weights[m])) fail(ErrorCode::DegenerateRates, "partial-fraction weight is not finite");
  }
  return out;
}

double pmf_general(const RateSchedule& schedule, double nu, double t, std::size_t k, const MlEvalConfig& cfg) {
  check_args(nu, t);
  if (k == 0) fail(ErrorCode::IndexOutOfRange, "pmf index starts at 1");
  const RateSchedule v = validate(schedule, k);
  if (t == 0.0) return k == 1 ? 1.0 : 0.0;
  const double tn = std::pow(t, nu);
  if (k == 1) return mittag_leffler(nu, -rate_at(v, 1) * tn, cfg);
  std::vector<long double> lam(k);
  for (std::size_t i = 0; i < k; ++i) lam[i] = rate_at(v, i + 1);
  // prefactor * weight_m, formed as a product of k-1 ratios so neither part overflows.
  long double sum = 0.0L, comp = 0.0L;
  for (std::size_t m = 0; m < k; ++m) {
    long double coef = 1.0L;
    std::size_t j = 0;
    for (std::size_t l = 0; l < k; ++l) {
      if (l == m) continue;
      const long double d = lam[l] - lam[m];
      if (d == 0.0L) fail(ErrorCode::DegenerateRates, "rate difference underflows to zero");
      coef *= lam[j++] / d;
    }
    const long double term = coef * mittag_leffler(nu, -static_cast<double>(lam[m]) * tn, cfg);
    const long double y = term - comp;
    const long double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  return clamp_probability(static_cast<double>(sum), "general-rate pmf");
}

AlternatingSum pmf_linear_alternating(double lambda, double nu, double t, std::int64_t k) {
  check_lambda(lambda);
  check_args(nu, t);
  if (k < 1) fail(ErrorCode::IndexOutOfRange, "pmf index starts at 1");
  if (t == 0.0) return {k == 1 ? 1.0 : 0.0, 1.0};
  const auto r = alternating_ml_sum(nu, lambda * std::pow(t, nu), 1, k - 1, tight_config());
  const double cond = r.value != 0.0L ? static_cast<double>(r.abs_sum / std::abs(r.value))
                                      : std::numeric_limits<double>::infinity();
  if (cond > 1e12)
    fail(ErrorCode::NumericalBreakdown, "alternating sum for k=" + std::to_string(k) + " has condition estimate " +
                                            std::to_string(cond));
  return {clamp_probability(static_cast<double>(r.value), "alternating pmf sum"), cond};
}

double pmf_linear(double lambda, double nu, double t, std::int64_t k) { return pmf_linear_n0(lambda, nu, t, 1, k); }

double pmf_linear_n0(double lambda, double nu, double t, std::int64_t n0, std::int64_t k) {
  check_lambda(lambda);
  check_args(nu, t);
  if (n0 < 1) fail(ErrorCode::DomainError, "initial population n0 must be at least 1");
  if (k < n0) fail(ErrorCode::IndexOutOfRange, "pmf index k must be at least n0");
  if (t == 0.0) return k == n0 ? 1.0 : 0.0;
  const double a = lambda * std::pow(t, nu);
  if (nu == 1.0) return negbin(a, n0, k);
  if (k - n0 <= 40) {
    const auto cfg = tight_config();
    const auto r = alternating_ml_sum(nu, a, n0, k - n0, cfg);
    const long double scale = std::exp(log_binomial(k - 1, k - n0));
    const long double value = scale * r.value;
    const long double error = scale * r.error;
    if (error <= 1e-12L || error <= 1e-9L * std::abs(value)) return clamp_probability(static_cast<double>(value), "linear pmf");
  }
  const auto grid = SubordinationGrid::cached(nu, a * static_cast<double>(n0));
  return clamp_probability(subordinated_negbin(*grid, a, n0, k), "subordinated linear pmf");
}

double pmf_linear_alt(double lambda, double nu, double t, std::int64_t k) {
  check_lambda(lambda);
  check_args(nu, t);
  if (k < 1) fail(ErrorCode::IndexOutOfRange, "pmf index starts at 1");
  if (t == 0.0) return k == 1 ? 1.0 : 0.0;
  const double a = lambda * std::pow(t, nu);
  const long double la = std::log(static_cast<long double>(a));
  const long double lk = std::log(static_cast<long double>(k));
  const long double lfact = std::lgamma(static_cast<long double>(k));
  // T[j] = S2(n, j) / k^n, advanced in n; S2(1, 1) = 1.
  std::vector<long double> T(static_cast<std::size_t>(k) + 1, 0.0L);
  T[1] = 1.0L / k;
  for (std::int64_t n = 1; n < k; ++n) {
    for (std::int64_t j = std::min<std::int64_t>(n + 1, k); j >= 1; --j) T[j] = (j * T[j] + T[j - 1]) / k;
  }
  // Now T holds n = k, i.e. S2(m + 1, k) for m = k - 1.
  long double sum = 0.0L, comp = 0.0L, max_abs = 0.0L;
  const long double peak = std::pow(static_cast<long double>(a * k), 1.0L / nu) / nu;
  constexpr int kMaxTerms = 6000;
  bool converged = false;
  for (std::int64_t m = k - 1; m < k - 1 + kMaxTerms; ++m) {
    if (m > k - 1) {
      for (std::int64_t j = k; j >= 1; --j) T[j] = (j * T[j] + T[j - 1]) / k;
    }
    if (T[k] == 0.0L) fail(ErrorCode::NonConvergence, "Stirling recurrence underflowed");
    const long double log_mag = lfact + (m + 1) * lk + std::log(T[k]) + m * la - std::lgamma(static_cast<long double>(nu) * m + 1.0L);
    const long double mag = std::exp(log_mag);
    const long double term = ((m - k + 1) % 2 == 0 ? 1.0L : -1.0L) * mag;
    const long double y = term - comp;
    const long double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
    max_abs = std::max(max_abs, mag);
    if (m > peak + k && mag < 1e-22L * max_abs) {
      converged = true;
      break;
    }
  }
  if (!converged) fail(ErrorCode::NonConvergence, "alternative series did not converge within its term budget");
  const long double roundoff = 16.0L * std::numeric_limits<long double>::epsilon() * max_abs;
  if (roundoff > 1e-11L && roundoff > 1e-9L * std::abs(sum))
    fail(ErrorCode::NonConvergence, "alternative series loses accuracy to cancellation (lambda t^nu too large)");
  return clamp_probability(static_cast<double>(sum), "alternative pmf series");
}

double mean_linear(double lambda, double nu, double t) {
  check_lambda(lambda);
  check_args(nu, t);
  if (t == 0.0) return 1.0;
  return mittag_leffler(nu, lambda * std::pow(t, nu));
}

double second_factorial_moment_linear(double lambda, double nu, double t) {
  check_lambda(lambda);
  check_args(nu, t);
  if (t == 0.0) return 0.0;
  const double a = lambda * std::pow(t, nu);
  const double v = 2.0 * mittag_leffler(nu, 2.0 * a) - 2.0 * mittag_leffler(nu, a);
  if (v < -1e-8) fail(ErrorCode::NumericalBreakdown, "second factorial moment negative beyond roundoff");
  return std::max(0.0, v);
}

double variance_linear(double lambda, double nu, double t) {
  check_lambda(lambda);
  check_args(nu, t);
  if (t == 0.0) return 0.0;
  const double a = lambda * std::pow(t, nu);
  const double m = mittag_leffler(nu, a);
  const double v = 2.0 * mittag_leffler(nu, 2.0 * a) - m - m * m;
  if (v < -1e-8) fail(ErrorCode::NumericalBreakdown, "variance negative beyond roundoff");
  return std::max(0.0, v);
}

IncrementProbability increment_probability(double lambda, double nu, std::int64_t n0, double dt) {
  check_lambda(lambda);
  check_args(nu, dt);
  if (!(dt > 0.0)) fail(ErrorCode::DomainError, "increment needs dt > 0");
  if (n0 < 1) fail(ErrorCode::DomainError, "initial population n0 must be at least 1");
  const double a = lambda * std::pow(dt, nu);
  const auto c0 = static_cast<long double>(n0);
  IncrementProbability out;
  out.asymptotic = static_cast<double>(c0 * a / std::tgamma(nu + 1.0));
  if ((c0 + 1.0L) * a <= 1.0L) {
    // Difference of the two series taken termwise, so the unit h = 0 terms cancel exactly.
    long double sum = 0.0L, p0 = 1.0L, p1 = 1.0L;
    const long double la = a;
    for (int h = 1; h < 400; ++h) {
      p0 *= -la * c0;
      p1 *= -la * (c0 + 1.0L);
      const long double term = (p0 - p1) * std::exp(-std::lgamma(static_cast<long double>(nu) * h + 1.0L));
      sum += term;
      if (std::abs(term) < 1e-22L * std::abs(sum)) break;
    }
    out.exact = static_cast<double>(c0 * sum);
  } else {
    out.exact = static_cast<double>(c0 * (static_cast<long double>(mittag_leffler(nu, -static_cast<double>(c0) * a)) -
                                          mittag_leffler(nu, -static_cast<double>(c0 + 1.0L) * a)));
  }
  return out;
}

double extreme_cdf(double F, double lambda, double nu, double t, ExtremeMode mode, const RandomTimeLaw& law) {
  check_lambda(lambda);
  check_args(nu, t);
  if (!(F >= 0.0 && F <= 1.0)) fail(ErrorCode::DomainError, "F must lie in [0, 1]");
  if (std::abs(law.nu - nu) > 1e-12 || std::abs(law.t - t) > 1e-12 * std::max(1.0, t))
    fail(ErrorCode::DomainError, "random-time law configured for different nu or t");
  const double q = mode == ExtremeMode::Max ? F : 1.0 - F;
  if (q == 0.0) return 0.0;
  if (q == 1.0) return 1.0;
  // Given the subordinated time s, N is geometric with success e^{-lambda s}: E q^N = q y / (1 - q (1 - y)).
  auto conditional = [&](double s) {
    const double y = std::exp(-lambda * s);
    return q * y / (1.0 - q * (-std::expm1(-lambda * s)));
  };
  if (law.structure == TimeStructure::Classical) return conditional(t);
  const double scale = std::pow(t, nu);
  const double s_max = scale * mwright_tail_bound(nu, 1e-10);
  quad::Options opt;
  opt.abs_tol = 1e-7;
  opt.rel_tol = 1e-9;
  const auto pts = quad::breakpoints(0.0, s_max, {0.5 * scale, scale, 2.0 * scale, 1.0 / lambda, 4.0 / lambda});
  return quad::integrate([&](double s) { return conditional(s) * density(law, s); }, std::span<const double>(pts), opt,
                         "extreme-value integral");
}

PmfTable pmf_table_linear(double lambda, double nu, double t, std::int64_t n0, const TablePolicy& policy) {
  check_lambda(lambda);
  check_args(nu, t);
  if (n0 < 1) fail(ErrorCode::DomainError, "initial population n0 must be at least 1");
  if (!(policy.tail_tol > 0.0 && policy.tail_tol < 1.0)) fail(ErrorCode::DomainError, "tail_tol must lie in (0, 1)");
  if (policy.k_max_hard < n0) fail(ErrorCode::DomainError, "k_max_hard must be at least n0");
  PmfTable table;
  table.nu = nu;
  table.t = t;
  table.n0 = n0;
  if (t == 0.0) {
    table.probs = {1.0};
    table.k_cut = n0;
    return table;
  }
  const double a = lambda * std::pow(t, nu);
  const auto grid = nu == 1.0 ? std::make_shared<const SubordinationGrid>(SubordinationGrid::build(1.0))
                              : SubordinationGrid::cached(nu, a * static_cast<double>(n0));
  // Per node: d_i(k) = W_i C(k-1, k-n0) y_i^{n0} x_i^{k-n0}, advanced by d_i x_i k / (k - n0 + 1).
  std::vector<double> d, x;
  d.reserve(grid->z.size());
  x.reserve(grid->z.size());
  for (std::size_t i = 0; i < grid->z.size(); ++i) {
    const double az = a * grid->z[i];
    const double di = grid->w[i] * std::exp(-static_cast<double>(n0) * az);
    const double xi = -std::expm1(-az);
    if (di > 0.0 || xi > 0.0) {
      d.push_back(di);
      x.push_back(xi);
    }
  }
  constexpr double kNegligible = 1e-300;
  long double mass = 0.0L, comp = 0.0L;
  for (std::int64_t k = n0;; ++k) {
    long double p = 0.0L;
    for (double v : d) p += v;
    const double pk = clamp_probability(static_cast<double>(p), "pmf table entry");
    table.probs.push_back(pk);
    const long double yv = pk - comp;
    const long double s = mass + yv;
    comp = (s - mass) - yv;
    mass = s;
    if (mass >= 1.0L - policy.tail_tol) {
      table.k_cut = k;
      break;
    }
    if (k >= policy.k_max_hard)
      fail(ErrorCode::TruncationFailure, "hard cap k=" + std::to_string(policy.k_max_hard) +
                                             " reached with tail mass " + std::to_string(static_cast<double>(1.0L - mass)));
    const double growth = static_cast<double>(k) / static_cast<double>(k - n0 + 1);
    std::size_t live = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double nd = d[i] * x[i] * growth;
      // Once a node's term is shrinking and negligible it stays negligible.
      if (nd < kNegligible && x[i] * growth < 1.0) continue;
      d[live] = nd;
      x[live] = x[i];
      ++live;
    }
    d.resize(live);
    x.resize(live);
  }
  table.tail_mass = static_cast<double>(1.0L - mass);
  return table;
}

PmfTable pmf_table_general(const RateSchedule& schedule, double nu, double t, const TablePolicy& policy) {
  check_args(nu, t);
  if (!(policy.tail_tol > 0.0 && policy.tail_tol < 1.0)) fail(ErrorCode::DomainError, "tail_tol must lie in (0, 1)");
  PmfTable table;
  table.nu = nu;
  table.t = t;
  table.n0 = 1;
  if (t == 0.0) {
    validate(schedule, 1);
    table.probs = {1.0};
    table.k_cut = 1;
    return table;
  }
  const auto limit = static_cast<std::int64_t>(std::min<std::size_t>(schedule.available(), static_cast<std::size_t>(policy.k_max_hard)));
  long double mass = 0.0L;
  for (std::int64_t k = 1;; ++k) {
    const double pk = pmf_general(schedule, nu, t, static_cast<std::size_t>(k));
    table.probs.push_back(pk);
    mass += pk;
    if (mass >= 1.0L - policy.tail_tol) {
      table.k_cut = k;
      break;
    }
    if (k >= limit)
      fail(ErrorCode::TruncationFailure, "rate prefix or hard cap reached at k=" + std::to_string(k) +
                                             " with tail mass " + std::to_string(static_cast<double>(1.0L - mass)));
  }
  table.tail_mass = static_cast<double>(1.0L - mass);
  return table;
}

double linear_tail_mean(double lambda, double nu, double t, std::int64_t K) {
  check_lambda(lambda);
  check_args(nu, t);
  if (K < 0) fail(ErrorCode::DomainError, "tail index must be non-negative");
  if (t == 0.0) return K >= 1 ? 0.0 : 1.0;
  const double a = lambda * std::pow(t, nu);
  // Conditionally geometric: E[N; N > K] = x^K (K + 1/y).
  auto conditional = [&](double az) {
    const double x = -std::expm1(-az);
    return std::exp(static_cast<double>(K) * std::log(x)) * (static_cast<double>(K) + std::exp(az));
  };
  if (nu == 1.0) return conditional(a);
  const auto grid = SubordinationGrid::cached(nu, a);
  long double sum = 0.0L;
  for (std::size_t i = 0; i < grid->z.size(); ++i) sum += grid->w[i] * conditional(a * grid->z[i]);
  return static_cast<double>(sum);
}

double linear_tail_probability(double lambda, double nu, double t, std::int64_t K) {
  check_lambda(lambda);
  check_args(nu, t);
  if (K < 0) fail(ErrorCode::DomainError, "tail index must be non-negative");
  if (t == 0.0) return K >= 1 ? 0.0 : 1.0;
  const double a = lambda * std::pow(t, nu);
  auto conditional = [&](double az) { return std::exp(static_cast<double>(K) * std::log(-std::expm1(-az))); };
  if (nu == 1.0) return conditional(a);
  const auto grid = SubordinationGrid::cached(nu, a);
  long double sum = 0.0L;
  for (std::size_t i = 0; i < grid->z.size(); ++i) sum += grid->w[i] * conditional(a * grid->z[i]);
  return static_cast<double>(sum);
}

double pgf_linear(double lambda, double nu, double t, double u) {
  check_lambda(lambda);
  check_args(nu, t);
  if (!(u >= 0.0 && u <= 1.0)) fail(ErrorCode::DomainError, "generating-function argument must lie in [0, 1]");
  if (t == 0.0 || u == 1.0) return u;
  const double a = lambda * std::pow(t, nu);
  const auto grid = nu == 1.0 ? std::make_shared<const SubordinationGrid>(SubordinationGrid::build(1.0))
                              : SubordinationGrid::cached(nu, a);
  std::vector<double> d, x;
  for (std::size_t i = 0; i < grid->z.size(); ++i) {
    const double az = a * grid->z[i];
    d.push_back(grid->w[i] * std::exp(-az));
    x.push_back(-std::expm1(-az));
  }
  long double g = 0.0L, mass = 0.0L, uk = 1.0L;
  for (std::int64_t k = 1; k <= 50'000'000; ++k) {
    long double p = 0.0L;
    for (std::size_t i = 0; i < d.size(); ++i) {
      p += d[i];
      d[i] *= x[i];
    }
    uk *= u;
    g += uk * p;
    mass += p;
    if (uk * u * std::max(0.0L, 1.0L - mass) < 1e-9L) return static_cast<double>(g);
  }
  fail(ErrorCode::TruncationFailure, "generating-function series did not reach its truncation level");
}

}  // namespace fracbirth
