#include "fracbirth/random_time.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "fracbirth/error.hpp"
#include "fracbirth/quadrature.hpp"
#include "fracbirth/special_functions.hpp"

namespace fracbirth {

namespace {

constexpr double kPi = std::numbers::pi;

bool near(double a, double b) { return std::abs(a - b) <= 1e-12; }

void check_open_nu(double nu) {
  if (!(nu > 0.0 && nu < 1.0)) fail(ErrorCode::DomainError, "M-Wright order must lie in (0, 1), got " + std::to_string(nu));
}

double folded_gaussian(double s, double t) { return std::exp(-s * s / (4.0 * t)) / std::sqrt(kPi * t); }

// Level n of the iterated construction: density of T at nu = 2^{-n}, time t.
double half_power_level(int n, double s, double t, double abs_tol) {
  if (n == 1) return folded_gaussian(s, t);
  // T_{nu/2}(t) is the nu = 1/2 law run for the random time T_nu(t); substitute w = v^2.
  const double inner_nu = std::ldexp(1.0, -(n - 1));
  const double scale = std::sqrt(std::pow(t, inner_nu));
  const double v_max = scale * std::sqrt(mwright_tail_bound(inner_nu, 1e-14));
  const double coef = 2.0 / std::sqrt(kPi);
  auto integrand = [&](double v) {
    const double g = s > 0.0 ? std::exp(-s * s / (4.0 * v * v)) : 1.0;
    if (g == 0.0) return 0.0;
    return coef * g * half_power_level(n - 1, v * v, t, abs_tol * 0.1);
  };
  quad::Options opt;
  opt.abs_tol = abs_tol;
  opt.rel_tol = 1e-10;
  const auto pts = quad::breakpoints(0.0, v_max, {0.25 * s, 0.5 * s, s, 2.0 * s, 0.5 * scale, scale, 2.0 * scale});
  return quad::integrate(integrand, std::span<const double>(pts), opt, "iterated Brownian motion density");
}

}  // namespace

RandomTimeLaw RandomTimeLaw::make(double nu, double t) {
  if (!(nu > 0.0 && nu <= 1.0)) fail(ErrorCode::DomainError, "order nu must lie in (0, 1], got " + std::to_string(nu));
  if (!(t > 0.0) || !std::isfinite(t)) fail(ErrorCode::DomainError, "random time needs t > 0");
  RandomTimeLaw law;
  law.nu = nu;
  law.t = t;
  if (nu == 1.0) {
    law.structure = TimeStructure::Classical;
    return law;
  }
  for (int n = 1; n <= 30; ++n) {
    if (near(nu, std::ldexp(1.0, -n))) {
      law.structure = TimeStructure::HalfPower;
      law.n = n;
      law.nu = std::ldexp(1.0, -n);
      return law;
    }
  }
  if (near(nu, 1.0 / 3.0)) {
    law.structure = TimeStructure::OneThird;
    law.nu = 1.0 / 3.0;
    return law;
  }
  law.structure = TimeStructure::GeneralSeries;
  return law;
}

std::string RandomTimeLaw::representation() const {
  switch (structure) {
    case TimeStructure::Classical: return "point-mass";
    case TimeStructure::HalfPower: return n == 1 ? "folded-gaussian" : "iterated-bm n=" + std::to_string(n);
    case TimeStructure::OneThird: return "airy";
    case TimeStructure::GeneralSeries: return "mwright-series";
  }
  return "unknown";
}

double density(const RandomTimeLaw& law, double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) fail(ErrorCode::DomainError, "density argument must be finite and non-negative");
  switch (law.structure) {
    case TimeStructure::Classical:
      fail(ErrorCode::DomainError, "nu = 1 gives a degenerate point mass at t; no density exists");
    case TimeStructure::HalfPower:
      return law.n == 1 ? folded_gaussian(s, law.t) : half_power_level(law.n, s, law.t, 1e-10);
    case TimeStructure::OneThird: {
      const double c = std::cbrt(3.0 * law.t);
      return 3.0 / c * airy_ai(s / c);
    }
    case TimeStructure::GeneralSeries: {
      const double scale = std::pow(law.t, law.nu);
      return mwright_density(law.nu, s / scale) / scale;
    }
  }
  return 0.0;
}

double sample(const RandomTimeLaw& law, CounterRng& rng) {
  if (law.structure == TimeStructure::Classical) return law.t;
  const double log_s = log_stable_positive_sample(law.nu, rng);
  return std::exp(law.nu * (std::log(law.t) - log_s));
}

double density_iterated_bm(int n, double s, double t) {
  if (n < 1) fail(ErrorCode::DomainError, "iterated Brownian motion level must be at least 1");
  if (!(t > 0.0)) fail(ErrorCode::DomainError, "iterated Brownian motion density needs t > 0");
  if (!(s >= 0.0) || !std::isfinite(s)) fail(ErrorCode::DomainError, "density argument must be finite and non-negative");
  return half_power_level(n, s, t, 1e-10);
}

double mwright_series(double nu, double z) {
  check_open_nu(nu);
  if (!(z >= 0.0)) fail(ErrorCode::DomainError, "M-Wright argument must be non-negative");
  if (z == 0.0) return rgamma(1.0 - nu);
  // M(z) = (1/pi) sum_k (-z)^k Gamma(nu (k+1)) sin(pi nu (k+1)) / k!
  const long double lz = std::log(static_cast<long double>(z));
  long double sum = 0.0L, comp = 0.0L, max_abs = 0.0L;
  const long double lnu = nu;
  int k = 0;
  for (; k < 20000; ++k) {
    const long double log_mag = k * lz + std::lgamma(lnu * (k + 1)) - std::lgamma(k + 1.0L);
    const long double mag = std::exp(log_mag);
    const double sn = sin_pi(nu * (k + 1));
    const long double term = (k % 2 == 0 ? 1.0L : -1.0L) * sn * mag;
    const long double y = term - comp;
    const long double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
    max_abs = std::max(max_abs, mag);
    if (k > 4 && mag < 1e-24L * max_abs && mag < 1e-20L * std::abs(sum)) break;
    if (k > 4 && mag == 0.0L) break;
  }
  if (k >= 20000) fail(ErrorCode::NonConvergence, "M-Wright series did not converge");
  const long double value = sum / static_cast<long double>(kPi);
  const long double roundoff = 8.0L * std::numeric_limits<long double>::epsilon() * max_abs * std::sqrt(k + 1.0L);
  if (roundoff > 1e-12L * std::abs(value) && roundoff > 1e-17L)
    fail(ErrorCode::NonConvergence, "M-Wright series too ill-conditioned at z = " + std::to_string(z));
  return std::max(0.0, static_cast<double>(value));
}

double mwright_kanter(double nu, double z) {
  check_open_nu(nu);
  if (!(z > 0.0)) fail(ErrorCode::DomainError, "Kanter representation needs z > 0");
  // Z = (E / A(pi U))^{1-nu} gives f(z) = c z^{nu c} int_0^1 A exp(-A z^c) du with c = 1/(1-nu).
  const double c = 1.0 / (1.0 - nu);
  const double lz = std::log(z);
  auto integrand = [&](double u) {
    const double la = kanter_log_a(nu, u);
    const double x = la + c * lz;
    if (x > 700.0) return 0.0;
    return std::exp(la + nu * c * lz - std::exp(x));
  };
  quad::Options opt;
  opt.abs_tol = 1e-16;
  opt.rel_tol = 1e-11;
  const auto pts = quad::breakpoints(0.0, 1.0, {0.5, 0.75, 0.9, 0.97, 0.99, 0.999});
  const auto r = quad::gauss_kronrod(integrand, std::span<const double>(pts), opt);
  if (!r.converged && r.abs_error > 1e-13)
    fail(ErrorCode::QuadratureFailure, "Kanter integral for the M-Wright density did not converge");
  return c * r.value;
}

double mwright_density(double nu, double z) {
  check_open_nu(nu);
  if (!(z >= 0.0) || !std::isfinite(z)) fail(ErrorCode::DomainError, "M-Wright argument must be finite and non-negative");
  if (near(nu, 0.5)) return std::exp(-0.25 * z * z) / std::sqrt(kPi);
  if (near(nu, 1.0 / 3.0)) return std::pow(3.0, 2.0 / 3.0) * airy_ai(z / std::cbrt(3.0));
  if (z == 0.0) return rgamma(1.0 - nu);
  try {
    return mwright_series(nu, z);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonConvergence) throw;
  }
  return mwright_kanter(nu, z);
}

double mwright_tail_bound(double nu, double tail) {
  if (nu == 1.0) return 1.0;
  check_open_nu(nu);
  if (!(tail > 0.0 && tail < 1.0)) fail(ErrorCode::DomainError, "tail probability must lie in (0, 1)");
  // M_nu(z) decays like exp(-B z^{1/(1-nu)}), B = (1-nu) nu^{nu/(1-nu)}.
  const double b = (1.0 - nu) * std::pow(nu, nu / (1.0 - nu));
  const double level = -std::log(tail) + 10.0;
  return std::pow(level / b, 1.0 - nu);
}

double mwright_mean(double nu) { return 1.0 / std::tgamma(1.0 + nu); }

double mwright_sd(double nu) {
  const double m = mwright_mean(nu);
  return std::sqrt(std::max(0.0, 2.0 / std::tgamma(1.0 + 2.0 * nu) - m * m));
}

SubordinationGrid SubordinationGrid::build(double nu, double rate_scale, double tail) {
  if (!(nu > 0.0 && nu <= 1.0)) fail(ErrorCode::DomainError, "order nu must lie in (0, 1]");
  SubordinationGrid g;
  g.nu = nu;
  if (nu == 1.0) {
    g.z = {1.0};
    g.w = {1.0};
    return g;
  }
  using Rule = boost::math::quadrature::gauss<double, 15>;
  const double z_max = mwright_tail_bound(nu, tail);
  const double h0 = std::min({0.5, 0.5 / std::max(rate_scale, 1e-12), 0.5 * mwright_sd(nu)});
  const auto panels = static_cast<std::size_t>(std::ceil(z_max / h0));
  const double h = z_max / static_cast<double>(panels);
  const auto& x = Rule::abscissa();
  const auto& wt = Rule::weights();
  g.z.reserve(panels * 15);
  g.w.reserve(panels * 15);
  for (std::size_t p = 0; p < panels; ++p) {
    const double center = (static_cast<double>(p) + 0.5) * h;
    const double half = 0.5 * h;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const int copies = x[j] == 0.0 ? 1 : 2;
      for (int sgn = 0; sgn < copies; ++sgn) {
        const double zz = center + (sgn == 0 ? half : -half) * x[j];
        const double ww = half * wt[j] * mwright_density(nu, zz);
        if (ww > 0.0) {
          g.z.push_back(zz);
          g.w.push_back(ww);
        }
      }
    }
  }
  return g;
}

std::shared_ptr<const SubordinationGrid> SubordinationGrid::cached(double nu, double rate_scale) {
  struct Entry {
    double nu;
    double scale;
    std::shared_ptr<const SubordinationGrid> grid;
  };
  thread_local std::vector<Entry> cache;
  const double scale = std::exp2(std::ceil(std::log2(std::max(rate_scale, 1.0))));
  for (auto it = cache.begin(); it != cache.end(); ++it) {
    if (it->nu == nu && it->scale == scale) {
      auto hit = *it;
      cache.erase(it);
      cache.push_back(hit);
      return hit.grid;
    }
  }
  auto grid = std::make_shared<const SubordinationGrid>(build(nu, scale));
  if (cache.size() >= 8) cache.erase(cache.begin());
  cache.push_back({nu, scale, grid});
  return grid;
}

double SubordinationGrid::total_weight() const {
  long double s = 0.0L;
  for (double v : w) s += v;
  return static_cast<double>(s);
}

}  // namespace fracbirth
