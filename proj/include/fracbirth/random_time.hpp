#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fracbirth/rng.hpp"

namespace fracbirth {

/// Which closed form (if any) represents the density of T_{2nu}(t).
enum class TimeStructure { Classical, HalfPower, OneThird, GeneralSeries };

/// Law of the random time T_{2nu}(t) = t^nu Z, where Z has the M-Wright density M_nu and
/// Laplace transform E exp(-mu T) = E_{nu,1}(-mu t^nu).
struct RandomTimeLaw {
  double nu = 1.0;
  double t = 1.0;
  TimeStructure structure = TimeStructure::Classical;
  int n = 0;  ///< nu = 2^{-n} for HalfPower

  /// Classifies nu (exact powers of 1/2, 1/3 within 1e-12, nu = 1) and checks t > 0.
  static RandomTimeLaw make(double nu, double t);

  /// Name of the representation used by density(): "point-mass", "folded-gaussian",
  /// "iterated-bm n=<n>", "airy", "mwright-series".
  std::string representation() const;
};

/// Density of T_{2nu}(t) at s >= 0. Classical laws have none (DomainError "degenerate point mass").
double density(const RandomTimeLaw& law, double s);

/// Exact draw: t for nu = 1, otherwise (t / S)^nu with S standard positive nu-stable.
double sample(const RandomTimeLaw& law, CounterRng& rng);

/// Folded (n-1)-times iterated Brownian motion density, i.e. T at nu = 2^{-n}, by nested
/// adaptive quadrature. n = 1 is the folded Gaussian itself.
double density_iterated_bm(int n, double s, double t);

/// M-Wright density M_nu(z), z >= 0, nu in (0, 1): density of Z = T / t^nu.
/// Uses the power series while it is well conditioned and Kanter's integral otherwise.
double mwright_density(double nu, double z);
double mwright_series(double nu, double z);   ///< NonConvergence when cancellation is too severe
double mwright_kanter(double nu, double z);

/// z such that P(Z > z) < tail (conservative, from the stretched-exponential decay of M_nu).
double mwright_tail_bound(double nu, double tail);

/// Mean and standard deviation of Z.
double mwright_mean(double nu);
double mwright_sd(double nu);

/// Quadrature rule for expectations E g(Z): composite 15-point Gauss-Legendre on [0, z_max],
/// weights already multiplied by M_nu. For nu = 1 a single node z = 1 with weight 1.
struct SubordinationGrid {
  double nu = 1.0;
  std::vector<double> z;
  std::vector<double> w;

  /// rate_scale bounds the largest exponential rate a in integrands exp(-a z) so that
  /// panels resolve them; tail is the neglected probability mass beyond z_max.
  static SubordinationGrid build(double nu, double rate_scale = 1.0, double tail = 1e-17);

  /// Per-thread memoized build with rate_scale rounded up to a power of two.
  static std::shared_ptr<const SubordinationGrid> cached(double nu, double rate_scale = 1.0);

  double total_weight() const;
};

}  // namespace fracbirth
