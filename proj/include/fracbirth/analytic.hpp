#pragma once

#include <cstdint>
#include <vector>

#include "fracbirth/random_time.hpp"
#include "fracbirth/rates.hpp"
#include "fracbirth/special_functions.hpp"

namespace fracbirth {

/// Truncated pmf {k -> p_k}, k = n0..k_cut, stored densely from n0.
struct PmfTable {
  double nu = 1.0;
  double t = 0.0;
  std::int64_t n0 = 1;
  std::vector<double> probs;  ///< probs[i] = p_{n0 + i}
  double tail_mass = 0.0;     ///< 1 - sum(probs)
  std::int64_t k_cut = 1;

  /// p_k, zero outside [n0, k_cut].
  double at(std::int64_t k) const;
  double sum() const;
  /// sum_k k p_k over the stored entries.
  double first_moment() const;
};

struct TablePolicy {
  double tail_tol = 1e-6;
  std::int64_t k_max_hard = 2'000'000;
};

/// Partial fractions over the rates: weights_m = 1/prod_{l != m}(lambda_l - lambda_m), prefactor = prod_{j<k} lambda_j.
struct PartialFractionCoeffs {
  std::size_t k = 1;
  double prefactor = 1.0;
  std::vector<double> weights;
};

PartialFractionCoeffs partial_fraction_coeffs(const RateSchedule& schedule, std::size_t k);

/// p_k(t) for a general schedule as a Mittag-Leffler mixture over the partial fractions.
/// Values within 1e-9 outside [0, 1] are clamped; further out NumericalBreakdown.
double pmf_general(const RateSchedule& schedule, double nu, double t, std::size_t k, const MlEvalConfig& cfg = {});

/// Value of the alternating binomial sum together with sum|terms| / |sum|.
struct AlternatingSum {
  double value = 0.0;
  double condition = 1.0;
};

/// Linear (Yule-Furry) pmf with one progenitor. Uses the compensated alternating sum when its
/// error estimate is small and the subordination integral against M_nu otherwise; nu = 1 is
/// the geometric law.
double pmf_linear(double lambda, double nu, double t, std::int64_t k);

/// The alternating sum alone; NumericalBreakdown when the condition estimate exceeds 1e12.
AlternatingSum pmf_linear_alternating(double lambda, double nu, double t, std::int64_t k);

/// Power-series form in lambda t^nu, inner sums via Stirling numbers of the second kind.
/// NonConvergence when cancellation or the term budget make the result unreliable.
double pmf_linear_alt(double lambda, double nu, double t, std::int64_t k);

/// Linear pmf started from n0 progenitors (negative binomial for nu = 1).
double pmf_linear_n0(double lambda, double nu, double t, std::int64_t n0, std::int64_t k);

double mean_linear(double lambda, double nu, double t);
double variance_linear(double lambda, double nu, double t);
double second_factorial_moment_linear(double lambda, double nu, double t);

struct IncrementProbability {
  double exact = 0.0;
  double asymptotic = 0.0;
};

/// Probability of a birth in [0, dt] from n0 individuals and its small-dt equivalent.
IncrementProbability increment_probability(double lambda, double nu, std::int64_t n0, double dt);

enum class ExtremeMode { Max, Min };

/// Max: P(max of N_nu(t) iid marks <= x) given F = F(x).
/// Min: P(min of the marks > x), i.e. the same integral with F replaced by 1 - F.
double extreme_cdf(double F, double lambda, double nu, double t, ExtremeMode mode, const RandomTimeLaw& law);

/// Table of the linear pmf from n0 progenitors, truncated at the first k with mass >= 1 - tail_tol.
PmfTable pmf_table_linear(double lambda, double nu, double t, std::int64_t n0 = 1, const TablePolicy& policy = {});

/// Table of the general-rate pmf (n0 = 1).
PmfTable pmf_table_general(const RateSchedule& schedule, double nu, double t, const TablePolicy& policy = {});

/// E[N; N > K] for the linear process with one progenitor.
double linear_tail_mean(double lambda, double nu, double t, std::int64_t K);

/// P(N > K) for the linear process with one progenitor, from the conditional geometric tail.
double linear_tail_probability(double lambda, double nu, double t, std::int64_t K);

/// Generating function G(t, u) = sum_k u^k p_k, summed until u^{k+1} P(N > k) < 1e-9.
double pgf_linear(double lambda, double nu, double t, double u);

}  // namespace fracbirth
