#pragma once

#include "fracbirth/rng.hpp"

namespace fracbirth {

/// Evaluation policy for E_{nu,1}.
struct MlEvalConfig {
  double series_threshold = 5.0;  ///< |x| at or below which the power series is tried first
  double abs_tol = 1e-10;
  int max_terms = 2000;

  void validate() const;
};

/// One-parameter Mittag-Leffler function E_{nu,1}(x) = sum_h x^h / Gamma(nu h + 1), nu in (0, 1].
///
/// Small arguments go through the power series (extended precision, compensated);
/// larger or badly cancelling negative arguments use the spectral integral
///   E(-y) = sin(nu pi)/(nu pi) * int_0^inf exp(-(y w)^{1/nu}) / (w^2 + 2 w cos(nu pi) + 1) dw,
/// and large positive arguments the companion formula with the exp(x^{1/nu})/nu pole term.
/// Throws DomainError for nu outside (0, 1] or non-finite x, NonConvergence when the
/// selected method misses abs_tol or the value overflows.
double mittag_leffler(double nu, double x, const MlEvalConfig& cfg = {});

/// Power-series route alone. Throws NonConvergence when the term budget is exhausted or
/// when cancellation among terms would exceed abs_tol.
double mittag_leffler_series(double nu, double x, const MlEvalConfig& cfg = {});

/// Integral-representation route alone (nu < 1, x != 0).
double mittag_leffler_integral(double nu, double x, const MlEvalConfig& cfg = {});

/// Airy function Ai(x): Maclaurin series for |x| <= 8, asymptotic expansions beyond.
double airy_ai(double x);

/// sin(pi x) with exact zeros at the integers.
double sin_pi(double x);

/// 1/Gamma(x), zero at the non-positive integers.
double rgamma(double x);

/// log of Kanter's function A(pi u) for nu in (0, 1), u in (0, 1):
///   A(phi) = sin(nu phi)^{nu/(1-nu)} sin((1-nu) phi) / sin(phi)^{1/(1-nu)}.
double kanter_log_a(double nu, double u);

/// One draw of the standard one-sided nu-stable law, E exp(-mu S) = exp(-mu^nu),
/// via Kanter's representation S = (A(pi U) / E)^{(1-nu)/nu}.
double stable_positive_sample(double nu, CounterRng& rng);

/// log S for the same draw; avoids overflow for small nu.
double log_stable_positive_sample(double nu, CounterRng& rng);

}  // namespace fracbirth
