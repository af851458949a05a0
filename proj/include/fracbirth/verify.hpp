#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracbirth/rates.hpp"

namespace fracbirth {

struct IdentityReport {
  std::string identity_name;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double tol = 0.0;
  bool passed = false;
};

IdentityReport make_report(std::string name, double lhs, double rhs, double tol);

/// int_0^inf e^{-mu t} f(t) dt for |f(t)| <= bound e^{growth t}, growth < mu. The range is cut at
/// T* where the neglected tail bound e^{-(mu - growth) T*} bound / (mu - growth) is below tol / 10.
double laplace_numeric(const std::function<double(double)>& f, double mu, double tol, double bound = 1.0,
                       double growth = 0.0);

/// Transform of the linear pmf against mu^{nu-1} sum_j C(k-1, j-1) (-1)^{j-1} / (mu^nu + j lambda).
IdentityReport verify_pmf_laplace(double lambda, double nu, std::int64_t k, double mu, double tol = 1e-5);

/// Right side of the generating-function transform identity,
/// (u mu^{nu-1} / lambda) int_0^1 (1-x)^{mu^nu / lambda} / (1 - x u) dx, for u in [0, 1].
double pgf_laplace_rhs(double lambda, double nu, double u, double mu);

/// d/du of the right side at u = 1 by quadrature (requires mu^nu > lambda).
double pgf_laplace_rhs_derivative_at_one(double lambda, double nu, double mu);

/// Transform of G(t, u) = sum_k u^k p_k(t) against pgf_laplace_rhs. DomainError unless 0 < u < 1.
IdentityReport verify_pgf_laplace(double lambda, double nu, double u, double mu, double tol = 1e-5);

/// Right side at u = 1 against 1/mu.
IdentityReport verify_pgf_limit(double lambda, double nu, double mu, double tol = 1e-5);

/// Derivative of the right side at u = 1 against mu^{nu-1} / (mu^nu - lambda).
IdentityReport verify_pgf_derivative(double lambda, double nu, double mu, double tol = 1e-5);

/// Transform of the mean E_{nu,1}(lambda t^nu) against mu^{nu-1} / (mu^nu - lambda).
IdentityReport verify_mean_laplace(double lambda, double nu, double mu, double tol = 1e-5);

/// Numerical solution p_1..p_{k_max} at time t of the Caputo system
///   D^nu p_k = -lambda_k p_k + lambda_{k-1} p_{k-1},  p_k(0) = [k = 1],
/// by the implicit L1 scheme on `steps`, 2 `steps` and 4 `steps` uniform intervals followed by
/// Richardson extrapolation at the empirically observed order.
std::vector<double> solve_caputo_system(const RateSchedule& schedule, double nu, double t, std::size_t k_max,
                                        std::size_t steps = 800);

/// L1 Caputo derivative at t of s -> pmf_general(s) on step h_grid, compared with the right side
/// of the governing equation. The tolerance is C h^{min(1, 2 - nu)} with C taken from the k = 1
/// residual at the same step.
IdentityReport caputo_residual(const RateSchedule& schedule, double nu, double t, std::size_t k, double h_grid);

/// pmf_general against the extrapolated ODE solution.
IdentityReport verify_general_vs_ode(const RateSchedule& schedule, double nu, double t, std::size_t k, double tol = 1e-5);

/// -sum_{m<k} weights_m against 1/prod_{l<k}(lambda_l - lambda_k), relative tolerance 1e-9.
IdentityReport verify_relation(const RateSchedule& schedule, std::size_t k);

/// sum_{j=0}^{n} C(n, j) (-1)^j / (x + j) against n! / (x (x+1) ... (x+n)).
IdentityReport verify_kirschenhofer(double x, int n);

/// sum_{j=0}^{big_n} C(big_n, j) (-1)^j (j+1)^n: zero for n < big_n, (-1)^N N! for n = big_n.
IdentityReport verify_power_sum(int big_n, int n);

/// Sum of the tail-complete table plus an independently computed tail P(N > k_cut) against 1.
IdentityReport verify_normalization(double lambda, double nu, double t, double tail_tol = 1e-6);

struct SuiteConfig {
  std::vector<double> nus{0.3, 0.5, 0.7, 1.0};
  double lambda = 1.0;
  std::vector<double> ts{0.5, 1.0, 2.0};
  std::vector<double> mus{0.5, 1.0, 2.0};
  std::vector<double> us{0.25, 0.5, 0.9};
  std::vector<std::int64_t> ks{1, 2, 3, 5};
};

std::vector<IdentityReport> run_identity_suite(const SuiteConfig& config = {});

}  // namespace fracbirth
