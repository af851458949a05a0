#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fracbirth/analytic.hpp"
#include "fracbirth/error.hpp"
#include "fracbirth/simulation.hpp"
#include "fracbirth/verify.hpp"
#include "oracles.hpp"

using namespace fracbirth;

TEST_CASE("partial-fraction coefficients") {
  const auto s = RateSchedule::explicit_rates({1, 2, 3});
  const auto pf = partial_fraction_coeffs(s, 3);
  CHECK(pf.prefactor == 2.0);
  CHECK(pf.weights[0] == doctest::Approx(0.5));
  CHECK(pf.weights[1] == doctest::Approx(-1.0));
  CHECK(pf.weights[2] == doctest::Approx(0.5));
  CHECK(-(pf.weights[0] + pf.weights[1]) == doctest::Approx(1.0 / ((1.0 - 3.0) * (2.0 - 3.0))));
  const auto one = partial_fraction_coeffs(s, 1);
  CHECK(one.prefactor == 1.0);
  REQUIRE(one.weights.size() == 1);
  CHECK(one.weights[0] == 1.0);
}

TEST_CASE("row identity of the weights for k = 2..12") {
  const auto lin = RateSchedule::linear(1.3);
  for (std::size_t k = 2; k <= 12; ++k) {
    const auto pf = partial_fraction_coeffs(lin, k);
    double sum = 0.0, max_abs = 0.0;
    for (double w : pf.weights) {
      sum += w;
      max_abs = std::max(max_abs, std::abs(w));
    }
    CHECK(std::abs(sum) <= 1e-10 * max_abs);
    CHECK(verify_relation(lin, k).passed);
  }
}

TEST_CASE("general pmf: initial condition and classical reduction") {
  const auto s = RateSchedule::explicit_rates({1, 2, 3, 4, 5, 6, 7, 8, 9, 10.5});
  CHECK(pmf_general(s, 0.7, 0.0, 1) == 1.0);
  CHECK(pmf_general(s, 0.7, 0.0, 3) == 0.0);
  CHECK(std::abs(pmf_general(s, 1.0, 1.0, 2) - (std::exp(-1.0) - std::exp(-2.0))) < 1e-12);
  const std::vector<double> lam{1, 2, 3, 4, 5, 6, 7, 8, 9, 10.5};
  for (double t : {0.1, 1.0, 5.0}) {
    const auto ode = oracle::birth_ode(lam, t);
    for (std::size_t k = 1; k <= 10; ++k) CHECK(std::abs(pmf_general(s, 1.0, t, k) - ode[k - 1]) < 1e-10);
  }
}

TEST_CASE("general pmf against the fractional ODE") {
  const auto s = RateSchedule::explicit_rates({1, 2, 3, 4});
  const auto ode = solve_caputo_system(s, 0.5, 1.0, 3);
  CHECK(std::abs(pmf_general(s, 0.5, 1.0, 3) - ode[2]) < 1e-5);
}

TEST_CASE("general pmf breakdown and degeneracy") {
  // Nearly coincident rates are flagged; the value stays a probability but loses digits.
  const auto close = validate(RateSchedule::explicit_rates({1.0, 1.0 + 1e-9, 2.0}), 3);
  CHECK(close.degenerate());
  const double p = pmf_general(close, 0.5, 1.0, 3);
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
  CHECK(std::abs(p - pmf_general(RateSchedule::explicit_rates({1.0, 1.0 + 1e-4, 2.0}), 0.5, 1.0, 3)) < 1e-4);
  CHECK_THROWS_AS(pmf_general(RateSchedule::explicit_rates({1, 2}), 0.5, 1.0, 3), Error);
}

TEST_CASE("linear pmf examples") {
  CHECK(pmf_linear(1.0, 1.0, std::log(2.0), 2) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(pmf_linear(1.0, 0.5, 1.0, 1) - oracle::ml_half(-1.0)) < 1e-12);
  CHECK(std::abs(pmf_linear(1.0, 0.5, 1.0, 2) - (oracle::ml_half(-1.0) - oracle::ml_half(-2.0))) < 1e-12);
  CHECK(std::abs(pmf_linear(1.0, 0.5, 1.0, 2) - 0.1721878998) < 1e-9);
}

TEST_CASE("geometric reduction") {
  for (double lam : {0.5, 1.0, 2.0})
    for (double t : {0.1, 1.0, 5.0})
      for (int k = 1; k <= 50; ++k) {
        const double e = std::exp(-lam * t);
        CHECK(std::abs(pmf_linear(lam, 1.0, t, k) - std::pow(1.0 - e, k - 1) * e) < 1e-10);
      }
}

TEST_CASE("alternating sum, hybrid and general forms agree") {
  for (double nu : {0.3, 0.5, 0.7, 0.9})
    for (int k = 1; k <= 6; ++k) {
      const double hybrid = pmf_linear(1.0, nu, 0.6, k);
      const auto alt = pmf_linear_alternating(1.0, nu, 0.6, k);
      CHECK(std::abs(alt.value - hybrid) < 1e-10);
      CHECK(alt.condition >= 1.0);
      CHECK(std::abs(pmf_general(RateSchedule::linear(1.0), nu, 0.6, k) - hybrid) < 1e-9);
    }
}

TEST_CASE("alternating sum reports breakdown for large k") {
  try {
    pmf_linear_alternating(1.0, 0.5, 1.0, 60);
    FAIL("no breakdown reported");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NumericalBreakdown);
  }
  // The hybrid form stays usable there.
  const double p = pmf_linear(1.0, 0.5, 1.0, 60);
  CHECK(p > 0.0);
  CHECK(p < 1e-2);
}

TEST_CASE("alternative series") {
  for (int k = 1; k <= 6; ++k) CHECK(std::abs(pmf_linear_alt(1.0, 0.5, 0.25, k) - pmf_linear(1.0, 0.5, 0.25, k)) < 1e-8);
  CHECK(std::abs(pmf_linear_alt(1.0, 0.5, 0.25, 3) - pmf_linear(1.0, 0.5, 0.25, 3)) < 1e-8);
  CHECK(pmf_linear_alt(1.0, 1.0, 1e-6, 2) == doctest::Approx(1e-6).epsilon(1e-5));
  CHECK(verify_power_sum(2, 1).passed);
  CHECK(verify_power_sum(2, 1).lhs == 0.0);
  try {
    pmf_linear_alt(1.0, 0.5, 30.0, 12);
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonConvergence);
  }
}

TEST_CASE("n0 progenitors") {
  CHECK(pmf_linear_n0(1.0, 0.8, 0.7, 1, 3) == pmf_linear(1.0, 0.8, 0.7, 3));
  CHECK(pmf_linear_n0(1.0, 1.0, std::log(2.0), 2, 3) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(pmf_linear_n0(1.3, 0.6, 0.0, 5, 5) == 1.0);
  CHECK(pmf_linear_n0(1.3, 0.6, 0.0, 5, 6) == 0.0);
  // Alternating form against the subordination integral on a mid-size case.
  const auto grid = SubordinationGrid::build(0.6, 3.0);
  const double a = std::pow(0.7, 0.6);
  double ref = 0.0;
  for (std::size_t i = 0; i < grid.z.size(); ++i) {
    const double y = std::exp(-a * grid.z[i]);
    ref += grid.w[i] * 6.0 * y * y * y * (1.0 - y) * (1.0 - y);  // C(4, 2) y^3 (1 - y)^2
  }
  CHECK(std::abs(pmf_linear_n0(1.0, 0.6, 0.7, 3, 5) - ref) < 1e-10);
  const auto table = pmf_table_linear(1.0, 0.6, 0.7, 3);
  CHECK(table.n0 == 3);
  CHECK(table.sum() + table.tail_mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("moments") {
  CHECK(mean_linear(1.0, 1.0, 1.0) == doctest::Approx(std::numbers::e).epsilon(1e-14));
  CHECK(std::abs(mean_linear(1.0, 0.5, 1.0) - oracle::ml_half(1.0)) < 1e-12);
  CHECK(mean_linear(2.0, 0.9, 0.0) == 1.0);
  const double e = std::numbers::e;
  CHECK(std::abs(variance_linear(1.0, 1.0, 1.0) - e * (e - 1.0)) < 1e-9);
  CHECK(variance_linear(1.0, 0.4, 0.0) == 0.0);
  CHECK(second_factorial_moment_linear(1.0, 0.4, 0.0) == 0.0);
  CHECK(std::abs(second_factorial_moment_linear(1.0, 1.0, 1.0) - (2 * e * e - 2 * e)) < 1e-9);
  for (double nu : {0.3, 0.5, 0.8}) {
    const double m = mean_linear(1.2, nu, 0.9);
    const double v = variance_linear(1.2, nu, 0.9);
    CHECK(std::abs(v - (second_factorial_moment_linear(1.2, nu, 0.9) - m * m + m)) < 1e-12 * std::max(1.0, v));
  }
  double prev = 1e300;
  for (double nu : {0.5, 0.7, 0.9, 1.0}) {
    const double m = mean_linear(1.0, nu, 1.0);
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("variance against Monte Carlo") {
  SimulationConfig cfg;
  cfg.nu = 0.5;
  cfg.t = 1.0;
  cfg.runs = 100000;
  cfg.seed = 31;
  const auto r = summarize(simulate_many(cfg));
  // Standard error of the sample variance from the fourth central moment.
  double m4 = 0.0;
  for (const auto& [k, c] : r.empirical) m4 += c * std::pow(k - r.mean_hat, 4);
  m4 /= r.runs;
  const double se = std::sqrt((m4 - r.var_hat * r.var_hat) / r.runs);
  CHECK(std::abs(r.var_hat - variance_linear(1.0, 0.5, 1.0)) < 3.0 * se);
}

TEST_CASE("increment probability") {
  auto r = increment_probability(1.0, 0.5, 1, 1e-6);
  CHECK(r.exact / r.asymptotic >= 0.99);
  CHECK(r.exact / r.asymptotic <= 1.01);
  r = increment_probability(1.0, 1.0, 2, 1e-6);
  CHECK(r.asymptotic == doctest::Approx(2e-6));
  CHECK(r.exact == doctest::Approx(2.0 * (std::exp(-2e-6) - std::exp(-3e-6))).epsilon(1e-10));
  CHECK(increment_probability(1.0, 0.5, 3, 1e-6).asymptotic > increment_probability(1.0, 1.0, 3, 1e-6).asymptotic);
  const auto big = increment_probability(1.0, 0.5, 5, 0.5);
  CHECK(big.exact == doctest::Approx(5.0 * (mittag_leffler(0.5, -5.0 * std::sqrt(0.5)) - mittag_leffler(0.5, -6.0 * std::sqrt(0.5)))));
}

TEST_CASE("extremes") {
  const auto law1 = RandomTimeLaw::make(1.0, std::log(2.0));
  CHECK(extreme_cdf(1.0, 1.0, 1.0, std::log(2.0), ExtremeMode::Max, law1) == 1.0);
  CHECK(extreme_cdf(0.0, 1.0, 1.0, std::log(2.0), ExtremeMode::Max, law1) == 0.0);
  CHECK(extreme_cdf(0.5, 1.0, 1.0, std::log(2.0), ExtremeMode::Max, law1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(extreme_cdf(0.3, 1.0, 1.0, std::log(2.0), ExtremeMode::Min, law1) ==
        doctest::Approx(extreme_cdf(0.7, 1.0, 1.0, std::log(2.0), ExtremeMode::Max, law1)));

  const auto law = RandomTimeLaw::make(0.5, 1.0);
  const double analytic = extreme_cdf(0.5, 1.0, 0.5, 1.0, ExtremeMode::Max, law);
  const auto schedule = RateSchedule::linear(1.0);
  constexpr int runs = 100000;
  int hits = 0;
  for (int i = 0; i < runs; ++i) {
    CounterRng rng(4242, static_cast<std::uint64_t>(i));
    const auto n = simulate_fractional(schedule, law, 1, rng);
    bool below = true;
    for (std::int64_t j = 0; j < n && below; ++j) below = rng.uniform() < 0.5;
    hits += below;
  }
  const double p = static_cast<double>(hits) / runs;
  CHECK(std::abs(p - analytic) < 3.0 * std::sqrt(analytic * (1.0 - analytic) / runs));
  CHECK_THROWS_AS(extreme_cdf(0.5, 1.0, 0.7, 1.0, ExtremeMode::Max, law), Error);
}

TEST_CASE("pmf tables") {
  auto tb = pmf_table_linear(1.0, 1.0, 1.0);
  CHECK(tb.sum() >= 1.0 - 1e-6);
  CHECK(tb.sum() <= 1.0);
  CHECK(tb.sum() + tb.tail_mass == doctest::Approx(1.0).epsilon(1e-12));
  tb = pmf_table_linear(1.0, 0.5, 0.0, 4);
  CHECK(tb.probs.size() == 1);
  CHECK(tb.at(4) == 1.0);
  for (double nu : {0.3, 0.5, 0.7, 1.0}) {
    tb = pmf_table_linear(1.0, nu, 1.0);
    CHECK(tb.sum() >= 1.0 - 1e-6 - 1e-9);
    CHECK(tb.sum() <= 1.0 + 1e-9);
    CHECK(tb.tail_mass >= -1e-9);
    for (double p : tb.probs) CHECK(p >= 0.0);
    CHECK(std::abs(tb.tail_mass - linear_tail_probability(1.0, nu, 1.0, tb.k_cut)) < 1e-10);
  }
  tb = pmf_table_linear(1.0, 0.5, 1.0);
  CHECK(std::abs(tb.first_moment() + linear_tail_mean(1.0, 0.5, 1.0, tb.k_cut) - mean_linear(1.0, 0.5, 1.0)) < 1e-4);
  for (std::int64_t k : {1, 2, 5, 17}) CHECK(std::abs(tb.at(k) - pmf_linear(1.0, 0.5, 1.0, k)) < 1e-11);

  TablePolicy cap;
  cap.k_max_hard = 10000;
  try {
    pmf_table_linear(1.0, 0.3, 2.0, 1, cap);
    FAIL("cap not enforced");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruncationFailure);
  }
  const auto general = pmf_table_general(RateSchedule::explicit_rates({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16}), 1.0, 0.2);
  CHECK(general.sum() >= 1.0 - 1e-6);
  CHECK_THROWS_AS(pmf_table_general(RateSchedule::explicit_rates({1, 2}), 0.5, 5.0), Error);
}

TEST_CASE("generating function") {
  CHECK(pgf_linear(1.0, 1.0, std::log(2.0), 0.5) == doctest::Approx(0.25 / 0.75).epsilon(1e-9));
  CHECK(pgf_linear(1.0, 0.5, 1.0, 1.0) == 1.0);
  double direct = 0.0;
  for (int k = 1; k <= 60; ++k) direct += std::pow(0.4, k) * pmf_linear(1.0, 0.7, 1.5, k);
  CHECK(std::abs(pgf_linear(1.0, 0.7, 1.5, 0.4) - direct) < 1e-9);
}
