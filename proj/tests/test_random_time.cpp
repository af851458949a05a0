#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "fracbirth/error.hpp"
#include "fracbirth/quadrature.hpp"
#include "fracbirth/random_time.hpp"
#include "fracbirth/special_functions.hpp"
#include "fracbirth/stats.hpp"

using namespace fracbirth;

namespace {

double integrate_density(const RandomTimeLaw& law) {
  const double upper = std::pow(law.t, law.nu) * mwright_tail_bound(law.nu, 1e-14);
  auto f = [&](double s) { return density(law, s); };
  const auto pts = quad::breakpoints(0.0, upper, {0.01 * upper, 0.1 * upper});
  return quad::integrate(f, pts, {1e-11, 1e-11, 4000}, "density mass");
}

}  // namespace

TEST_CASE("classification") {
  CHECK(RandomTimeLaw::make(1.0, 2.0).representation() == "point-mass");
  CHECK(RandomTimeLaw::make(0.5, 2.0).representation() == "folded-gaussian");
  CHECK(RandomTimeLaw::make(0.25, 2.0).representation() == "iterated-bm n=2");
  CHECK(RandomTimeLaw::make(0.125, 2.0).representation() == "iterated-bm n=3");
  CHECK(RandomTimeLaw::make(1.0 / 3.0, 2.0).representation() == "airy");
  CHECK(RandomTimeLaw::make(0.7, 2.0).representation() == "mwright-series");
  CHECK_THROWS_AS(RandomTimeLaw::make(0.5, 0.0), Error);
  CHECK_THROWS_AS(RandomTimeLaw::make(1.2, 1.0), Error);
}

TEST_CASE("folded Gaussian case") {
  const auto law = RandomTimeLaw::make(0.5, 1.0);
  CHECK(density(law, 0.0) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
  CHECK(density(law, 0.0) == doctest::Approx(0.564190).epsilon(1e-6));
  for (double s : {0.1, 0.7, 2.0}) CHECK(density(law, s) == doctest::Approx(std::exp(-s * s / 4.0) / std::sqrt(std::numbers::pi)));
  CHECK(integrate_density(law) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(density(RandomTimeLaw::make(1.0, 1.0), 1.0), Error);
  CHECK_THROWS_AS(density(law, -1.0), Error);
}

TEST_CASE("Airy case agrees with the series") {
  const auto law = RandomTimeLaw::make(1.0 / 3.0, 1.0);
  for (double s = 0.1; s <= 3.0 + 1e-12; s += 0.1) CHECK(std::abs(density(law, s) - mwright_series(1.0 / 3.0, s)) < 1e-5);
  CHECK(integrate_density(law) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("iterated Brownian motion case") {
  const auto law = RandomTimeLaw::make(0.25, 1.0);
  for (double s : {0.05, 0.3, 1.0, 2.5}) CHECK(std::abs(density(law, s) - mwright_series(0.25, s)) < 1e-6);
  for (double s : {0.2, 1.0}) CHECK(density_iterated_bm(1, s, 1.0) == doctest::Approx(density(RandomTimeLaw::make(0.5, 1.0), s)));
  CHECK(integrate_density(RandomTimeLaw::make(0.25, 0.8)) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("series and Kanter forms of M-Wright agree") {
  for (double nu : {0.2, 0.4, 0.6, 0.8})
    for (double z : {0.05, 0.5, 1.0, 2.0}) CHECK(std::abs(mwright_series(nu, z) - mwright_kanter(nu, z)) < 1e-9);
  CHECK(mwright_density(0.5, 0.0) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)));
  CHECK(mwright_mean(0.5) == doctest::Approx(2.0 / std::sqrt(std::numbers::pi)));
  CHECK(mwright_sd(0.5) == doctest::Approx(std::sqrt(2.0 - 4.0 / std::numbers::pi)));
}

TEST_CASE("Laplace transform of the density is the Mittag-Leffler function") {
  for (double nu : {0.25, 1.0 / 3.0, 0.5, 0.7})
    for (double mu : {0.5, 1.0, 3.0}) {
      const auto law = RandomTimeLaw::make(nu, 1.3);
      const double upper = std::pow(law.t, nu) * mwright_tail_bound(nu, 1e-14);
      auto f = [&](double s) { return std::exp(-mu * s) * density(law, s); };
      const auto pts = quad::breakpoints(0.0, upper, {0.01 * upper, 0.1 * upper});
      const double lhs = quad::integrate(f, pts, {1e-10, 1e-10, 4000}, "laplace");
      CHECK(std::abs(lhs - mittag_leffler(nu, -mu * std::pow(1.3, nu))) < 1e-7);
    }
}

TEST_CASE("grid reproduces moments") {
  for (double nu : {0.3, 0.5, 0.7}) {
    const auto g = SubordinationGrid::build(nu);
    CHECK(g.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    double m = 0.0, lap = 0.0;
    for (std::size_t i = 0; i < g.z.size(); ++i) {
      m += g.w[i] * g.z[i];
      lap += g.w[i] * std::exp(-2.0 * g.z[i]);
    }
    CHECK(m == doctest::Approx(mwright_mean(nu)).epsilon(1e-12));
    CHECK(std::abs(lap - mittag_leffler(nu, -2.0)) < 1e-12);
  }
  const auto one = SubordinationGrid::build(1.0);
  CHECK(one.z.size() == 1);
  CHECK(SubordinationGrid::cached(0.5).get() == SubordinationGrid::cached(0.5).get());
}

TEST_CASE("sampling") {
  CounterRng rng(3);
  CHECK(sample(RandomTimeLaw::make(1.0, 2.5), rng) == 2.5);

  // Folded Gaussian at nu = 1/2, t = 1: |B(2)|.
  std::vector<double> xs;
  const auto half = RandomTimeLaw::make(0.5, 1.0);
  for (int i = 0; i < 20000; ++i) xs.push_back(sample(half, rng));
  const boost::math::normal_distribution<> normal(0.0, std::sqrt(2.0));
  const double d = ks_statistic(xs, [&](double s) { return 2.0 * boost::math::cdf(normal, s) - 1.0; });
  CHECK(ks_p_value(d, xs.size()) > 1e-3);

  // Monte Carlo Laplace functional at nu = 0.7.
  const auto law = RandomTimeLaw::make(0.7, 1.0);
  constexpr int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = std::exp(-sample(law, rng));
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - mittag_leffler(0.7, -1.0)) < 4.0 * se);
}

TEST_CASE("samples follow the series density") {
  const auto law = RandomTimeLaw::make(0.7, 1.0);
  CounterRng rng(11, 2);
  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i) xs.push_back(sample(law, rng));
  auto cdf = [&](double s) {
    if (s <= 0.0) return 0.0;
    return quad::integrate([&](double x) { return density(law, x); }, 0.0, s, {1e-10, 1e-10, 2000}, "cdf");
  };
  // Chi-square over fixed cells [0, 0.2), [0.2, 0.4), ..., [3, inf).
  std::vector<double> edges;
  for (int j = 0; j <= 15; ++j) edges.push_back(0.2 * j);
  std::vector<double> probs;
  double prev = 0.0;
  for (std::size_t j = 1; j < edges.size(); ++j) {
    const double c = cdf(edges[j]);
    probs.push_back(c - prev);
    prev = c;
  }
  probs.push_back(1.0 - prev);
  std::vector<int> counts(probs.size(), 0);
  for (double x : xs) counts[std::upper_bound(edges.begin() + 1, edges.end(), x) - edges.begin() - 1]++;
  double chi = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double e = probs[j] * xs.size();
    chi += (counts[j] - e) * (counts[j] - e) / e;
  }
  CHECK(chi_square_p_value(chi, static_cast<int>(probs.size()) - 1) > 1e-3);
}
