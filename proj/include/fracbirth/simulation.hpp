#pragma once

#include <cstdint>
#include <map>

#include "fracbirth/analytic.hpp"
#include "fracbirth/random_time.hpp"
#include "fracbirth/rates.hpp"
#include "fracbirth/rng.hpp"

namespace fracbirth {

inline constexpr std::int64_t kMaxEventsPerRun = 10'000'000;

using Histogram = std::map<std::int64_t, std::int64_t>;

struct SimulationReport {
  std::int64_t runs = 0;
  Histogram empirical;
  double mean_hat = 0.0;
  double var_hat = 0.0;
  double mean_se = 0.0;  ///< sqrt(var_hat / runs)
  double chi_square = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins_merged = 0;
};

/// Event-driven pure birth chain from n0 up to elapsed time s.
/// PrefixExhausted when an Explicit schedule runs out, ExplosionGuard past 10^7 events.
std::int64_t simulate_classical(const RateSchedule& schedule, double s, std::int64_t n0, CounterRng& rng);

/// The chain run for the random time T_{2nu}(t).
std::int64_t simulate_fractional(const RateSchedule& schedule, const RandomTimeLaw& law, std::int64_t n0, CounterRng& rng);

struct SimulationConfig {
  RateSchedule schedule = RateSchedule::linear(1.0);
  double nu = 1.0;
  double t = 1.0;
  std::int64_t n0 = 1;
  std::int64_t runs = 100'000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  ///< 0: hardware concurrency
};

/// Runs config.runs independent replicates. Run i uses stream i of the seed, so the histogram
/// does not depend on the thread count.
Histogram simulate_many(const SimulationConfig& config);

/// Moments of a histogram from exact integer sums.
SimulationReport summarize(const Histogram& counts);

/// Pearson chi-square of the counts against the table, pooling cells left to right until each
/// expected count reaches min_expected; the table tail and anything beyond k_cut join the last bin.
/// DegenerateBinning when fewer than two bins remain.
SimulationReport compare(const Histogram& counts, const PmfTable& analytic, double min_expected = 5.0);

}  // namespace fracbirth
