#include "fracbirth/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fracbirth/error.hpp"
#include "fracbirth/stats.hpp"
#include "log.hpp"

namespace fracbirth {

namespace {
__extension__ typedef __int128 wide_int;
}  // namespace

std::int64_t simulate_classical(const RateSchedule& schedule, double s, std::int64_t n0, CounterRng& rng) {
  if (!(s >= 0.0) || !std::isfinite(s)) fail(ErrorCode::DomainError, "simulation time must be finite and non-negative");
  if (n0 < 1) fail(ErrorCode::DomainError, "initial population n0 must be at least 1");
  std::int64_t k = n0;
  double clock = 0.0;
  for (std::int64_t events = 0;; ++events) {
    if (events >= kMaxEventsPerRun) fail(ErrorCode::ExplosionGuard, "more than 10^7 births in one run");
    if (static_cast<std::size_t>(k) > schedule.available())
      fail(ErrorCode::PrefixExhausted, "explicit schedule has no rate for state " + std::to_string(k));
    const double rate = rate_at(schedule, static_cast<std::size_t>(k));
    clock += rng.exponential() / rate;
    if (clock > s) return k;
    ++k;
  }
}

std::int64_t simulate_fractional(const RateSchedule& schedule, const RandomTimeLaw& law, std::int64_t n0, CounterRng& rng) {
  const double s = sample(law, rng);
  return simulate_classical(schedule, s, n0, rng);
}

Histogram simulate_many(const SimulationConfig& config) {
  if (config.runs < 1) fail(ErrorCode::DomainError, "runs must be at least 1");
  const RandomTimeLaw law = RandomTimeLaw::make(config.nu, config.t);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<std::int64_t>(std::min<std::int64_t>(config.threads ? config.threads : hw, config.runs));
  std::vector<Histogram> partial(static_cast<std::size_t>(workers));
  std::exception_ptr first_error;
  std::mutex error_lock;
  auto work = [&](std::int64_t w) {
    try {
      for (std::int64_t i = w; i < config.runs; i += workers) {
        CounterRng rng(config.seed, static_cast<std::uint64_t>(i));
        ++partial[static_cast<std::size_t>(w)][simulate_fractional(config.schedule, law, config.n0, rng)];
      }
    } catch (...) {
      std::lock_guard<std::mutex> g(error_lock);
      if (!first_error) first_error = std::current_exception();
    }
  };
  logger()->info("simulating {} runs on {} threads", config.runs, workers);
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::int64_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  Histogram merged;
  for (const auto& h : partial)
    for (const auto& [k, c] : h) merged[k] += c;
  return merged;
}

SimulationReport summarize(const Histogram& counts) {
  SimulationReport r;
  wide_int s1 = 0, s2 = 0;
  for (const auto& [k, c] : counts) {
    r.runs += c;
    s1 += static_cast<wide_int>(k) * c;
    s2 += static_cast<wide_int>(k) * k * c;
  }
  r.empirical = counts;
  if (r.runs == 0) return r;
  const long double n = static_cast<long double>(r.runs);
  const long double mean = static_cast<long double>(s1) / n;
  r.mean_hat = static_cast<double>(mean);
  if (r.runs > 1) {
    // n * sum k^2 - (sum k)^2 is exact in 128-bit arithmetic for any realistic run.
    const wide_int centered = static_cast<wide_int>(r.runs) * s2 - s1 * s1;
    r.var_hat = static_cast<double>(static_cast<long double>(centered) / (n * (n - 1.0L)));
  }
  r.mean_se = std::sqrt(r.var_hat / static_cast<double>(r.runs));
  return r;
}

SimulationReport compare(const Histogram& counts, const PmfTable& analytic, double min_expected) {
  if (!(min_expected > 0.0)) fail(ErrorCode::DomainError, "min_expected must be positive");
  SimulationReport r = summarize(counts);
  if (r.runs == 0) fail(ErrorCode::DegenerateBinning, "no runs to compare");
  const double n = static_cast<double>(r.runs);
  struct Bin {
    double expected = 0.0;
    double observed = 0.0;
    int cells = 0;
  };
  std::vector<Bin> bins;
  Bin open;
  std::int64_t below = 0;
  for (const auto& [k, c] : counts)
    if (k < analytic.n0) below += c;
  open.observed += static_cast<double>(below);
  for (std::int64_t k = analytic.n0; k <= analytic.k_cut; ++k) {
    open.expected += n * analytic.at(k);
    const auto it = counts.find(k);
    if (it != counts.end()) open.observed += static_cast<double>(it->second);
    ++open.cells;
    if (open.expected >= min_expected) {
      bins.push_back(open);
      open = Bin{};
    }
  }
  // Tail cell: the table's residual mass and every count beyond k_cut.
  open.expected += n * std::max(0.0, analytic.tail_mass);
  for (auto it = counts.upper_bound(analytic.k_cut); it != counts.end(); ++it) open.observed += static_cast<double>(it->second);
  ++open.cells;
  if (open.expected >= min_expected || bins.empty()) {
    bins.push_back(open);
  } else {
    bins.back().expected += open.expected;
    bins.back().observed += open.observed;
    bins.back().cells += open.cells;
  }
  if (bins.size() < 2 || bins.back().expected < min_expected)
    fail(ErrorCode::DegenerateBinning, "fewer than two bins reach the expected-count threshold");
  int cells = 0;
  double chi = 0.0;
  for (const auto& b : bins) {
    cells += b.cells;
    const double diff = b.observed - b.expected;
    chi += diff * diff / b.expected;
  }
  r.chi_square = chi;
  r.dof = static_cast<int>(bins.size()) - 1;
  r.bins_merged = cells - static_cast<int>(bins.size());
  r.p_value = chi_square_p_value(chi, r.dof);
  return r;
}

}  // namespace fracbirth
