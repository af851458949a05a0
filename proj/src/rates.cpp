#include "fracbirth/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fracbirth/error.hpp"
#include "log.hpp"

namespace fracbirth {

RateSchedule RateSchedule::linear(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    fail(ErrorCode::NonPositiveRate, "linear rate lambda must be positive and finite");
  RateSchedule s;
  s.kind_ = Kind::Linear;
  s.lambda_ = lambda;
  return s;
}

RateSchedule RateSchedule::explicit_rates(std::vector<double> rates) {
  if (rates.empty()) fail(ErrorCode::DomainError, "explicit schedule needs at least one rate");
  RateSchedule s;
  s.kind_ = Kind::Explicit;
  s.rates_ = std::move(rates);
  return s;
}

std::size_t RateSchedule::available() const {
  return kind_ == Kind::Linear ? std::numeric_limits<std::size_t>::max() : rates_.size();
}

double rate_at(const RateSchedule& schedule, std::size_t k) {
  if (k == 0) fail(ErrorCode::IndexOutOfRange, "rate index starts at 1");
  if (schedule.kind() == RateSchedule::Kind::Linear) return schedule.lambda() * static_cast<double>(k);
  if (k > schedule.rates().size())
    fail(ErrorCode::IndexOutOfRange, "rate index " + std::to_string(k) + " beyond explicit prefix of length " +
                                         std::to_string(schedule.rates().size()));
  return schedule.rates()[k - 1];
}

RateSchedule validate(const RateSchedule& schedule, std::size_t k_max) {
  if (k_max == 0) fail(ErrorCode::DomainError, "k_max must be at least 1");
  RateSchedule out = schedule;
  if (schedule.kind() == RateSchedule::Kind::Linear) {
    // lambda (k-1) vs lambda k is the closest pair.
    out.min_relative_gap_ = k_max == 1 ? 1.0 : 1.0 / static_cast<double>(k_max);
  } else {
    if (k_max > schedule.rates().size())
      fail(ErrorCode::IndexOutOfRange, "validation through k=" + std::to_string(k_max) + " but only " +
                                           std::to_string(schedule.rates().size()) + " rates given");
    std::vector<double> sorted(schedule.rates().begin(), schedule.rates().begin() + static_cast<std::ptrdiff_t>(k_max));
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (!(sorted[i] > 0.0) || !std::isfinite(sorted[i]))
        fail(ErrorCode::NonPositiveRate, "rate lambda_" + std::to_string(i + 1) + " must be positive and finite");
    std::sort(sorted.begin(), sorted.end());
    double gap = 1.0;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] == sorted[i - 1])
        fail(ErrorCode::DuplicateRates, "rate value " + std::to_string(sorted[i]) + " occurs more than once");
      gap = std::min(gap, (sorted[i] - sorted[i - 1]) / sorted[i]);
    }
    out.min_relative_gap_ = gap;
  }
  out.degenerate_ = out.min_relative_gap_ < kDegenerateGap;
  out.validated_through_ = k_max;
  if (out.degenerate_)
    logger()->warn("DegenerateRates: minimum relative gap {:.3e} below {:.0e}; partial fractions lose precision",
                   out.min_relative_gap_, kDegenerateGap);
  return out;
}

ExplosionDiagnostic is_non_exploding(const RateSchedule& schedule, std::size_t k_max) {
  const RateSchedule v = validate(schedule, k_max);
  ExplosionDiagnostic d;
  long double sum = 0.0L;
  for (std::size_t k = 1; k <= k_max; ++k) sum += 1.0L / rate_at(v, k);
  d.partial_sum = static_cast<double>(sum);
  d.verdict = v.kind() == RateSchedule::Kind::Linear ? ExplosionVerdict::DivergesAnalytically
                                                     : ExplosionVerdict::Inconclusive;
  return d;
}

const char* to_string(ExplosionVerdict v) {
  return v == ExplosionVerdict::DivergesAnalytically ? "DivergesAnalytically" : "Inconclusive";
}

}  // namespace fracbirth
