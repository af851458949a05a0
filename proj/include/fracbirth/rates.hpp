#pragma once

#include <cstddef>
#include <vector>

namespace fracbirth {

/// Birth-rate sequence lambda_k, k >= 1: either lambda * k or a finite explicit prefix.
class RateSchedule {
 public:
  enum class Kind { Linear, Explicit };

  static RateSchedule linear(double lambda);
  static RateSchedule explicit_rates(std::vector<double> rates);

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const std::vector<double>& rates() const { return rates_; }

  /// Number of rates available; unbounded for Linear.
  std::size_t available() const;

  /// Diagnostics recorded by validate().
  double min_relative_gap() const { return min_relative_gap_; }
  bool degenerate() const { return degenerate_; }
  std::size_t validated_through() const { return validated_through_; }

 private:
  friend RateSchedule validate(const RateSchedule&, std::size_t);
  Kind kind_ = Kind::Linear;
  double lambda_ = 1.0;
  std::vector<double> rates_;
  double min_relative_gap_ = 0.0;
  bool degenerate_ = false;
  std::size_t validated_through_ = 0;
};

/// Relative gap below which validate() flags the schedule as degenerate (warning only).
inline constexpr double kDegenerateGap = 1e-6;

/// lambda_k; IndexOutOfRange for an Explicit schedule beyond its prefix.
double rate_at(const RateSchedule& schedule, std::size_t k);

/// Checks positivity and pairwise distinctness of lambda_1..lambda_{k_max}.
/// Throws NonPositiveRate, DuplicateRates, IndexOutOfRange; logs a DegenerateRates
/// warning and sets degenerate() when the smallest relative gap is below 1e-6.
RateSchedule validate(const RateSchedule& schedule, std::size_t k_max);

enum class ExplosionVerdict { DivergesAnalytically, Inconclusive };

struct ExplosionDiagnostic {
  double partial_sum = 0.0;  ///< sum_{k <= k_max} 1/lambda_k
  ExplosionVerdict verdict = ExplosionVerdict::Inconclusive;
};

ExplosionDiagnostic is_non_exploding(const RateSchedule& schedule, std::size_t k_max);

const char* to_string(ExplosionVerdict v);

}  // namespace fracbirth
