#pragma once

#include <functional>
#include <vector>

namespace fracbirth {

/// Upper tail P(chi2_dof > x).
double chi_square_p_value(double x, int dof);

/// sup |F_n - F| for the sample (sorted in place).
double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
double ks_p_value(double d, std::size_t n);

}  // namespace fracbirth
