#pragma once

#include <cstddef>
#include <span>

namespace fbstore {

/// Two-sided 95% standard normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  std::size_t points = 0;
};

/// Least-squares line y = intercept + slope * x. With non-empty `weights`
/// the fit is weighted; standard errors use the residual variance
/// (zero when fewer than three points).
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights = {});

struct ProportionInterval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double half_width() const noexcept { return 0.5 * (upper - lower); }
};

/// 95% interval for a binomial proportion: normal approximation, or the
/// exact Clopper-Pearson interval when fewer than five events were seen.
ProportionInterval proportion_interval(std::size_t events, std::size_t trials);

/// Exact Clopper-Pearson 95% interval.
ProportionInterval clopper_pearson(std::size_t events, std::size_t trials);

double mean(std::span<const double> v);
/// Unbiased sample variance (divisor n - 1); 0 for fewer than two values.
double sample_variance(std::span<const double> v);

}  // namespace fbstore
