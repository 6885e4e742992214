#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fbstore/fbm.h"

namespace fbstore {

/// Right-continuous empirical distribution function.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);

  /// (#samples <= x) / size
  double operator()(double x) const;
  /// (#samples > x) / size
  double survival(double x) const { return 1.0 - (*this)(x); }
  /// Smallest sample value v with F(v) >= p, for p in (0, 1].
  double quantile(double p) const;

  std::span<const double> sorted() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

struct DistanceEstimate {
  double value = 0.0;
  double half_width = 0.0;  // 95%
  std::size_t reps = 0;
};

/// sup_x |F_t(x) - F_ref(x)| over the pooled sample points.
double d1_hat(std::span<const double> samples_t, std::span<const double> samples_ref);

/// d1_hat with a normal-approximation 95% half-width taken at the
/// maximizing level (the paired estimator is a binomial proportion there).
DistanceEstimate d1_estimate(std::span<const double> samples_t, std::span<const double> samples_ref);

/// mean(samples_ref) - mean(samples_t). Equal-length inputs are treated as
/// paired; otherwise the two means get independent standard errors.
DistanceEstimate d2_hat(std::span<const double> samples_t, std::span<const double> samples_ref);

class StarvedFitError : public std::runtime_error {
 public:
  StarvedFitError(const std::string& what, std::vector<double> starved)
      : std::runtime_error(what), starved_(std::move(starved)) {}
  const std::vector<double>& starved_horizons() const noexcept { return starved_; }

 private:
  std::vector<double> starved_;
};

/// Least-squares line of log(value) on t^{2-2H}; the slope estimates the
/// negated decay rate.
struct DecayFit {
  double hurst = 0.5;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_se = 0.0;
  std::size_t points_used = 0;
  std::vector<double> horizons_used;
  std::vector<double> excluded_horizons;
};

/// Fits over the strictly positive values. `weights`, when given, are
/// per-point inverse variances of log(value). Throws StarvedFitError
/// naming the excluded horizons when fewer than three values remain.
DecayFit weibull_fit(const HurstParam& h, std::span<const double> horizons, std::span<const double> values,
                     std::span<const double> weights = {});

/// weibull_fit after dropping horizons whose confidence interval reaches
/// zero (value - half_width <= 0).
DecayFit weibull_fit_confident(const HurstParam& h, std::span<const double> horizons,
                               std::span<const DistanceEstimate> estimates, bool inverse_variance = false);

/// P(M > x) <= kappa exp(-lambda x^{2-2H}) fitted on the empirical survival
/// function between the sample median and the 95% quantile.
struct TailFit {
  double kappa = 0.0;
  double lambda = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

TailFit tail_fit(const HurstParam& h, std::span<const double> samples_ref);

}  // namespace fbstore
