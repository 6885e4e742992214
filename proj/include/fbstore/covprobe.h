#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fbstore/fbm.h"

namespace fbstore {

/// Cov(Q(w), Q(w + t)) across independent replications started empty and
/// run through a warm-up w. The first entry is always lag 0 (the variance).
struct CovEstimate {
  std::vector<double> lags;
  std::vector<double> cov;
  std::vector<double> ci_half_width;  // jackknife, 95%
  double warmup = 0.0;
  double step = 0.0;
  std::size_t reps = 0;
  double mean_q = 0.0;  // sample mean of Q(w)
};

/// `lags` must be strictly increasing and positive; at least 30 replications.
CovEstimate estimate_cov(const HurstParam& h, std::span<const double> lags, double warmup, std::size_t reps,
                         double step, std::uint64_t seed);

/// Burn-in from the horizon formula at level 3 * mean(Q) and eps = 0.01,
/// with mean(Q) taken from a pilot run of `pilot_reps` replications over
/// `pilot_warmup` time units.
double default_warmup(const HurstParam& h, double theta, double step, std::uint64_t seed,
                      std::size_t pilot_reps = 200, double pilot_warmup = 50.0);

enum class DecayModel { power, weibull, inconclusive };

const char* to_string(DecayModel m);

struct ConjectureReport {
  double hurst = 0.5;
  // cov(t) ~ gamma t^{exponent}
  double power_exponent = 0.0;
  double power_exponent_target = 0.0;  // 2H - 2
  double power_amplitude = 0.0;        // gamma-hat
  double power_amplitude_se = 0.0;
  double power_r_squared = 0.0;
  // cov(t) ~ c exp(-rate t^{2-2H})
  double weibull_rate = 0.0;
  double weibull_amplitude = 0.0;
  double weibull_r_squared = 0.0;
  DecayModel preferred = DecayModel::inconclusive;
  std::size_t points = 0;
};

/// Fits both decay models on log axes over the positive lags with positive
/// covariance; a model is preferred only when its r^2 exceeds the other's
/// by at least 0.05.
ConjectureReport conjecture_diagnostic(const CovEstimate& est, const HurstParam& h);

}  // namespace fbstore
