#include "fbstore/metrics.h"

#include <algorithm>
#include <cmath>

#include "fbstore/stats.h"

namespace fbstore {

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw std::invalid_argument("empirical CDF needs at least one sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(std::distance(sorted_.begin(), it)) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::quantile(double p) const {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted_.size())));
  return sorted_[std::max<std::size_t>(k, 1) - 1];
}

namespace {

void check_nonempty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("distance estimate needs non-empty samples");
}

struct SupResult {
  double value = 0.0;
  double level = 0.0;
};

SupResult sup_distance(std::span<const double> samples_t, std::span<const double> samples_ref) {
  std::vector<double> a(samples_t.begin(), samples_t.end());
  std::vector<double> b(samples_ref.begin(), samples_ref.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  SupResult best;
  std::size_t i = 0, j = 0;
  // Walk the pooled breakpoints; both CDFs are evaluated after absorbing
  // every sample equal to the current point.
  while (i < a.size() || j < b.size()) {
    const double x = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    const double d = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    if (d > best.value) best = {d, x};
  }
  return best;
}

}  // namespace

double d1_hat(std::span<const double> samples_t, std::span<const double> samples_ref) {
  check_nonempty(samples_t, samples_ref);
  return sup_distance(samples_t, samples_ref).value;
}

DistanceEstimate d1_estimate(std::span<const double> samples_t, std::span<const double> samples_ref) {
  check_nonempty(samples_t, samples_ref);
  const auto s = sup_distance(samples_t, samples_ref);
  const double n = static_cast<double>(std::min(samples_t.size(), samples_ref.size()));
  DistanceEstimate e;
  e.value = s.value;
  e.reps = static_cast<std::size_t>(n);
  e.half_width = kZ95 * std::sqrt(s.value * (1.0 - s.value) / n);
  return e;
}

DistanceEstimate d2_hat(std::span<const double> samples_t, std::span<const double> samples_ref) {
  check_nonempty(samples_t, samples_ref);
  DistanceEstimate e;
  if (samples_t.size() == samples_ref.size()) {
    std::vector<double> diff(samples_t.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = samples_ref[i] - samples_t[i];
    e.value = mean(diff);
    e.reps = diff.size();
    e.half_width = kZ95 * std::sqrt(sample_variance(diff) / static_cast<double>(diff.size()));
    return e;
  }
  e.value = mean(samples_ref) - mean(samples_t);
  e.reps = std::min(samples_t.size(), samples_ref.size());
  e.half_width = kZ95 * std::sqrt(sample_variance(samples_ref) / static_cast<double>(samples_ref.size()) +
                                  sample_variance(samples_t) / static_cast<double>(samples_t.size()));
  return e;
}

DecayFit weibull_fit(const HurstParam& h, std::span<const double> horizons, std::span<const double> values,
                     std::span<const double> weights) {
  if (horizons.size() != values.size()) throw std::invalid_argument("horizons and values differ in length");
  if (!weights.empty() && weights.size() != values.size()) {
    throw std::invalid_argument("weights and values differ in length");
  }
  DecayFit fit;
  fit.hurst = h.value();
  std::vector<double> x, y, w;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0 && std::isfinite(values[i])) {
      x.push_back(std::pow(horizons[i], h.weibull_exponent()));
      y.push_back(std::log(values[i]));
      if (!weights.empty()) w.push_back(weights[i]);
      fit.horizons_used.push_back(horizons[i]);
    } else {
      fit.excluded_horizons.push_back(horizons[i]);
    }
  }
  if (x.size() < 3) {
    std::string names;
    for (double t : fit.excluded_horizons) names += (names.empty() ? "" : ", ") + std::to_string(t);
    throw StarvedFitError("decay fit needs at least 3 positive values; starved horizons: " + names,
                          fit.excluded_horizons);
  }
  const LineFit line = fit_line(x, y, w);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r_squared = line.r_squared;
  fit.slope_se = line.slope_se;
  fit.points_used = line.points;
  return fit;
}

DecayFit weibull_fit_confident(const HurstParam& h, std::span<const double> horizons,
                               std::span<const DistanceEstimate> estimates, bool inverse_variance) {
  if (horizons.size() != estimates.size()) throw std::invalid_argument("horizons and estimates differ in length");
  std::vector<double> t, v, w, excluded;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto& e = estimates[i];
    if (e.value - e.half_width > 0.0) {
      t.push_back(horizons[i]);
      v.push_back(e.value);
      // Delta method: sd(log v) ~ sd(v) / v.
      const double sd_log = (e.half_width / kZ95) / e.value;
      w.push_back(sd_log > 0.0 ? 1.0 / (sd_log * sd_log) : 1.0);
    } else {
      excluded.push_back(horizons[i]);
    }
  }
  DecayFit fit;
  try {
    fit = weibull_fit(h, t, v, inverse_variance ? std::span<const double>(w) : std::span<const double>());
  } catch (const StarvedFitError& e) {
    std::vector<double> all = excluded;
    all.insert(all.end(), e.starved_horizons().begin(), e.starved_horizons().end());
    std::string names;
    for (double x : all) names += (names.empty() ? "" : ", ") + std::to_string(x);
    throw StarvedFitError("decay fit needs at least 3 horizons with confident estimates; excluded: " + names, all);
  }
  fit.excluded_horizons.insert(fit.excluded_horizons.end(), excluded.begin(), excluded.end());
  std::sort(fit.excluded_horizons.begin(), fit.excluded_horizons.end());
  return fit;
}

TailFit tail_fit(const HurstParam& h, std::span<const double> samples_ref) {
  if (samples_ref.size() < 100) throw std::invalid_argument("tail fit needs at least 100 samples");
  const EmpiricalCdf cdf(std::vector<double>(samples_ref.begin(), samples_ref.end()));
  const auto s = cdf.sorted();
  if (s.front() == s.back()) throw std::invalid_argument("tail fit: degenerate samples (all equal)");

  TailFit out;
  out.x_lo = cdf.quantile(0.5);
  out.x_hi = cdf.quantile(0.95);
  std::vector<double> x, y;
  double last = -1.0;
  for (double v : s) {
    if (v < out.x_lo || v > out.x_hi || v == last) continue;
    last = v;
    const double surv = cdf.survival(v);
    if (surv <= 0.0) continue;
    x.push_back(std::pow(v, h.weibull_exponent()));
    y.push_back(std::log(surv));
  }
  if (x.size() < 3) throw std::invalid_argument("tail fit: too few distinct values in the fit range");
  const LineFit line = fit_line(x, y);
  out.lambda = -line.slope;
  out.kappa = std::exp(line.intercept);
  out.r_squared = line.r_squared;
  out.points = line.points;
  if (!(out.lambda > 0.0)) throw std::runtime_error("tail fit produced a non-positive decay constant");
  return out;
}

}  // namespace fbstore
