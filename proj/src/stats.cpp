#include "fbstore/stats.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fbstore {

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (!weights.empty() && weights.size() != x.size()) {
    throw std::invalid_argument("fit_line: weight count mismatch");
  }
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("fit_line: need at least two points");

  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w(i);
    sx += w(i) * x[i];
    sy += w(i) * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += w(i) * dx * dx;
    sxy += w(i) * dx * dy;
    syy += w(i) * dy * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: abscissae are all equal");

  LineFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += w(i) * r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  if (n > 2) {
    const double sigma2 = ss_res / static_cast<double>(n - 2);
    fit.slope_se = std::sqrt(sigma2 / sxx);
    fit.intercept_se = std::sqrt(sigma2 * (1.0 / sw + mx * mx / sxx));
  }
  return fit;
}

namespace {

// P(X <= k) for X ~ Binomial(n, p), summed in log space.
double binomial_cdf(std::size_t k, std::size_t n, double p) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return k >= n ? 1.0 : 0.0;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  const double ln_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  double total = 0.0;
  for (std::size_t i = 0; i <= k && i <= n; ++i) {
    const double di = static_cast<double>(i);
    const double log_term = ln_n1 - std::lgamma(di + 1.0) -
                            std::lgamma(static_cast<double>(n - i) + 1.0) + di * lp +
                            static_cast<double>(n - i) * lq;
    total += std::exp(log_term);
  }
  return std::min(total, 1.0);
}

// Solve f(p) = target for p in [0, 1] where f is decreasing in p.
template <typename F>
double bisect_decreasing(F f, double target) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > target) lo = mid; else hi = mid;
    if (hi - lo < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ProportionInterval clopper_pearson(std::size_t events, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("proportion interval needs at least one trial");
  if (events > trials) throw std::invalid_argument("more events than trials");
  constexpr double alpha = 0.05;
  ProportionInterval ci;
  ci.estimate = static_cast<double>(events) / static_cast<double>(trials);
  // Lower bound: P(X >= k; p) = alpha/2, i.e. P(X <= k-1; p) = 1 - alpha/2.
  ci.lower = events == 0 ? 0.0
                         : bisect_decreasing([&](double p) { return binomial_cdf(events - 1, trials, p); },
                                             1.0 - alpha / 2.0);
  // Upper bound: P(X <= k; p) = alpha/2.
  ci.upper = events == trials
                 ? 1.0
                 : bisect_decreasing([&](double p) { return binomial_cdf(events, trials, p); }, alpha / 2.0);
  return ci;
}

ProportionInterval proportion_interval(std::size_t events, std::size_t trials) {
  if (events < 5) return clopper_pearson(events, trials);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(events) / n;
  const double hw = kZ95 * std::sqrt(p * (1.0 - p) / n);
  return {p, std::max(0.0, p - hw), std::min(1.0, p + hw)};
}

double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean of empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace fbstore
