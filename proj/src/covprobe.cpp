#include "fbstore/covprobe.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fbstore/horizon.h"
#include "fbstore/parallel.h"
#include "fbstore/stats.h"

namespace fbstore {

namespace {

// Q at the requested grid indices of one path started empty.
void workload_at(const std::vector<double>& inc, double step, const std::vector<std::size_t>& idx,
                 std::span<double> out) {
  double q = 0.0;
  std::size_t next = 0;
  for (std::size_t k = 1; k <= inc.size() && next < idx.size(); ++k) {
    q = std::max(q + inc[k - 1] - step, 0.0);
    while (next < idx.size() && idx[next] == k) out[next++] = q;
  }
}

struct Jackknife {
  double cov = 0.0;
  double half_width = 0.0;
};

// Unbiased covariance with a leave-one-out jackknife interval.
Jackknife jackknife_cov(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double nd = static_cast<double>(n);
  double sx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / nd, my = sy / nd;
  for (std::size_t i = 0; i < n; ++i) sxy += (x[i] - mx) * (y[i] - my);
  Jackknife out;
  out.cov = sxy / (nd - 1.0);

  // Leave-one-out: the centred cross product loses (n/(n-1)) dx_i dy_i.
  std::vector<double> loo(n);
  double loo_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    loo[i] = (sxy - nd / (nd - 1.0) * dx * dy) / (nd - 2.0);
    loo_mean += loo[i];
  }
  loo_mean /= nd;
  double ss = 0.0;
  for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  out.half_width = kZ95 * std::sqrt((nd - 1.0) / nd * ss);
  return out;
}

}  // namespace

CovEstimate estimate_cov(const HurstParam& h, std::span<const double> lags, double warmup, std::size_t reps,
                         double step, std::uint64_t seed) {
  if (!(warmup > 0.0)) throw std::invalid_argument("warm-up must be positive");
  if (reps < 30) throw std::invalid_argument("covariance probe needs at least 30 replications");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (lags.empty()) throw std::invalid_argument("need at least one lag");
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (!(lags[i] > 0.0) || (i > 0 && !(lags[i] > lags[i - 1]))) {
      throw std::invalid_argument("lags must be positive and strictly increasing");
    }
  }

  CovEstimate est;
  est.step = step;
  est.reps = reps;
  const auto w_idx = static_cast<std::size_t>(std::llround(warmup / step));
  if (w_idx == 0) throw std::invalid_argument("warm-up shorter than one step");
  est.warmup = static_cast<double>(w_idx) * step;
  std::vector<std::size_t> idx{w_idx};
  est.lags.push_back(0.0);
  for (double lag : lags) {
    const auto k = w_idx + static_cast<std::size_t>(std::llround(lag / step));
    if (k <= idx.back()) throw std::invalid_argument("lags closer than one step");
    idx.push_back(k);
    est.lags.push_back(static_cast<double>(k - w_idx) * step);
  }

  const std::size_t cols = idx.size();
  std::vector<double> q(reps * cols);
  const FgnSampler sampler(h, idx.back(), step);
  parallel_chunks(reps, [&](std::size_t, std::size_t begin, std::size_t end) {
    auto ws = sampler.make_workspace();
    std::vector<double> inc(idx.back());
    for (std::size_t r = begin; r < end; ++r) {
      sampler.sample(Seed{seed, r}, *ws, inc);
      workload_at(inc, step, idx, std::span<double>(q.data() + r * cols, cols));
    }
  });

  std::vector<double> q0(reps), qt(reps);
  for (std::size_t r = 0; r < reps; ++r) q0[r] = q[r * cols];
  est.mean_q = mean(q0);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < reps; ++r) qt[r] = q[r * cols + c];
    const auto jk = jackknife_cov(q0, qt);
    est.cov.push_back(jk.cov);
    est.ci_half_width.push_back(jk.half_width);
  }
  return est;
}

double default_warmup(const HurstParam& h, double theta, double step, std::uint64_t seed,
                      std::size_t pilot_reps, double pilot_warmup) {
  const double lag[] = {step};
  const auto pilot = estimate_cov(h, lag, pilot_warmup, std::max<std::size_t>(pilot_reps, 30), step, seed);
  const double level = std::max(3.0 * pilot.mean_q, step);
  return horizon(HorizonRequest(h, theta, level, 0.01)).t;
}

const char* to_string(DecayModel m) {
  switch (m) {
    case DecayModel::power: return "power";
    case DecayModel::weibull: return "weibull";
    case DecayModel::inconclusive: return "inconclusive";
  }
  return "?";
}

ConjectureReport conjecture_diagnostic(const CovEstimate& est, const HurstParam& h) {
  std::vector<double> log_t, weib_t, log_c;
  for (std::size_t i = 0; i < est.lags.size(); ++i) {
    if (est.lags[i] > 0.0 && est.cov[i] > 0.0) {
      log_t.push_back(std::log(est.lags[i]));
      weib_t.push_back(std::pow(est.lags[i], h.weibull_exponent()));
      log_c.push_back(std::log(est.cov[i]));
    }
  }
  if (log_c.size() < 4) throw std::invalid_argument("conjecture diagnostic needs at least 4 positive covariances");

  ConjectureReport rep;
  rep.hurst = h.value();
  rep.points = log_c.size();
  rep.power_exponent_target = 2.0 * h.value() - 2.0;
  const LineFit power = fit_line(log_t, log_c);
  rep.power_exponent = power.slope;
  rep.power_amplitude = std::exp(power.intercept);
  rep.power_amplitude_se = rep.power_amplitude * power.intercept_se;
  rep.power_r_squared = power.r_squared;
  const LineFit weib = fit_line(weib_t, log_c);
  rep.weibull_rate = -weib.slope;
  rep.weibull_amplitude = std::exp(weib.intercept);
  rep.weibull_r_squared = weib.r_squared;
  if (rep.power_r_squared >= rep.weibull_r_squared + 0.05) {
    rep.preferred = DecayModel::power;
  } else if (rep.weibull_r_squared >= rep.power_r_squared + 0.05) {
    rep.preferred = DecayModel::weibull;
  }
  return rep;
}

}  // namespace fbstore
