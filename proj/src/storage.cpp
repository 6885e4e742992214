#include "fbstore/storage.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "fbstore/parallel.h"
#include "fbstore/stats.h"

namespace fbstore {

NetputPath netput(const FbmPath& path) {
  NetputPath out{path.grid, path.values};
  for (std::size_t i = 0; i < path.grid.size(); ++i) {
    out.values(static_cast<Eigen::Index>(i)) -= path.grid[i];
  }
  return out;
}

RunningMaxTrace running_max(const FbmPath& path) {
  if (!path.grid.starts_at_zero()) throw std::invalid_argument("running_max: grid must start at 0");
  RunningMaxTrace out{path.grid, Eigen::VectorXd(path.values.size())};
  double m = 0.0;  // the supremum includes s = 0
  for (Eigen::Index i = 0; i < path.values.size(); ++i) {
    m = std::max(m, path.values(i) - path.grid[static_cast<std::size_t>(i)]);
    out.m(i) = m;
  }
  return out;
}

WorkloadTrace workload(const FbmPath& path, double q0) {
  if (q0 < 0.0) throw std::invalid_argument("workload: initial level must be non-negative");
  const Eigen::Index n = path.values.size();
  WorkloadTrace out{path.grid, Eigen::VectorXd(n)};
  if (n == 0) return out;
  out.q(0) = q0;
  for (Eigen::Index k = 1; k < n; ++k) {
    const double dt = path.grid[static_cast<std::size_t>(k)] - path.grid[static_cast<std::size_t>(k - 1)];
    out.q(k) = std::max(out.q(k - 1) + path.values(k) - path.values(k - 1) - dt, 0.0);
  }
  return out;
}

BusyPeriodList busy_periods(const WorkloadTrace& trace) {
  BusyPeriodList out;
  const auto n = static_cast<std::size_t>(trace.q.size());
  std::size_t k = 0;
  while (k < n) {
    if (trace.q(static_cast<Eigen::Index>(k)) > 0.0) {
      const std::size_t start = k;
      while (k + 1 < n && trace.q(static_cast<Eigen::Index>(k + 1)) > 0.0) ++k;
      out.push_back({start, k});
    }
    ++k;
  }
  return out;
}

OngoingBusyPeriod ongoing_busy_period(const WorkloadTrace& trace, std::size_t index) {
  if (index >= static_cast<std::size_t>(trace.q.size())) {
    throw std::out_of_range("ongoing_busy_period: index outside trace");
  }
  OngoingBusyPeriod out;
  if (!(trace.q(static_cast<Eigen::Index>(index)) > 0.0)) return out;
  std::size_t lo = index;
  std::size_t hi = index;
  while (lo > 0 && trace.q(static_cast<Eigen::Index>(lo - 1)) > 0.0) --lo;
  while (hi + 1 < static_cast<std::size_t>(trace.q.size()) &&
         trace.q(static_cast<Eigen::Index>(hi + 1)) > 0.0) {
    ++hi;
  }
  out.busy = true;
  out.interval = {lo, hi};
  // The excursion extends to the neighbouring empty grid points when they exist.
  const double t_lo = trace.grid[lo > 0 ? lo - 1 : lo];
  const double t_hi = trace.grid[hi + 1 < trace.grid.size() ? hi + 1 : hi];
  out.length = t_hi - t_lo;
  return out;
}

double default_step(double t) { return std::ldexp(1.0, -8) * std::min(1.0, t); }

namespace {

std::size_t grid_index(double t, double step) {
  return static_cast<std::size_t>(std::llround(t / step));
}

// Maxima of amplitude * A(u_k) - u_k at the given grid indices, one path per
// replication.
RunningMaxSamples simulate_maxima(const HurstParam& h, std::span<const double> horizons,
                                  double t_ref, std::size_t reps, double step, std::uint64_t seed,
                                  double amplitude) {
  if (reps == 0) throw std::invalid_argument("need at least one replication");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (!(t_ref > 0.0)) throw std::invalid_argument("reference horizon must be positive");
  const std::size_t n_ref = grid_index(t_ref, step);
  if (n_ref == 0) throw std::invalid_argument("reference horizon shorter than one step");

  std::vector<std::size_t> idx;
  RunningMaxSamples out;
  for (double t : horizons) {
    if (!(t > 0.0) || t > t_ref) throw std::invalid_argument("horizons must lie in (0, t_ref]");
    const std::size_t k = grid_index(t, step);
    if (k == 0) throw std::invalid_argument("horizon shorter than one step");
    idx.push_back(k);
    out.horizons.push_back(static_cast<double>(k) * step);
  }
  out.t_ref = static_cast<double>(n_ref) * step;
  out.step = step;
  out.reps = reps;
  out.at_horizon.assign(horizons.size(), std::vector<double>(reps));
  out.at_ref.assign(reps, 0.0);

  std::vector<std::size_t> order(idx.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });

  const FgnSampler sampler(h, n_ref, step);
  parallel_chunks(reps, [&](std::size_t, std::size_t begin, std::size_t end) {
    auto ws = sampler.make_workspace();
    std::vector<double> inc(n_ref);
    for (std::size_t r = begin; r < end; ++r) {
      sampler.sample(Seed{seed, r}, *ws, inc);
      double a = 0.0;
      double m = 0.0;
      std::size_t next = 0;
      for (std::size_t k = 1; k <= n_ref; ++k) {
        a += inc[k - 1];
        m = std::max(m, amplitude * a - static_cast<double>(k) * step);
        while (next < order.size() && idx[order[next]] == k) out.at_horizon[order[next++]][r] = m;
      }
      out.at_ref[r] = m;
    }
  });
  return out;
}

GammaEstimate summarize_gamma(const RunningMaxSamples& s, double x_level, double x, double t,
                              double t_ref, double step, std::vector<GammaOutcome>* spool) {
  GammaEstimate g;
  g.x = x;
  g.t = t;
  g.t_ref = t_ref;
  g.step = step;
  g.reps = s.reps;
  if (spool) spool->clear();
  for (std::size_t r = 0; r < s.reps; ++r) {
    const double mt = s.at_horizon[0][r];
    const double mref = s.at_ref[r];
    const bool hit_t = mt > x_level;
    const bool hit_ref = mref > x_level;
    g.hits_t += hit_t;
    g.hits_ref += hit_ref;
    g.count += (hit_ref && !hit_t);
    if (spool) spool->push_back({r, mt, mref, hit_t, hit_ref});
  }
  const auto ci = proportion_interval(g.count, g.reps);
  g.estimate = ci.estimate;
  g.ci_lower = ci.lower;
  g.ci_upper = ci.upper;
  g.half_width = ci.half_width();
  return g;
}

void check_gamma_args(double x, double t, double t_ref) {
  if (!(x > 0.0)) throw std::invalid_argument("level x must be positive");
  if (!(t > 0.0)) throw std::invalid_argument("horizon t must be positive");
  if (!(t < t_ref)) {
    throw std::invalid_argument("horizon t must be below the reference horizon t_ref");
  }
}

}  // namespace

RunningMaxSamples sample_running_maxima(const HurstParam& h, std::span<const double> horizons,
                                        double t_ref, std::size_t reps, double step,
                                        std::uint64_t seed) {
  return simulate_maxima(h, horizons, t_ref, reps, step, seed, 1.0);
}

GammaEstimate estimate_gamma(const HurstParam& h, double x, double t, double t_ref,
                             std::size_t reps, double step, std::uint64_t seed,
                             std::vector<GammaOutcome>* spool) {
  check_gamma_args(x, t, t_ref);
  const double horizons[] = {t};
  const auto s = simulate_maxima(h, horizons, t_ref, reps, step, seed, 1.0);
  return summarize_gamma(s, x, x, t, t_ref, step, spool);
}

GammaEstimate estimate_gamma_rescaled(const HurstParam& h, double x, double t, double t_ref,
                                      std::size_t reps, double step, std::uint64_t seed) {
  check_gamma_args(x, t, t_ref);
  const double horizons[] = {1.0};
  const double amplitude = std::pow(t, h.value() - 1.0);
  const auto s = simulate_maxima(h, horizons, t_ref / t, reps, step / t, seed, amplitude);
  return summarize_gamma(s, x / t, x, t, t_ref, step, nullptr);
}

void write_gamma_spool(std::ostream& os, const std::vector<GammaOutcome>& spool) {
  os << "rep,M_t,M_tref,hit_t,hit_tref\n";
  os.precision(17);
  for (const auto& o : spool) {
    os << o.rep << ',' << o.m_t << ',' << o.m_tref << ',' << (o.hit_t ? 1 : 0) << ','
       << (o.hit_tref ? 1 : 0) << '\n';
  }
}

}  // namespace fbstore
