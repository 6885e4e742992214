#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fbstore/fbm.h"

namespace fbstore {

/// A(t_i) - t_i: the fBm input drained at unit rate.
struct NetputPath {
  TimeGrid grid;
  Eigen::VectorXd values;
};

/// Storage level Q(t_i) >= 0.
struct WorkloadTrace {
  TimeGrid grid;
  Eigen::VectorXd q;
};

/// M(t_i) = sup over s in [0, t_i] of A(s) - s, evaluated on the grid.
struct RunningMaxTrace {
  TimeGrid grid;
  Eigen::VectorXd m;
};

/// Inclusive index range [start, end] of a maximal excursion with q > 0.
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

using BusyPeriodList = std::vector<Interval>;

NetputPath netput(const FbmPath& path);

RunningMaxTrace running_max(const FbmPath& path);

/// Reflection recursion q[k] = max(q[k-1] + dA_k - dt_k, 0) with q[0] = q0.
WorkloadTrace workload(const FbmPath& path, double q0 = 0.0);

BusyPeriodList busy_periods(const WorkloadTrace& trace);

/// Busy period containing grid index `index`; `busy` is false and the
/// length zero when q = 0 there.
struct OngoingBusyPeriod {
  bool busy = false;
  Interval interval;
  /// Duration in time units (0 when idle).
  double length = 0.0;
};

OngoingBusyPeriod ongoing_busy_period(const WorkloadTrace& trace, std::size_t index);

/// Per-replication running maxima M(t_k) at a ladder of horizons plus the
/// reference horizon, all read off one path per replication.
struct RunningMaxSamples {
  std::vector<double> horizons;  // as realized on the grid
  double t_ref = 0.0;
  double step = 0.0;
  std::size_t reps = 0;
  /// at_horizon[k][r] = M(horizons[k]) on replication r.
  std::vector<std::vector<double>> at_horizon;
  std::vector<double> at_ref;
};

/// Simulates `reps` independent fBm paths on the uniform grid of `step` over
/// [0, t_ref]; replication r uses Seed{seed, r}.
RunningMaxSamples sample_running_maxima(const HurstParam& h, std::span<const double> horizons,
                                        double t_ref, std::size_t reps, double step,
                                        std::uint64_t seed);

/// Default simulation step: 2^-8 * min(1, t).
double default_step(double t);

struct GammaEstimate {
  double x = 0.0;
  double t = 0.0;
  double t_ref = 0.0;
  double step = 0.0;
  std::size_t reps = 0;
  /// #{M(t_ref) > x and M(t) <= x} / reps.
  double estimate = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double half_width = 0.0;
  std::size_t count = 0;
  std::size_t hits_t = 0;    // #{M(t) > x}
  std::size_t hits_ref = 0;  // #{M(t_ref) > x}
};

/// One row of the optional per-replication spool.
struct GammaOutcome {
  std::size_t rep = 0;
  double m_t = 0.0;
  double m_tref = 0.0;
  bool hit_t = false;
  bool hit_tref = false;
};

/// Estimates gamma(x, t) = P(M > x) - P(M(t) > x) with M approximated by
/// M(t_ref), counting both events on the same paths.
GammaEstimate estimate_gamma(const HurstParam& h, double x, double t, double t_ref,
                             std::size_t reps, double step, std::uint64_t seed,
                             std::vector<GammaOutcome>* spool = nullptr);

/// Same quantity computed on the unit time scale: paths on [0, t_ref / t]
/// with step step / t, amplitude divided by t^{1-H} and level x / t.
GammaEstimate estimate_gamma_rescaled(const HurstParam& h, double x, double t, double t_ref,
                                      std::size_t reps, double step, std::uint64_t seed);

/// Writes the spool as CSV with columns rep,M_t,M_tref,hit_t,hit_tref.
void write_gamma_spool(std::ostream& os, const std::vector<GammaOutcome>& spool);

}  // namespace fbstore
