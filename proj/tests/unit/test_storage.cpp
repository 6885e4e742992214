#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "fbstore/storage.h"
#include "oracles.h"

using namespace fbstore;

namespace {

FbmPath make_path(std::vector<double> t, std::vector<double> a) {
  FbmPath p{TimeGrid::from_points(std::move(t)), Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())), 0.0};
  return p;
}

WorkloadTrace make_trace(std::vector<double> q) {
  std::vector<double> t(q.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  return {TimeGrid::from_points(t), Eigen::Map<Eigen::VectorXd>(q.data(), static_cast<Eigen::Index>(q.size()))};
}

}  // namespace

TEST(Netput, SubtractsUnitDrift) {
  const auto p = make_path({0.0, 0.5, 1.5}, {0.0, 2.0, -1.0});
  const auto n = netput(p);
  EXPECT_EQ(n.values[0], 0.0);
  EXPECT_EQ(n.values[1], 1.5);
  EXPECT_EQ(n.values[2], -2.5);
}

TEST(RunningMax, SpecExamples) {
  const auto zero = running_max(make_path({0.0, 0.5, 1.0}, {0.0, 0.0, 0.0}));
  EXPECT_EQ(zero.m, Eigen::VectorXd::Zero(3));

  const auto linear = running_max(make_path({0.0, 0.5, 1.0, 2.0}, {0.0, 1.0, 2.0, 4.0}));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(linear.m[i], linear.grid[static_cast<std::size_t>(i)]);

  const auto hand = running_max(make_path({0.0, 0.5, 1.0}, {0.0, 1.0, 0.2}));
  EXPECT_DOUBLE_EQ(hand.m[0], 0.0);
  EXPECT_DOUBLE_EQ(hand.m[1], 0.5);
  EXPECT_DOUBLE_EQ(hand.m[2], 0.5);
}

TEST(RunningMax, RequiresGridAtZero) {
  EXPECT_THROW(running_max(make_path({0.5, 1.0}, {0.0, 1.0})), std::invalid_argument);
}

TEST(RunningMax, InvariantsOnRandomPaths) {
  const auto grid = TimeGrid::uniform_to(4.0, 1.0 / 64.0);
  for (std::uint64_t r = 0; r < 20; ++r) {
    const auto p = sample_path(HurstParam(0.6), grid, Seed{2, r});
    const auto m = running_max(p);
    const auto n = netput(p);
    EXPECT_GE(m.m[0], 0.0);
    for (Eigen::Index i = 1; i < m.m.size(); ++i) {
      EXPECT_GE(m.m[i], m.m[i - 1]);
      EXPECT_GE(m.m[i], n.values[i]);
    }
  }
}

TEST(Workload, SpecExamples) {
  const auto zero = workload(make_path({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}));
  EXPECT_EQ(zero.q, Eigen::VectorXd::Zero(3));

  const auto rate_one = workload(make_path({0.0, 0.25, 1.0, 3.0}, {0.0, 0.5, 2.0, 6.0}));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(rate_one.q[i], rate_one.grid[static_cast<std::size_t>(i)]);

  const auto started = workload(make_path({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}), 1.5);
  EXPECT_DOUBLE_EQ(started.q[0], 1.5);
  EXPECT_DOUBLE_EQ(started.q[1], 0.5);
  EXPECT_DOUBLE_EQ(started.q[2], 0.0);
  EXPECT_THROW(workload(make_path({0.0, 1.0}, {0.0, 0.0}), -1.0), std::invalid_argument);
}

// Lindley recursion against the double supremum on every grid of up to
// 12 points, with random non-uniform spacing and random increments.
TEST(Workload, MatchesBruteForceDoubleSupremum) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> gap(0.05, 1.0);
  std::normal_distribution<double> inc(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 11);
    std::vector<double> t{0.0}, a{0.0};
    for (std::size_t i = 1; i < n; ++i) {
      t.push_back(t.back() + gap(rng));
      a.push_back(a.back() + inc(rng));
    }
    const auto q = workload(make_path(t, a)).q;
    const auto brute = oracle::workload_brute(t, a);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(q[static_cast<Eigen::Index>(i)], brute[i], 1e-12);
  }
}

TEST(BusyPeriods, SpecExamples) {
  EXPECT_TRUE(busy_periods(make_trace({0, 0, 0})).empty());
  const auto bp = busy_periods(make_trace({0, 1, 1, 0, 2, 0}));
  ASSERT_EQ(bp.size(), 2u);
  EXPECT_EQ(bp[0], (Interval{1, 2}));
  EXPECT_EQ(bp[1], (Interval{4, 4}));
  const auto all = busy_periods(make_trace({3, 1, 2}));
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0], (Interval{0, 2}));
}

TEST(BusyPeriods, OngoingQuery) {
  const auto trace = make_trace({0, 1, 1, 0, 2, 0});
  const auto idle = ongoing_busy_period(trace, 3);
  EXPECT_FALSE(idle.busy);
  EXPECT_EQ(idle.length, 0.0);
  const auto busy = ongoing_busy_period(trace, 2);
  EXPECT_TRUE(busy.busy);
  EXPECT_EQ(busy.interval, (Interval{1, 2}));
  EXPECT_GT(busy.length, 0.0);
}

TEST(BusyPeriods, InvariantsOnSimulatedTrace) {
  const auto p = sample_path(HurstParam(0.7), TimeGrid::uniform_to(50.0, 1.0 / 16.0), Seed{8, 0});
  const auto w = workload(p);
  const auto bp = busy_periods(w);
  ASSERT_FALSE(bp.empty());
  for (std::size_t k = 0; k < bp.size(); ++k) {
    EXPECT_LE(bp[k].start, bp[k].end);
    if (k) EXPECT_GT(bp[k].start, bp[k - 1].end + 1);
    for (std::size_t i = bp[k].start; i <= bp[k].end; ++i) EXPECT_GT(w.q[static_cast<Eigen::Index>(i)], 0.0);
    if (bp[k].start > 0) EXPECT_EQ(w.q[static_cast<Eigen::Index>(bp[k].start - 1)], 0.0);
    if (bp[k].end + 1 < w.grid.size()) EXPECT_EQ(w.q[static_cast<Eigen::Index>(bp[k].end + 1)], 0.0);
  }
}

TEST(RunningMaxSamples, NestedAcrossHorizons) {
  const double horizons[] = {1.0, 2.0, 4.0};
  const auto s = sample_running_maxima(HurstParam(0.7), horizons, 8.0, 500, 1.0 / 64.0, 3);
  ASSERT_EQ(s.at_horizon.size(), 3u);
  for (std::size_t r = 0; r < s.reps; ++r) {
    EXPECT_LE(s.at_horizon[0][r], s.at_horizon[1][r]);
    EXPECT_LE(s.at_horizon[1][r], s.at_horizon[2][r]);
    EXPECT_LE(s.at_horizon[2][r], s.at_ref[r]);
  }
}

TEST(RunningMaxSamples, MatchesSinglePathComputation) {
  const double horizons[] = {1.0};
  const double step = 1.0 / 32.0;
  const auto s = sample_running_maxima(HurstParam(0.6), horizons, 4.0, 3, step, 21);
  for (std::uint64_t r = 0; r < 3; ++r) {
    const auto p = sample_path(HurstParam(0.6), TimeGrid::uniform_to(4.0, step), Seed{21, r});
    const auto m = running_max(p);
    EXPECT_DOUBLE_EQ(s.at_ref[r], m.m[m.m.size() - 1]);
    EXPECT_DOUBLE_EQ(s.at_horizon[0][r], m.m[32]);
  }
}

TEST(EstimateGamma, RejectsBadHorizons) {
  EXPECT_THROW(estimate_gamma(HurstParam(0.5), 1.0, 8.0, 8.0, 10, 0.01, 1), std::invalid_argument);
  EXPECT_THROW(estimate_gamma(HurstParam(0.5), 1.0, 9.0, 8.0, 10, 0.01, 1), std::invalid_argument);
}

TEST(EstimateGamma, HugeLevelGivesZero) {
  const auto g = estimate_gamma(HurstParam(0.5), 1e6, 1.0, 4.0, 200, 1.0 / 64.0, 1);
  EXPECT_EQ(g.estimate, 0.0);
  EXPECT_EQ(g.count, 0u);
  // fewer than five events: exact interval, upper bound 1 - 0.025^{1/200}
  EXPECT_NEAR(g.ci_upper, 1.0 - std::pow(0.025, 1.0 / 200.0), 1e-6);
}

TEST(EstimateGamma, CountsIdentityAndNonnegativity) {
  std::vector<GammaOutcome> spool;
  const auto g = estimate_gamma(HurstParam(0.7), 0.5, 1.0, 8.0, 2000, 1.0 / 64.0, 12, &spool);
  EXPECT_GE(g.estimate, 0.0);
  EXPECT_EQ(g.count, g.hits_ref - g.hits_t);
  EXPECT_DOUBLE_EQ(g.estimate, static_cast<double>(g.count) / 2000.0);
  ASSERT_EQ(spool.size(), 2000u);
  std::size_t hits_t = 0, hits_ref = 0;
  for (const auto& o : spool) {
    EXPECT_LE(o.m_t, o.m_tref);
    hits_t += o.hit_t;
    hits_ref += o.hit_tref;
  }
  EXPECT_EQ(hits_t, g.hits_t);
  EXPECT_EQ(hits_ref, g.hits_ref);

  std::ostringstream os;
  write_gamma_spool(os, spool);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "rep,M_t,M_tref,hit_t,hit_tref");
}

TEST(EstimateGamma, NonIncreasingInHorizonAndLevelOnSamePaths) {
  const HurstParam h(0.6);
  std::size_t prev = SIZE_MAX;
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    const auto g = estimate_gamma(h, 0.8, t, 8.0, 1000, 1.0 / 64.0, 4);
    EXPECT_LE(g.count, prev);
    prev = g.count;
  }
  std::size_t prev_ref = SIZE_MAX;
  for (double x : {0.25, 0.5, 1.0, 2.0}) {
    const auto g = estimate_gamma(h, x, 1.0, 8.0, 1000, 1.0 / 64.0, 4);
    EXPECT_LE(g.hits_ref, prev_ref);
    prev_ref = g.hits_ref;
  }
}

// P(M > x) = exp(-2x) for the Brownian case. A maximum read on a grid of
// step d behaves like the continuous one at the raised level
// x + beta sqrt(d), beta = -zeta(1/2) / sqrt(2 pi); the finite reference
// horizon is negligible here.
TEST(EstimateGamma, BrownianReferenceTailAgainstClosedForm) {
  const std::size_t reps = 100000;
  const auto g = estimate_gamma(HurstParam(0.5), 0.5, 8.0, 64.0, reps, 1.0 / 256.0, 99);
  const double p = static_cast<double>(g.hits_ref) / static_cast<double>(reps);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
  const double beta = 1.4603545088095868 / std::sqrt(2.0 * std::numbers::pi);
  const double target = std::exp(-2.0 * (0.5 + beta * std::sqrt(1.0 / 256.0)));
  EXPECT_GT(g.estimate, 0.0);
  EXPECT_LT(g.estimate, std::exp(-1.0));
  EXPECT_LT(std::abs(p - target), 5.0 * se) << "p=" << p << " se=" << se;
  // The exact gamma(0.5, 8) is tiny; the estimate must be of that order.
  EXPECT_LT(g.estimate, 10.0 * oracle::bm_gamma(0.5, 8.0) + 5.0 * g.half_width + 1e-4);
}

// Direct and unit-time estimates of gamma(x, t) agree within their 95%
// intervals.
TEST(EstimateGamma, SelfSimilarRescalingAgrees) {
  struct Probe {
    double h, x, t;
  };
  for (const Probe pr : {Probe{0.5, 0.5, 2.0}, Probe{0.5, 1.0, 1.0}, Probe{0.5, 0.3, 4.0}, Probe{0.7, 0.5, 2.0},
                         Probe{0.7, 1.0, 1.0}, Probe{0.7, 0.8, 4.0}}) {
    const double step = 1.0 / 64.0;
    const auto direct = estimate_gamma(HurstParam(pr.h), pr.x, pr.t, 8.0 * pr.t, 4000, step, 31);
    const auto scaled = estimate_gamma_rescaled(HurstParam(pr.h), pr.x, pr.t, 8.0 * pr.t, 4000, step, 57);
    EXPECT_LE(direct.ci_lower, scaled.ci_upper) << pr.h << " " << pr.x << " " << pr.t;
    EXPECT_LE(scaled.ci_lower, direct.ci_upper) << pr.h << " " << pr.x << " " << pr.t;
  }
}

TEST(EstimateGamma, BitIdenticalAcrossRuns) {
  const auto a = estimate_gamma(HurstParam(0.7), 0.5, 1.0, 4.0, 3000, 1.0 / 64.0, 5);
  const auto b = estimate_gamma(HurstParam(0.7), 0.5, 1.0, 4.0, 3000, 1.0 / 64.0, 5);
  EXPECT_EQ(a.count, b.count);
  EXPECT_EQ(a.hits_ref, b.hits_ref);
  EXPECT_EQ(a.half_width, b.half_width);
}

TEST(DefaultStep, FollowsPolicy) {
  EXPECT_DOUBLE_EQ(default_step(8.0), 1.0 / 256.0);
  EXPECT_DOUBLE_EQ(default_step(0.5), 0.5 / 256.0);
}
