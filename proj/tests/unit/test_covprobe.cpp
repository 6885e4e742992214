#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fbstore/covprobe.h"
#include "fbstore/horizon.h"
#include "fbstore/storage.h"

using namespace fbstore;

namespace {

CovEstimate synthetic(const std::vector<double>& lags, const std::function<double(double)>& f) {
  CovEstimate e;
  e.lags.push_back(0.0);
  e.cov.push_back(f(0.0));
  e.ci_half_width.push_back(0.0);
  for (double t : lags) {
    e.lags.push_back(t);
    e.cov.push_back(f(t));
    e.ci_half_width.push_back(0.0);
  }
  e.reps = 100;
  return e;
}

}  // namespace

TEST(EstimateCov, Validation) {
  const double lags[] = {1.0, 2.0};
  const double bad[] = {2.0, 1.0};
  const double zero[] = {0.0, 1.0};
  EXPECT_THROW(estimate_cov(HurstParam(0.5), lags, 1.0, 29, 0.1, 1), std::invalid_argument);
  EXPECT_THROW(estimate_cov(HurstParam(0.5), lags, 0.0, 30, 0.1, 1), std::invalid_argument);
  EXPECT_THROW(estimate_cov(HurstParam(0.5), bad, 1.0, 30, 0.1, 1), std::invalid_argument);
  EXPECT_THROW(estimate_cov(HurstParam(0.5), zero, 1.0, 30, 0.1, 1), std::invalid_argument);
}

// Rebuilds every replication from the public path/workload API and
// recomputes the covariances and leave-one-out intervals by brute force.
TEST(EstimateCov, MatchesBruteForceRecomputation) {
  const double step = 1.0 / 32.0, warmup = 2.0;
  const double lags[] = {0.5, 1.0};
  const std::size_t reps = 40;
  const HurstParam h(0.7);
  const auto est = estimate_cov(h, lags, warmup, reps, step, 9);
  ASSERT_EQ(est.lags.size(), 3u);
  EXPECT_EQ(est.lags[0], 0.0);

  const auto grid = TimeGrid::uniform_to(warmup + 1.0, step);
  std::vector<std::array<double, 3>> q(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto w = workload(sample_path(h, grid, Seed{9, r}));
    q[r] = {w.q[64], w.q[80], w.q[96]};
  }
  auto cov = [&](std::size_t c, std::size_t skip) {
    double m0 = 0.0, mc = 0.0, n = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      if (r == skip) continue;
      m0 += q[r][0];
      mc += q[r][c];
      n += 1.0;
    }
    m0 /= n;
    mc /= n;
    double s = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      if (r != skip) s += (q[r][0] - m0) * (q[r][c] - mc);
    }
    return s / (n - 1.0);
  };
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(est.cov[c], cov(c, SIZE_MAX), 1e-12);
    std::vector<double> loo(reps);
    double mean = 0.0;
    for (std::size_t r = 0; r < reps; ++r) mean += loo[r] = cov(c, r);
    mean /= static_cast<double>(reps);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    const double hw = 1.959963984540054 * std::sqrt((reps - 1.0) / reps * ss);
    EXPECT_NEAR(est.ci_half_width[c], hw, 1e-10);
  }
  EXPECT_GE(est.cov[0], 0.0);
}

// Reflected Brownian motion with unit drift and variance is exponential
// with rate 2 in equilibrium. The probe is checked against a long-run
// time average at the same step (same discretization), and against the
// closed form with an allowance for the grid-maximum bias.
TEST(EstimateCov, BrownianStationaryVariance) {
  const double step = 1.0 / 256.0;
  const double lags[] = {1.0, 2.0, 4.0, 8.0};
  const auto est = estimate_cov(HurstParam(0.5), lags, 20.0, 4000, step, 3);
  const double se_var = est.ci_half_width[0] / 1.959963984540054;

  // long-run oracle: one path, batch means over 100 batches
  const double horizon = 20000.0;
  const auto n = static_cast<std::size_t>(horizon / step);
  const auto inc = sample_fgn(HurstParam(0.5), n, step, Seed{4242, 0});
  const std::size_t batches = 100, per = n / batches;
  std::vector<double> bm(batches), bv(batches);
  double q = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < per; ++k) {
      q = std::max(q + inc[static_cast<Eigen::Index>(b * per + k)] - step, 0.0);
      s1 += q;
      s2 += q * q;
    }
    bm[b] = s1 / per;
    bv[b] = s2 / per;
  }
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    m1 += bm[b] / batches;
    m2 += bv[b] / batches;
  }
  const double long_var = m2 - m1 * m1;
  double ss = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    const double vb = bv[b] - bm[b] * bm[b];
    ss += (vb - long_var) * (vb - long_var);
  }
  const double long_se = std::sqrt(ss / (batches - 1.0) / batches);

  EXPECT_LT(std::abs(est.cov[0] - long_var), 3.0 * std::hypot(se_var, long_se))
      << "probe " << est.cov[0] << " long-run " << long_var;
  // closed form 1/4; the grid maximum misses about 0.58 sqrt(step) of
  // the level, which shrinks the variance by a few percent
  EXPECT_NEAR(long_var, 0.25, 0.03);
  EXPECT_NEAR(est.mean_q, 0.5, 3.0 * std::sqrt(0.25 / 4000.0) + 0.6 * std::sqrt(step));
  ::testing::Test::RecordProperty("cov_lag1", std::to_string(est.cov[1]));
  ::testing::Test::RecordProperty("cov_lag8", std::to_string(est.cov[4]));
}

TEST(EstimateCov, DeterministicPerSeed) {
  const double lags[] = {1.0, 2.0};
  const auto a = estimate_cov(HurstParam(0.7), lags, 5.0, 50, 1.0 / 32.0, 11);
  const auto b = estimate_cov(HurstParam(0.7), lags, 5.0, 50, 1.0 / 32.0, 11);
  EXPECT_EQ(a.cov, b.cov);
  EXPECT_EQ(a.ci_half_width, b.ci_half_width);
}

TEST(DefaultWarmup, UsesHorizonAtThreeMeans) {
  const double step = 1.0 / 32.0;
  const double w = default_warmup(HurstParam(0.7), 0.503, step, 5, 100, 20.0);
  const double lag[] = {step};
  const auto pilot = estimate_cov(HurstParam(0.7), lag, 20.0, 100, step, 5);
  EXPECT_DOUBLE_EQ(w, horizon(HorizonRequest(HurstParam(0.7), 0.503, 3.0 * pilot.mean_q, 0.01)).t);
  EXPECT_GT(w, 0.0);
}

TEST(Conjecture, PlantedPowerLaw) {
  const std::vector<double> lags{1, 2, 4, 8, 16, 32, 64};
  const auto rep = conjecture_diagnostic(synthetic(lags, [](double t) { return 2.0 * std::pow(t, -0.6); }), HurstParam(0.7));
  EXPECT_NEAR(rep.power_exponent, -0.6, 1e-8);
  EXPECT_NEAR(rep.power_exponent_target, -0.6, 1e-12);
  EXPECT_NEAR(rep.power_amplitude, 2.0, 1e-8);
  EXPECT_NEAR(rep.power_r_squared, 1.0, 1e-12);
  EXPECT_EQ(rep.preferred, DecayModel::power);
  EXPECT_GE(rep.power_r_squared - rep.weibull_r_squared, 0.05);
}

TEST(Conjecture, PlantedWeibull) {
  const std::vector<double> lags{1, 2, 4, 8, 16, 32, 64};
  const auto rep =
      conjecture_diagnostic(synthetic(lags, [](double t) { return std::exp(-0.5 * std::pow(t, 0.6)); }), HurstParam(0.7));
  EXPECT_NEAR(rep.weibull_rate, 0.5, 1e-8);
  EXPECT_NEAR(rep.weibull_amplitude, 1.0, 1e-8);
  EXPECT_EQ(rep.preferred, DecayModel::weibull);
}

TEST(Conjecture, PlantedNoiseWithinThreeStandardErrors) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> lags;
  for (int k = 0; k < 24; ++k) lags.push_back(std::pow(2.0, k / 3.0));
  const auto est = synthetic(lags, [&](double t) { return 2.0 * std::pow(t, -0.6) * std::exp(noise(rng)); });
  const auto rep = conjecture_diagnostic(est, HurstParam(0.7));
  EXPECT_LT(std::abs(rep.power_amplitude - 2.0), 3.0 * rep.power_amplitude_se);
}

TEST(Conjecture, InconclusiveWhenFitsTie) {
  // a straight line in both axes is impossible, but a two-point-like shape
  // on a narrow lag range fits both models almost perfectly
  const std::vector<double> lags{1.0, 1.01, 1.02, 1.03};
  const auto rep = conjecture_diagnostic(synthetic(lags, [](double t) { return 1.0 / t; }), HurstParam(0.7));
  EXPECT_EQ(rep.preferred, DecayModel::inconclusive);
}

TEST(Conjecture, NeedsFourPositiveLags) {
  const std::vector<double> lags{1, 2, 4, 8};
  EXPECT_THROW(conjecture_diagnostic(synthetic(lags, [](double t) { return t > 5 ? -0.1 : 1.0 / (1.0 + t); }),
                                     HurstParam(0.7)),
               std::invalid_argument);
}

TEST(Conjecture, RealRunProducesReport) {
  const double lags[] = {1.0, 2.0, 4.0, 8.0};
  const auto est = estimate_cov(HurstParam(0.7), lags, 10.0, 200, 1.0 / 64.0, 2);
  try {
    const auto rep = conjecture_diagnostic(est, HurstParam(0.7));
    EXPECT_TRUE(rep.preferred == DecayModel::power || rep.preferred == DecayModel::weibull ||
                rep.preferred == DecayModel::inconclusive);
  } catch (const std::invalid_argument&) {
    // a negative sampled covariance leaves too few lags; also a valid outcome
  }
}
