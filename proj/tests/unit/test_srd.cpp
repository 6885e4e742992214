#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fbstore/rate.h"
#include "fbstore/srd.h"
#include "oracles.h"

using namespace fbstore;

namespace {

// Independent sup_s (s a - Lambda(s)) over a bounded window.
double legendre_oracle(const CumulantModel& m, double a, double lo, double hi) {
  return -oracle::ternary_min([&](double s) { return -(s * a - m(s)); }, lo, hi);
}

}  // namespace

TEST(Cumulant, SpecExamples) {
  const auto g = CumulantModel::gaussian_iid(0.0, 1.0);
  const auto mk = CumulantModel::markov_fluid_2state(1.0, 1.0, 2.0);
  const auto cp = CumulantModel::compound_poisson_exp(0.5, 1.0);
  EXPECT_EQ(g(0.0), 0.0);
  EXPECT_EQ(mk(0.0), 0.0);
  EXPECT_EQ(cp(0.0), 0.0);
  EXPECT_DOUBLE_EQ(cumulant(g, 2.0), 2.0);
  EXPECT_NEAR(mk(1.0), std::sqrt(2.0), 1e-14);
  EXPECT_DOUBLE_EQ(cp(0.5), 0.5);
  EXPECT_THROW(cp(1.0), std::domain_error);
  EXPECT_THROW(cp(2.0), std::domain_error);
}

TEST(Cumulant, MarkovMatchesEigenvalues) {
  const double a = 0.7, b = 1.9, r = 2.5;
  const auto m = CumulantModel::markov_fluid_2state(a, b, r);
  for (double s : {-3.0, -0.5, 0.4, 2.0}) {
    Eigen::Matrix2d q;
    q << -a, a, b, -b + r * s;
    const double top = q.eigenvalues().real().maxCoeff();
    EXPECT_NEAR(m(s), top, 1e-12);
  }
  EXPECT_DOUBLE_EQ(m.mean_rate(), r * a / (a + b));
}

TEST(Cumulant, ConvexAndMeanSlope) {
  const CumulantModel models[] = {CumulantModel::gaussian_iid(0.3, 2.0), CumulantModel::markov_fluid_2state(1.0, 2.0, 2.0),
                                  CumulantModel::compound_poisson_exp(0.5, 2.0)};
  for (const auto& m : models) {
    const double h = 1e-5;
    EXPECT_NEAR((m(h) - m(-h)) / (2 * h), m.mean_rate(), 1e-6) << m.describe();
    for (double s = -2.0; s < 1.5; s += 0.25) {
      EXPECT_LE(m(s), 0.5 * (m(s - 0.2) + m(s + 0.2)) + 1e-12) << m.describe();
    }
  }
}

TEST(Cumulant, ConstructionValidates) {
  EXPECT_THROW(CumulantModel::gaussian_iid(0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(CumulantModel::markov_fluid_2state(1.0, -1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(CumulantModel::compound_poisson_exp(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(CumulantModel::tabulated({-1.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(CumulantModel::tabulated({-1.0, 0.0, 1.0}, {-0.4, 0.1, 0.6}), std::invalid_argument);
}

TEST(Legendre, GaussianClosedForm) {
  const auto g = CumulantModel::gaussian_iid(0.0, 1.0);
  EXPECT_NEAR(legendre(g, 1.0), 0.5, 1e-12);
  for (double a : {-2.0, -0.3, 0.0, 0.8, 3.0}) EXPECT_NEAR(legendre(g, a), 0.5 * a * a, 1e-9);
  const auto g2 = CumulantModel::gaussian_iid(0.5, 1.0);
  EXPECT_NEAR(legendre(g2, 1.0), 0.125, 1e-12);
}

TEST(Legendre, ZeroAtMeanRate) {
  const CumulantModel models[] = {CumulantModel::gaussian_iid(0.3, 2.0), CumulantModel::markov_fluid_2state(1.0, 2.0, 2.0),
                                  CumulantModel::compound_poisson_exp(0.5, 2.0)};
  for (const auto& m : models) EXPECT_NEAR(legendre(m, m.mean_rate()), 0.0, 1e-12) << m.describe();
}

TEST(Legendre, MarkovPeakBoundaryAndSentinel) {
  const auto m = CumulantModel::markov_fluid_2state(1.0, 1.0, 2.0);
  EXPECT_TRUE(std::isinf(legendre(m, 2.1)));
  EXPECT_TRUE(std::isinf(legendre(m, -0.1)));
  EXPECT_DOUBLE_EQ(legendre(m, 2.0), 1.0);  // stay-on rate b
  // approaching the peak from inside converges to the boundary value
  EXPECT_NEAR(legendre(m, 2.0 - 1e-7), 1.0, 1e-3);
  EXPECT_NEAR(legendre(m, 1.5), legendre_oracle(m, 1.5, -50.0, 50.0), 1e-8);
}

TEST(Legendre, FenchelYoungAndConvexity) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> probe(-3.0, 0.9);
  const CumulantModel models[] = {CumulantModel::gaussian_iid(0.2, 1.5), CumulantModel::markov_fluid_2state(1.0, 2.0, 2.0),
                                  CumulantModel::compound_poisson_exp(0.5, 1.0)};
  for (const auto& m : models) {
    for (double a : {0.1, 0.5, 1.0, 1.5}) {
      if (a >= m.peak_rate()) continue;
      const auto res = legendre_solve(m, a);
      EXPECT_NEAR(res.argmax * a - m(res.argmax), res.value, 1e-8) << m.describe() << " a=" << a;
      for (int k = 0; k < 20; ++k) {
        const double s = probe(rng);
        if (!m.domain().contains(s)) continue;
        EXPECT_LE(s * a - m(s), res.value + 1e-8);
      }
    }
    for (double a = 0.2; a < 1.6; a += 0.1) {
      if (a + 0.1 >= m.peak_rate()) continue;
      EXPECT_LE(legendre(m, a), 0.5 * (legendre(m, a - 0.1) + legendre(m, a + 0.1)) + 1e-8);
    }
  }
}

TEST(Legendre, TabulatedMatchesSourceModel) {
  const auto g = CumulantModel::gaussian_iid(0.2, 1.0);
  std::vector<double> s, l;
  for (int k = -400; k <= 400; ++k) {
    s.push_back(k * 0.01);
    l.push_back(g(k * 0.01));
  }
  const auto t = CumulantModel::tabulated(s, l);
  EXPECT_NEAR(t.mean_rate(), 0.2, 1e-12);
  EXPECT_NEAR(legendre(t, 1.0), legendre(g, 1.0), 1e-4);
}

TEST(KRate, SpecExamples) {
  const auto g = CumulantModel::gaussian_iid(0.0, 1.0);
  EXPECT_NEAR(k_rate(g, 0.0), -0.5, 1e-10);
  const auto k2 = k_rate_solve(g, 2.0);
  EXPECT_NEAR(k2.value, -4.0, 1e-10);
  EXPECT_NEAR(k2.s_star, 2.0, 1e-4);
  const auto k05 = k_rate_solve(g, 0.5);
  EXPECT_NEAR(k05.value, -1.125, 1e-10);
  EXPECT_NEAR(k05.s_star, 1.0, 1e-6);
  EXPECT_FALSE(k2.horizon_flag);
}

TEST(KRate, MatchesSingleConstraintRateAtHalf) {
  const auto g = CumulantModel::gaussian_iid(0.0, 1.0);
  for (double x : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    EXPECT_NEAR(k_rate(g, x), single_constraint_rate(HurstParam(0.5), x), 1e-8) << x;
  }
}

TEST(KRate, IndependentOneDimensionalOracle) {
  const auto g = CumulantModel::gaussian_iid(0.1, 0.7);
  for (double x : {0.0, 0.7, 3.0}) {
    // I(a) = (a - mu)^2 / (2 sigma2) in closed form here
    const double ref = -oracle::ternary_min(
        [&](double s) {
          const double a = (x + s) / s;
          return s * (a - 0.1) * (a - 0.1) / 1.4;
        },
        1.0, 10.0 * std::max(1.0, x));
    EXPECT_NEAR(k_rate(g, x), ref, 1e-8);
  }
}

TEST(KRate, DecreasingInLevel) {
  const CumulantModel models[] = {CumulantModel::gaussian_iid(0.0, 1.0), CumulantModel::markov_fluid_2state(1.0, 2.0, 2.0),
                                  CumulantModel::compound_poisson_exp(0.5, 1.0)};
  for (const auto& m : models) {
    double prev = 0.0;
    for (double x = 0.0; x <= 4.0; x += 0.5) {
      const double k = k_rate(m, x);
      EXPECT_LT(k, prev + 1e-12) << m.describe() << " x=" << x;
      prev = k;
    }
  }
}

TEST(KRate, HorizonFlagWhenTruncated) {
  const auto g = CumulantModel::gaussian_iid(0.0, 1.0);
  const auto k = k_rate_solve(g, 5.0, 2.0);  // s* = 5 lies beyond s_max = 2
  EXPECT_TRUE(k.horizon_flag);
  EXPECT_NEAR(k.s_star, 2.0, 1e-6);
}

TEST(DecayRate, Examples) {
  EXPECT_NEAR(di_decay_rate(CumulantModel::gaussian_iid(0.0, 1.0)), -0.5, 1e-12);
  EXPECT_NEAR(di_decay_rate(CumulantModel::gaussian_iid(0.5, 1.0)), -0.125, 1e-12);
  const auto m = CumulantModel::markov_fluid_2state(1.0, 2.0, 2.0);
  const double rate = di_decay_rate(m);
  EXPECT_LT(rate, 0.0);
  EXPECT_NEAR(rate, -legendre_oracle(m, 1.0, -50.0, 50.0), 1e-8);
  // mean rate exactly 1 is not stable
  EXPECT_THROW(di_decay_rate(CumulantModel::markov_fluid_2state(1.0, 1.0, 2.0)), std::invalid_argument);
}

TEST(GoldenSection, FindsBoundaryMinimum) {
  const auto r = golden_section_minimize([](double x) { return x; }, 1.0, 3.0);
  EXPECT_EQ(r.argmin, 1.0);
  const auto q = golden_section_minimize([](double x) { return (x - 2.2) * (x - 2.2); }, 0.0, 5.0);
  EXPECT_NEAR(q.argmin, 2.2, 1e-8);
}
