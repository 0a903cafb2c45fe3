#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mwl/errors.hpp"
#include "mwl/norms.hpp"

using namespace mwl;

namespace {

StepFunction random_function(std::mt19937_64& rng, int depth, double zero_fraction, bool signed_values = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const DyadicGrid g(depth);
  std::vector<double> v(g.cell_count());
  for (double& x : v) {
    x = u(rng) < zero_fraction ? 0.0 : std::exp(3.0 * u(rng) - 1.5);
    if (signed_values && u(rng) < 0.5) x = -x;
  }
  return StepFunction(g, std::move(v));
}

WeightedMeasure random_measure(std::mt19937_64& rng, int depth) {
  return WeightedMeasure(random_function(rng, depth, 0.0));
}

double strict_measure(const StepFunction& g, const WeightedMeasure& mu, double t) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::fabs(g[i]) > t) s += mu.cell_mass(i);
  }
  return s;
}

// int_0^inf mu{|g| > t}^{1/p} dt by a midpoint rule on [0, max |g|].
double lorentz_quadrature(const StepFunction& g, const WeightedMeasure& mu, double p, int steps) {
  double top = 0.0;
  for (double x : g.values()) top = std::max(top, std::fabs(x));
  const double h = top / steps;
  double s = 0.0;
  for (int k = 0; k < steps; ++k) s += std::pow(strict_measure(g, mu, (k + 0.5) * h), 1.0 / p);
  return s * h;
}

StepFunction indicator(const DyadicGrid& g, std::size_t a, std::size_t b, double c = 1.0) {
  std::vector<double> v(g.cell_count(), 0.0);
  for (std::size_t i = a; i < b; ++i) v[i] = c;
  return StepFunction(g, std::move(v));
}

}  // namespace

TEST(Measure, TotalMustBePositive) {
  const DyadicGrid g(2);
  EXPECT_THROW(WeightedMeasure(StepFunction::zero(g)), DomainError);
  EXPECT_THROW(WeightedMeasure(StepFunction(g, {1, -1, 1, 1})), DomainError);
  EXPECT_DOUBLE_EQ(WeightedMeasure(StepFunction(g, {1, 2, 3, 2})).total(), 2.0);
}

TEST(Distribution, TableShape) {
  std::mt19937_64 rng(1);
  const auto g = random_function(rng, 6, 0.3, true);
  const auto mu = random_measure(rng, 6);
  const auto t = distribution(g, mu);
  ASSERT_FALSE(t.levels.empty());
  for (std::size_t i = 1; i < t.levels.size(); ++i) {
    EXPECT_LT(t.levels[i], t.levels[i - 1]);
    EXPECT_LT(t.cumulative[i - 1], t.cumulative[i]);
  }
  double support = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) support += g[i] != 0.0 ? mu.cell_mass(i) : 0.0;
  EXPECT_NEAR(t.cumulative.back(), support, 1e-12 * support);
  EXPECT_GT(t.levels.back(), 0.0);
}

TEST(LpNorm, Examples) {
  const DyadicGrid g(4);
  const auto mu = WeightedMeasure::lebesgue(g);
  for (double p : {0.5, 1.0, 2.0}) {
    EXPECT_DOUBLE_EQ(lp_norm(StepFunction::constant(g, 1.0), mu, p), 1.0);
    EXPECT_NEAR(lp_norm(indicator(g, 2, 7), mu, p), std::pow(5.0 / 16.0, 1.0 / p), 1e-15);
  }
}

TEST(WeakNorm, Examples) {
  const DyadicGrid g(4);
  std::vector<double> d(16);
  for (int i = 0; i < 16; ++i) d[i] = 1.0 + i;
  const WeightedMeasure mu{StepFunction(g, d)};
  const double mass = (3 + 4 + 5 + 6) / 16.0;
  for (double p : {1.0 / 3.0, 0.5, 1.0, 2.0}) {
    const auto w = weak_quasinorm(indicator(g, 2, 6), mu, p);
    EXPECT_NEAR(w.value, std::pow(mass, 1.0 / p), 1e-14 * w.value);
    EXPECT_EQ(w.witness_t, 1.0);
    const auto c = weak_quasinorm(StepFunction::constant(g, 3.0), mu, p);
    EXPECT_NEAR(c.value, 3.0 * std::pow(mu.total(), 1.0 / p), 1e-14 * c.value);
  }
  EXPECT_EQ(weak_quasinorm(StepFunction::zero(g), mu, 0.5).value, 0.0);
}

TEST(WeakNorm, MatchesDenseThresholdOracle) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto g = random_function(rng, 5, 0.4, true);
    const auto mu = random_measure(rng, 5);
    const double p = t % 2 ? 0.5 : 1.0;
    double top = 0.0;
    for (double x : g.values()) top = std::max(top, std::fabs(x));
    double oracle = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double thr = top * 1e-6 * std::pow(1e6, k / 9999.0);
      oracle = std::max(oracle, thr * std::pow(strict_measure(g, mu, thr), 1.0 / p));
    }
    for (double x : g.values()) {
      if (x == 0.0) continue;
      const double thr = std::fabs(x) * (1 - 1e-13);
      oracle = std::max(oracle, thr * std::pow(strict_measure(g, mu, thr), 1.0 / p));
    }
    const auto w = weak_quasinorm(g, mu, p);
    EXPECT_NEAR(w.value, oracle, 1e-9 * w.value);
    // The witness level attains the value.
    double at = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) at += std::fabs(g[i]) >= w.witness_t ? mu.cell_mass(i) : 0.0;
    EXPECT_NEAR(w.witness_t * std::pow(at, 1.0 / p), w.value, 1e-12 * w.value);
  }
}

TEST(LorentzNorm, Examples) {
  const DyadicGrid g(5);
  std::mt19937_64 rng(3);
  const auto mu = random_measure(rng, 5);
  auto mass = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = a; i < b; ++i) s += mu.cell_mass(i);
    return s;
  };
  for (double p : {1.5, 3.0, 5.0}) {
    EXPECT_NEAR(lorentz_p1_norm(indicator(g, 4, 20), mu, p), std::pow(mass(4, 20), 1.0 / p), 1e-14);
    // 2 chi_A + chi_B with A = [0, 8), B = [8, 20).
    const auto two_level = add(indicator(g, 0, 8, 2.0), indicator(g, 8, 20));
    const double closed = std::pow(mass(0, 20), 1.0 / p) + std::pow(mass(0, 8), 1.0 / p);
    const double lz = lorentz_p1_norm(two_level, mu, p);
    EXPECT_NEAR(lz, closed, 1e-14 * closed);
    EXPECT_NEAR(lz, lorentz_quadrature(two_level, mu, p, 100000), 1e-6 * closed);
    EXPECT_EQ(lorentz_p1_norm(StepFunction::zero(g), mu, p), 0.0);
  }
  EXPECT_THROW(lorentz_p1_norm(indicator(g, 0, 3), mu, 1.0), DomainError);
}

TEST(LorentzNorm, MatchesQuadratureOnRandomFunctions) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 5; ++t) {
    const auto g = random_function(rng, 4, 0.3, true);
    const auto mu = random_measure(rng, 4);
    const double exact = lorentz_p1_norm(g, mu, 3.0);
    EXPECT_NEAR(exact, lorentz_quadrature(g, mu, 3.0, 200000), 1e-5 * exact);
  }
}

TEST(NormsProperty, Scaling) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto g = random_function(rng, 6, 0.2, true);
    const auto mu = random_measure(rng, 6);
    const double c = t % 2 ? -3.5 : 0.01;
    for (double p : {0.5, 1.0, 2.0}) {
      EXPECT_NEAR(weak_quasinorm(scale(g, c), mu, p).value, std::fabs(c) * weak_quasinorm(g, mu, p).value,
                  1e-12 * std::fabs(c) * weak_quasinorm(g, mu, p).value);
      EXPECT_NEAR(lp_norm(scale(g, c), mu, p), std::fabs(c) * lp_norm(g, mu, p), 1e-12 * std::fabs(c) * lp_norm(g, mu, p));
    }
    EXPECT_NEAR(lorentz_p1_norm(scale(g, c), mu, 3.0), std::fabs(c) * lorentz_p1_norm(g, mu, 3.0),
                1e-12 * std::fabs(c) * lorentz_p1_norm(g, mu, 3.0));
  }
}

TEST(NormsProperty, ChebyshevDomination) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const auto g = random_function(rng, 6, 0.3, true);
    const auto mu = random_measure(rng, 6);
    for (double p : {1.0 / 3.0, 0.5, 1.0, 2.0, 4.0}) {
      EXPECT_LE(weak_quasinorm(g, mu, p).value, lp_norm(g, mu, p) * (1 + 1e-12));
    }
  }
}

TEST(NormsProperty, QuasiTriangleBelowOne) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto f = random_function(rng, 6, 0.5, true), g = random_function(rng, 6, 0.5, true);
    const auto mu = random_measure(rng, 6);
    const auto fg = add(f, g);
    for (double p : {1.0 / 3.0, 0.5}) {
      const double lhs = std::pow(lp_norm(fg, mu, p), p);
      EXPECT_LE(lhs, (std::pow(lp_norm(f, mu, p), p) + std::pow(lp_norm(g, mu, p), p)) * (1 + 1e-12));
      const double weak = weak_quasinorm(fg, mu, p).value;
      EXPECT_LE(weak, std::pow(2.0, 1.0 / p) * (weak_quasinorm(f, mu, p).value + weak_quasinorm(g, mu, p).value));
    }
  }
}
