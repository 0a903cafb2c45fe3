#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mwl/errors.hpp"
#include "mwl/operators.hpp"
#include "mwl/parallel.hpp"

using namespace mwl;

namespace {

StepFunction random_nonneg(std::mt19937_64& rng, int depth, double zero_fraction = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const DyadicGrid g(depth);
  std::vector<double> v(g.cell_count());
  for (double& x : v) x = u(rng) < zero_fraction ? 0.0 : 3.0 * u(rng);
  return StepFunction(g, std::move(v));
}

double mean(const StepFunction& f, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t i = a; i < b; ++i) s += f[i];
  return s / static_cast<double>(b - a);
}

// Every interval containing x (intervals mode) or every dyadic ancestor of x.
template <class Value>
double sup_over(const DyadicGrid& g, std::size_t x, SupMode mode, Value value) {
  double best = 0.0;
  if (mode == SupMode::dyadic) {
    for (int l = 0; l <= g.depth(); ++l) {
      const std::size_t len = g.cell_count() >> l;
      const std::size_t a = x / len * len;
      best = std::max(best, value(a, a + len));
    }
    return best;
  }
  for (std::size_t a = 0; a <= x; ++a) {
    for (std::size_t b = x + 1; b <= g.cell_count(); ++b) best = std::max(best, value(a, b));
  }
  return best;
}

std::vector<double> maximal_oracle(std::span<const StepFunction> fv, SupMode mode) {
  const auto& g = fv.front().grid();
  std::vector<double> out(g.cell_count());
  for (std::size_t x = 0; x < out.size(); ++x) {
    out[x] = sup_over(g, x, mode, [&](std::size_t a, std::size_t b) {
      double p = 1.0;
      for (const auto& f : fv) p *= mean(abs(f), a, b);
      return p;
    });
  }
  return out;
}

// Flat enumeration of all midpoint tuples.
double riesz_oracle(std::span<const StepFunction> fv, int component, double radius, double x) {
  const auto& g = fv.front().grid();
  const std::size_t n = g.cell_count(), m = fv.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < m; ++i) total *= n;
  double sum = 0.0;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    double prod = 1.0, dist2 = 0.0, num = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t cell = c % n;
      c /= n;
      const double d = x - g.midpoint(cell);
      prod *= fv[i][cell];
      dist2 += d * d;
      if (static_cast<int>(i) == component - 1) num = d;
    }
    if (prod == 0.0 || std::sqrt(dist2) <= radius) continue;
    sum += num / std::pow(dist2, 0.5 * static_cast<double>(m + 1)) * prod;
  }
  return sum * std::pow(g.cell_width(), static_cast<double>(m));
}

void expect_rel(double got, double want, double tol) { EXPECT_NEAR(got, want, tol * std::max(1e-300, std::fabs(want))); }

}  // namespace

TEST(Maximal, ConstantIsFixed) {
  const auto f = StepFunction::constant(DyadicGrid(5), 1.0);
  for (SupMode mode : {SupMode::dyadic, SupMode::intervals}) {
    const auto mf = maximal(f, mode);
    for (double x : mf.values()) EXPECT_DOUBLE_EQ(x, 1.0);
  }
}

TEST(Maximal, DyadicExample) {
  const StepFunction f(DyadicGrid(2), {4, 0, 0, 0});
  EXPECT_EQ(maximal(f, SupMode::dyadic), StepFunction(DyadicGrid(2), {4, 2, 1, 1}));
}

TEST(Maximal, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto f = random_nonneg(rng, 6);
    for (SupMode mode : {SupMode::dyadic, SupMode::intervals}) {
      const std::vector<StepFunction> one{f};
      const auto want = maximal_oracle(one, mode);
      const auto got = maximal(f, mode);
      for (std::size_t x = 0; x < want.size(); ++x) expect_rel(got[x], want[x], 1e-12);
    }
  }
}

TEST(Multilinear, Examples) {
  const DyadicGrid g(2);
  const std::vector<StepFunction> ones(3, StepFunction::constant(g, 1.0));
  const auto mm = multilinear_maximal(ones, SupMode::intervals);
  for (double x : mm.values()) EXPECT_DOUBLE_EQ(x, 1.0);
  const std::vector<StepFunction> apart{StepFunction(g, {4, 0, 0, 0}), StepFunction(g, {0, 0, 0, 4})};
  EXPECT_EQ(multilinear_maximal(apart, SupMode::dyadic), StepFunction::constant(g, 1.0));
}

TEST(Multilinear, SingleSlotIsMaximal) {
  std::mt19937_64 rng(2);
  const std::vector<StepFunction> one{random_nonneg(rng, 7)};
  for (SupMode mode : {SupMode::dyadic, SupMode::intervals}) {
    EXPECT_EQ(multilinear_maximal(one, mode), maximal(one[0], mode));
  }
}

TEST(Multilinear, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 6; ++t) {
    const std::vector<StepFunction> fv{random_nonneg(rng, 5, 0.6), random_nonneg(rng, 5, 0.6),
                                       random_nonneg(rng, 5, 0.2)};
    const std::span<const StepFunction> use(fv.data(), 2 + t % 2);
    for (SupMode mode : {SupMode::dyadic, SupMode::intervals}) {
      const auto want = maximal_oracle(use, mode);
      const auto got = multilinear_maximal(use, mode);
      for (std::size_t x = 0; x < want.size(); ++x) expect_rel(got[x], want[x], 1e-12);
    }
  }
}

TEST(MaximalProperty, PointwiseDomination) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const std::vector<StepFunction> fv{random_nonneg(rng, 8, 0.7), random_nonneg(rng, 8, 0.7),
                                       random_nonneg(rng, 8, 0.7)};
    const std::span<const StepFunction> use(fv.data(), 2 + t % 2);
    for (SupMode mode : {SupMode::dyadic, SupMode::intervals}) {
      const auto mm = multilinear_maximal(use, mode);
      const auto pm = product_of_maximals(use, mode);
      for (std::size_t x = 0; x < mm.size(); ++x) EXPECT_LE(mm[x], pm[x] * (1 + 1e-12));
    }
  }
}

TEST(MaximalProperty, IntervalsDominateDyadic) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const std::vector<StepFunction> fv{random_nonneg(rng, 8), random_nonneg(rng, 8)};
    const auto d = multilinear_maximal(fv, SupMode::dyadic);
    const auto i = multilinear_maximal(fv, SupMode::intervals);
    for (std::size_t x = 0; x < d.size(); ++x) EXPECT_GE(i[x] * (1 + 1e-12), d[x]);
  }
}

TEST(MaximalProperty, Homogeneity) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    const auto f = random_nonneg(rng, 7), g = random_nonneg(rng, 7);
    const double c1 = -2.5, c2 = 0.125;
    for (SupMode mode : {SupMode::dyadic, SupMode::intervals}) {
      const auto mf = maximal(f, mode), mcf = maximal(scale(f, c1), mode);
      for (std::size_t x = 0; x < mf.size(); ++x) expect_rel(mcf[x], std::fabs(c1) * mf[x], 1e-12);
      const std::vector<StepFunction> base{f, g}, scaled{scale(f, c1), scale(g, c2)};
      const auto a = multilinear_maximal(base, mode), b = multilinear_maximal(scaled, mode);
      for (std::size_t x = 0; x < a.size(); ++x) expect_rel(b[x], std::fabs(c1 * c2) * a[x], 1e-12);
    }
  }
}

TEST(MaximalProperty, Monotonicity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const auto g = random_nonneg(rng, 7, 0.0);
    std::vector<double> fv(g.size());
    for (std::size_t i = 0; i < fv.size(); ++i) fv[i] = g[i] * u(rng);
    const StepFunction f(g.grid(), fv);
    for (SupMode mode : {SupMode::dyadic, SupMode::intervals}) {
      const auto mf = maximal(f, mode), mg = maximal(g, mode);
      for (std::size_t x = 0; x < mf.size(); ++x) EXPECT_LE(mf[x], mg[x]);
    }
  }
}

TEST(Riesz, ZeroSlotGivesZero) {
  const DyadicGrid g(5);
  const std::vector<StepFunction> fv{StepFunction::constant(g, 1.0), StepFunction::zero(g)};
  PVConfig cfg;
  cfg.m = 2;
  const auto t = multilinear_riesz(fv, cfg);
  for (double x : t.values()) EXPECT_EQ(x, 0.0);
}

TEST(Riesz, SymmetricInputsCancelAtTheCenter) {
  const DyadicGrid g(6);
  std::vector<double> a(64), b(64);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < 32; ++i) {
    a[i] = a[63 - i] = u(rng);
    b[i] = b[63 - i] = u(rng);
  }
  const std::vector<StepFunction> fv{StepFunction(g, a), StepFunction(g, b)};
  for (int component : {1, 2}) {
    PVConfig cfg;
    cfg.m = 2;
    cfg.component = component;
    EXPECT_LE(std::fabs(multilinear_riesz_at(fv, cfg, 0.5)), 1e-12);
  }
}

TEST(Riesz, MatchesFlatEnumeration) {
  std::mt19937_64 rng(9);
  for (int m : {1, 2, 3}) {
    const int depth = m == 3 ? 4 : 5;
    std::vector<StepFunction> fv;
    for (int i = 0; i < m; ++i) fv.push_back(random_nonneg(rng, depth, 0.4));
    PVConfig cfg;
    cfg.m = m;
    cfg.component = m;
    cfg.exclusion_radius = 0.1;
    const auto got = multilinear_riesz(fv, cfg);
    for (std::size_t x = 0; x < got.size(); ++x) {
      const double want = riesz_oracle(fv, m, 0.1, fv[0].grid().midpoint(x));
      EXPECT_NEAR(got[x], want, 1e-12 * std::max(1.0, std::fabs(want)));
    }
  }
}

TEST(Riesz, HilbertCaseAgreesWithRefinedQuadrature) {
  // f = indicator of the left half, evaluated in the right half.
  PVConfig cfg;
  cfg.exclusion_radius = 1.0 / 16.0;
  for (double x : {0.6, 0.75, 0.9}) {
    const std::vector<StepFunction> coarse{StepFunction(DyadicGrid(1), {1.0, 0.0})};
    const std::vector<StepFunction> a{refine(coarse[0], 7)}, b{refine(coarse[0], 9)};
    const double va = multilinear_riesz_at(a, cfg, x), vb = multilinear_riesz_at(b, cfg, x);
    EXPECT_NEAR(va, vb, 0.02 * std::fabs(vb));
    // Continuum value: int_0^{1/2} dy / (x - y) = log(x / (x - 1/2)).
    EXPECT_NEAR(vb, std::log(x / (x - 0.5)), 0.02 * std::log(x / (x - 0.5)));
  }
}

TEST(Riesz, MultilinearInEachSlot) {
  std::mt19937_64 rng(10);
  const auto f = random_nonneg(rng, 5), g = random_nonneg(rng, 5), h = random_nonneg(rng, 5);
  PVConfig cfg;
  cfg.m = 2;
  const double alpha = 2.0, beta = -0.75;
  const std::vector<StepFunction> combo{add(scale(f, alpha), scale(g, beta)), h}, fh{f, h}, gh{g, h};
  const auto lhs = multilinear_riesz(combo, cfg);
  const auto tf = multilinear_riesz(fh, cfg), tg = multilinear_riesz(gh, cfg);
  for (std::size_t x = 0; x < lhs.size(); ++x) {
    const double want = alpha * tf[x] + beta * tg[x];
    EXPECT_NEAR(lhs[x], want, 1e-12 * (std::fabs(alpha * tf[x]) + std::fabs(beta * tg[x]) + 1e-300));
  }
}

TEST(Riesz, ConfigErrors) {
  const DyadicGrid g(5);
  const std::vector<StepFunction> two(2, StepFunction::constant(g, 1.0));
  PVConfig cfg;
  cfg.m = 2;
  cfg.exclusion_radius = g.cell_width() / 2;
  EXPECT_THROW(multilinear_riesz(two, cfg), ConfigError);
  cfg.exclusion_radius = 0.1;
  cfg.component = 3;
  EXPECT_THROW(multilinear_riesz(two, cfg), ConfigError);
  cfg.component = 1;
  cfg.m = 3;
  EXPECT_THROW(multilinear_riesz(two, cfg), ConfigError);

  // depth 9 with m = 2 exceeds the cap 24 on depth * (m + 1).
  const DyadicGrid big(9);
  const std::vector<StepFunction> sparse{StepFunction(big, std::vector<double>(512, 0.0)),
                                         StepFunction(big, std::vector<double>(512, 0.0))};
  PVConfig capped;
  capped.m = 2;
  EXPECT_THROW(multilinear_riesz(sparse, capped), ConfigError);
  capped.override_cost_cap = true;
  EXPECT_NO_THROW(multilinear_riesz(sparse, capped));
}

TEST(Riesz, ThreadCountDoesNotChangeValues) {
  std::mt19937_64 rng(11);
  const std::vector<StepFunction> fv{random_nonneg(rng, 6), random_nonneg(rng, 6)};
  PVConfig cfg;
  cfg.m = 2;
  set_thread_count(1);
  const auto a = multilinear_riesz(fv, cfg);
  set_thread_count(8);
  const auto b = multilinear_riesz(fv, cfg);
  set_thread_count(1);
  EXPECT_EQ(a, b);
}

TEST(RdfS, Examples) {
  const DyadicGrid g(2);
  const Weight one = Weight::constant(g);
  const StepFunction h(g, {4, 0, 0, 0});
  EXPECT_EQ(rdf_S(h, one, SupMode::dyadic), StepFunction(g, {4, 2, 1, 1}));

  std::mt19937_64 rng(12);
  const auto f = random_nonneg(rng, 6);
  EXPECT_EQ(rdf_S(f, Weight::constant(f.grid()), SupMode::intervals), maximal(f, SupMode::intervals));

  const Weight nu = gen_martingale(3, 6, 0.4, 6);
  const double a1 = a1_constant(nu, SupMode::intervals).value;
  const auto s1 = rdf_S(StepFunction::constant(nu.grid(), 1.0), nu, SupMode::intervals);
  const auto mnu = maximal(nu.values(), SupMode::intervals);
  for (std::size_t x = 0; x < s1.size(); ++x) {
    expect_rel(s1[x], mnu[x] / nu[x], 1e-12);
    EXPECT_LE(s1[x], a1 * (1 + 1e-12));
  }
}

TEST(RdfS, SupNormBoundedByA1) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    const Weight nu = t % 2 ? gen_martingale(t, 7, 0.35, 7) : gen_power(-0.6, 0.1 * t, DyadicGrid(7));
    const double a1 = a1_constant(nu, SupMode::intervals).value;
    const auto h = random_nonneg(rng, 7);
    EXPECT_LE(rdf_S(h, nu, SupMode::intervals).max(), a1 * h.max() * (1 + 1e-12));
  }
}

TEST(RdfR, Examples) {
  const DyadicGrid g(4);
  const Weight one = Weight::constant(g);
  RdFConfig cfg;
  const auto zero = rdf_R(StepFunction::zero(g), one, cfg, SupMode::intervals);
  for (double x : zero.value.values()) EXPECT_EQ(x, 0.0);

  cfg.K0 = 1.0;
  cfg.series_terms = 20;
  const auto r = rdf_R(StepFunction::constant(g, 1.0), one, cfg, SupMode::intervals);
  for (double x : r.value.values()) EXPECT_DOUBLE_EQ(x, 2.0 - std::pow(2.0, -20));
  EXPECT_FALSE(r.contraction_warning);
  EXPECT_DOUBLE_EQ(r.tail_bound, std::pow(2.0, -20));
}

TEST(RdfR, WarnsWhenTheSeriesNeedNotContract) {
  const DyadicGrid g(4);
  RdFConfig cfg;
  cfg.K0 = 0.25;
  const auto r = rdf_R(StepFunction::constant(g, 1.0), Weight::constant(g), cfg, SupMode::intervals);
  EXPECT_TRUE(r.contraction_warning);
  EXPECT_TRUE(std::isinf(r.tail_bound));
  cfg.K0 = 0.0;
  EXPECT_THROW(rdf_R(StepFunction::constant(g, 1.0), Weight::constant(g), cfg, SupMode::intervals), ConfigError);
}

TEST(RdfRProperty, IterationBullets) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 10; ++t) {
    const Weight nu = gen_martingale(100 + t, 6, 0.3, 6);
    const auto h = random_nonneg(rng, 6, 0.8);
    RdFConfig cfg;
    cfg.K0 = a1_constant(nu, SupMode::intervals).value;
    const auto r = rdf_R(h, nu, cfg, SupMode::intervals);
    ASSERT_FALSE(r.contraction_warning);
    const auto s = rdf_S(r.value, nu, SupMode::intervals);
    for (std::size_t x = 0; x < h.size(); ++x) {
      EXPECT_LE(h[x], r.value[x]);
      EXPECT_LE(s[x], 2 * cfg.K0 * (r.value[x] + r.tail_bound) * (1 + 1e-12));
    }
  }
}
