#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mwl/errors.hpp"
#include "mwl/inequalities.hpp"
#include "mwl/instance.hpp"

using namespace mwl;

namespace {

StepFunction dyadic_indicator(const DyadicGrid& g, int level, std::size_t index, double c = 1.0) {
  std::vector<double> v(g.cell_count(), 0.0);
  const Interval q = DyadicCube{level, index}.cells(g);
  for (std::size_t i = q.start; i < q.end; ++i) v[i] = c;
  return StepFunction(g, std::move(v));
}

struct Inputs {
  std::vector<StepFunction> f;
  WeightVector w;
  Weight v;
};

Inputs sample(std::mt19937_64& rng, int depth, int m) {
  const DyadicGrid g(depth);
  std::uniform_real_distribution<double> a(-0.7, 0.0), c(0.0, 1.0), coef(0.5, 2.0);
  std::uniform_int_distribution<int> level(0, std::min(depth, 5));
  std::vector<StepFunction> f;
  std::vector<Weight> ws;
  for (int i = 0; i < m; ++i) {
    const int l1 = level(rng), l2 = level(rng);
    f.push_back(add(dyadic_indicator(g, l1, std::uniform_int_distribution<std::size_t>(0, (1u << l1) - 1)(rng), coef(rng)),
                    dyadic_indicator(g, l2, std::uniform_int_distribution<std::size_t>(0, (1u << l2) - 1)(rng), coef(rng))));
    ws.push_back(gen_power(a(rng), c(rng), g));
  }
  const Weight v = gen_ainf_factored(gen_power(a(rng), c(rng), g), gen_power(c(rng), c(rng), g));
  return {std::move(f), WeightVector(std::move(ws)), v};
}

// Independent pipeline for the product-of-maximals inequality: brute-force
// maximal functions, a hand-rolled level formula, direct L^1 sums.
double main_lhs_oracle(const Inputs& in) {
  const auto& g = in.v.grid();
  const std::size_t n = g.cell_count(), m = in.f.size();
  std::vector<double> prod(n, 1.0);
  for (const auto& f : in.f) {
    std::vector<double> pre(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] + std::fabs(f[i]);
    for (std::size_t x = 0; x < n; ++x) {
      double best = 0.0;
      for (std::size_t a = 0; a <= x; ++a) {
        for (std::size_t b = x + 1; b <= n; ++b) best = std::max(best, (pre[b] - pre[a]) / static_cast<double>(b - a));
      }
      prod[x] *= best;
    }
  }
  std::vector<std::pair<double, double>> cells;  // (value, mass)
  for (std::size_t x = 0; x < n; ++x) {
    const double density = in.w.nu()[x] * std::pow(in.v[x], 1.0 / static_cast<double>(m));
    cells.emplace_back(prod[x] / in.v[x], density * g.cell_width());
  }
  double best = 0.0;
  for (const auto& [t, unused] : cells) {
    double mass = 0.0;
    for (const auto& [val, mu] : cells) mass += val >= t ? mu : 0.0;
    best = std::max(best, t * std::pow(mass, static_cast<double>(m)));
  }
  return best;
}

double rhs_oracle(const Inputs& in) {
  double rhs = 1.0;
  for (std::size_t i = 0; i < in.f.size(); ++i) {
    double s = 0.0;
    for (std::size_t x = 0; x < in.f[i].size(); ++x) s += std::fabs(in.f[i][x]) * in.w[i][x];
    rhs *= s * in.v.grid().cell_width();
  }
  return rhs;
}

CheckOptions fast() {
  CheckOptions o;
  o.compute_constants = false;
  return o;
}

PVConfig pv2() {
  PVConfig pv;
  pv.m = 2;
  return pv;
}

}  // namespace

TEST(Checkers, AllOnesGiveRatioOne) {
  const DyadicGrid g(4);
  const std::vector<StepFunction> ones(2, StepFunction::constant(g, 1.0));
  const WeightVector w({Weight::constant(g), Weight::constant(g)});
  const Weight v = Weight::constant(g);
  for (const auto& r : {check_main(ones, w, v), check_max(ones, w, v)}) {
    EXPECT_DOUBLE_EQ(r.lhs, 1.0);
    EXPECT_DOUBLE_EQ(r.rhs, 1.0);
    EXPECT_DOUBLE_EQ(r.ratio, 1.0);
    EXPECT_FALSE(r.degenerate);
  }
  const auto lin = check_linear(StepFunction::constant(g, 1.0), v, v, LinearOperator::maximal, PVConfig{});
  EXPECT_DOUBLE_EQ(lin.ratio, 1.0);
}

TEST(Checkers, MainMatchesIndependentPipeline) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 6; ++t) {
    const auto in = sample(rng, 7, 2 + t % 2);
    const auto r = check_main(in.f, in.w, in.v, fast());
    EXPECT_NEAR(r.lhs, main_lhs_oracle(in), 1e-12 * r.lhs);
    EXPECT_NEAR(r.rhs, rhs_oracle(in), 1e-12 * r.rhs);
  }
}

TEST(Checkers, MainPipelineRefinesStably) {
  // Pinned family: dyadic indicators, power weights and a factored A_inf v.
  std::vector<double> ratios;
  for (int d : {8, 9}) {
    const DyadicGrid g(d);
    const std::vector<StepFunction> f{dyadic_indicator(g, 2, 1), dyadic_indicator(g, 3, 5)};
    const WeightVector w({gen_power(-0.4, -0.6, g), gen_power(-0.4, 0.6, g)});
    const Weight v = gen_ainf_factored(gen_power(-0.3, 0.2, g), gen_power(0.5, 0.8, g));
    ratios.push_back(check_main(f, w, v, fast()).ratio);
  }
  EXPECT_NEAR(ratios[1], ratios[0], 0.1 * ratios[0]);
}

TEST(Checkers, DegenerateInputsAreFlagged) {
  const DyadicGrid g(4);
  const std::vector<StepFunction> fv{StepFunction::constant(g, 1.0), StepFunction::zero(g)};
  const WeightVector w({Weight::constant(g), Weight::constant(g)});
  const Weight v = Weight::constant(g);
  for (const auto& r : {check_main(fv, w, v), check_max(fv, w, v), check_muczo(fv, w, v, pv2()),
                        check_extrapolation(fv, w, v, pv2())}) {
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.ratio, 0.0);
    EXPECT_THROW(require_nondegenerate(r), DegenerateInput);
  }
  EXPECT_EQ(check_muczo(fv, w, v, pv2()).lhs, 0.0);
}

TEST(Checkers, ConjectureNeedsARegimeAndMatchesMaxUnderH2) {
  std::mt19937_64 rng(2);
  const auto in = sample(rng, 6, 2);
  EXPECT_THROW(check_conjecture(in.f, in.w, in.v), ConfigError);
  CheckOptions o;
  o.regime = Regime::H2;
  const auto conj = check_conjecture(in.f, in.w, in.v, o);
  const auto max = check_max(in.f, in.w, in.v, o);
  EXPECT_EQ(conj.lhs, max.lhs);
  EXPECT_EQ(conj.rhs, max.rhs);
  EXPECT_EQ(conj.label, "open target — no pass/fail");
  EXPECT_TRUE(conj.constant("ainf(v^(1/m))").has_value());
  EXPECT_TRUE(conj.constant("ainf(nu*v^(1/m))").has_value());
}

TEST(Checkers, VectorValuedSingletonsMatchMuczo) {
  std::mt19937_64 rng(3);
  const auto in = sample(rng, 6, 2);
  const auto single = check_muczo(in.f, in.w, in.v, pv2(), fast());
  const auto vv = check_vector_valued({{in.f[0]}, {in.f[1]}}, in.w, in.v, 2.0, pv2(), fast());
  EXPECT_EQ(vv.lhs, single.lhs);
  EXPECT_EQ(vv.rhs, single.rhs);
  EXPECT_EQ(vv.ratio, single.ratio);
}

TEST(Checkers, VectorValuedErrors) {
  std::mt19937_64 rng(4);
  const auto in = sample(rng, 5, 2);
  const auto zero = StepFunction::zero(in.v.grid());
  EXPECT_THROW(check_vector_valued({{in.f[0]}, {in.f[1]}}, in.w, in.v, 1.0, pv2()), DomainError);
  EXPECT_THROW(check_vector_valued({{in.f[0]}, {in.f[1]}}, in.w, in.v, 2.5, pv2()), DomainError);
  EXPECT_TRUE(check_vector_valued({{in.f[0]}, {zero, zero}}, in.w, in.v, 1.5, pv2(), fast()).degenerate);
}

TEST(Checkers, LinearRieszIsFiniteAndStable) {
  std::vector<double> r;
  for (int d : {6, 8}) {
    const DyadicGrid g(d);
    PVConfig pv;
    pv.exclusion_radius = 1.0 / 16.0;
    r.push_back(check_linear(dyadic_indicator(g, 2, 1), Weight::constant(g), Weight::constant(g),
                             LinearOperator::riesz, pv, fast())
                    .ratio);
  }
  EXPECT_TRUE(std::isfinite(r[0]));
  EXPECT_LE(std::max(r[0], r[1]) / std::min(r[0], r[1]), 1.5);
}

TEST(Checkers, ClassicalWeakTypeBoundIsDepthStable) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> r;
    const int level = 1 + t, index = t;
    for (int d : {6, 8, 10}) {
      const DyadicGrid g(d);
      r.push_back(check_linear(dyadic_indicator(g, level, index), Weight::constant(g), Weight::constant(g),
                               LinearOperator::maximal, PVConfig{}, fast())
                      .ratio);
    }
    EXPECT_LE(*std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end()), 1.5);
    EXPECT_LE(r.back(), 2.0);
  }
}

TEST(CheckersProperty, MaxLhsNeverExceedsMainLhs) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 30; ++t) {
    const auto in = sample(rng, 7, 2 + t % 2);
    for (SupMode mode : {SupMode::dyadic, SupMode::intervals}) {
      CheckOptions o = fast();
      o.mode = mode;
      EXPECT_LE(check_max(in.f, in.w, in.v, o).lhs, check_main(in.f, in.w, in.v, o).lhs * (1 + 1e-12));
    }
  }
}

TEST(CheckersProperty, RatiosAreHomogeneousInTheFunctions) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const auto in = sample(rng, 6, 2);
    const std::vector<StepFunction> scaled{scale(in.f[0], 3.5), scale(in.f[1], 0.02)};
    auto same = [](double a, double b) { EXPECT_NEAR(a, b, 1e-10 * std::fabs(b)); };
    same(check_main(scaled, in.w, in.v, fast()).ratio, check_main(in.f, in.w, in.v, fast()).ratio);
    same(check_max(scaled, in.w, in.v, fast()).ratio, check_max(in.f, in.w, in.v, fast()).ratio);
    same(check_muczo(scaled, in.w, in.v, pv2(), fast()).ratio, check_muczo(in.f, in.w, in.v, pv2(), fast()).ratio);
    same(check_extrapolation(scaled, in.w, in.v, pv2(), fast()).ratio,
         check_extrapolation(in.f, in.w, in.v, pv2(), fast()).ratio);
  }
}

TEST(CheckersProperty, RatiosAreInvariantUnderWeightScaling) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 10; ++t) {
    const auto in = sample(rng, 6, 2);
    const WeightVector scaled({in.w[0].scaled(9.0), in.w[1]});
    auto same = [](double a, double b) { EXPECT_NEAR(a, b, 1e-10 * std::fabs(b)); };
    same(check_main(in.f, scaled, in.v, fast()).ratio, check_main(in.f, in.w, in.v, fast()).ratio);
    same(check_max(in.f, scaled, in.v, fast()).ratio, check_max(in.f, in.w, in.v, fast()).ratio);
    same(check_muczo(in.f, scaled, in.v, pv2(), fast()).ratio, check_muczo(in.f, in.w, in.v, pv2(), fast()).ratio);
  }
}

TEST(CheckersProperty, SingleSlotMainEqualsLinearMaximal) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const auto in = sample(rng, 7, 1);
    const Weight one = Weight::constant(in.v.grid());
    const auto main = check_main(in.f, in.w, one, fast());
    const auto lin = check_linear(in.f[0], in.w[0], one, LinearOperator::maximal, PVConfig{}, fast());
    EXPECT_EQ(main.lhs, lin.lhs);
    EXPECT_EQ(main.rhs, lin.rhs);
  }
}

TEST(CheckersProperty, ReportsReplayFromInstances) {
  Instance inst;
  inst.theorem = TheoremId::MAX_1_5;
  inst.m = 2;
  inst.depth = 7;
  inst.f = {"ind(1,2,1)+ind(2,4,3)", "ind(1,1,0)"};
  inst.w = {"power(-0.5,0.3)", "power(-0.2,0.8)"};
  inst.v = "pow(factored(power(-0.3,0.5),power(0.5,0.1)),2)";
  const auto a = run_instance(inst);
  const auto b = run_instance(Instance::from_config(inst.to_config()));
  EXPECT_EQ(a.lhs, b.lhs);
  EXPECT_EQ(a.rhs, b.rhs);
  EXPECT_EQ(a.ratio, b.ratio);
  EXPECT_EQ(to_json(a), to_json(b));
}

TEST(CheckersIo, CsvAndJsonCarryTheSameValues) {
  std::mt19937_64 rng(10);
  const auto in = sample(rng, 6, 2);
  const auto r = check_max(in.f, in.w, in.v);
  const auto j = to_json(r);
  const std::string csv = to_csv(r);
  EXPECT_NE(csv.find("lhs," + format_double(r.lhs)), std::string::npos);
  EXPECT_NE(csv.find("ratio," + format_double(r.ratio)), std::string::npos);
  EXPECT_EQ(j["lhs"].get<double>(), r.lhs);
  EXPECT_EQ(j["schema"], InequalityReport::kSchema);
}
