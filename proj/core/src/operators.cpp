#include "mwl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mwl/errors.hpp"
#include "mwl/parallel.hpp"

namespace mwl {
namespace {

std::vector<std::vector<double>> absolute_slots(std::span<const StepFunction> fv) {
  if (fv.empty()) throw DomainError("operator needs at least one function");
  std::vector<std::vector<double>> out;
  for (const auto& f : fv) {
    require_same_grid(f, fv.front());
    std::vector<double> a(f.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::fabs(f[i]);
    out.push_back(std::move(a));
  }
  return out;
}

// sup over grid-aligned intervals [s, e) containing x of prod_i <f_i>. For a
// fixed start s the best end for x is a suffix maximum over e > x.
std::vector<double> interval_sup(const std::vector<std::vector<double>>& slots) {
  const std::size_t n = slots.front().size();
  const std::size_t m = slots.size();
  std::vector<std::vector<double>> partial(thread_count(), std::vector<double>(n, 0.0));
  parallel_chunks(n, [&](std::size_t lo, std::size_t hi, unsigned worker) {
    auto& out = partial[worker];
    std::vector<double> sums(m);
    std::vector<double> suffix(n + 2);
    for (std::size_t s = lo; s < hi; ++s) {
      std::fill(sums.begin(), sums.end(), 0.0);
      for (std::size_t e = s + 1; e <= n; ++e) {
        const double len = static_cast<double>(e - s);
        double val = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
          sums[i] += slots[i][e - 1];
          val *= sums[i] / len;
        }
        suffix[e] = val;
      }
      suffix[n + 1] = 0.0;
      for (std::size_t e = n; e > s; --e) suffix[e] = std::max(suffix[e], suffix[e + 1]);
      for (std::size_t x = s; x < n; ++x) out[x] = std::max(out[x], suffix[x + 1]);
    }
  });
  std::vector<double> out(n, 0.0);
  for (const auto& p : partial) {
    for (std::size_t x = 0; x < n; ++x) out[x] = std::max(out[x], p[x]);
  }
  return out;
}

// Dyadic version: running max of prod_i <f_i>_Q pushed down the tree.
std::vector<double> dyadic_sup(const std::vector<std::vector<double>>& slots, const DyadicGrid& grid) {
  std::vector<DyadicPyramid> pyramids;
  for (const auto& s : slots) pyramids.emplace_back(StepFunction(grid, s));
  auto product_at = [&](const DyadicCube& q) {
    double val = 1.0;
    for (const auto& p : pyramids) val *= p.mean(q);
    return val;
  };
  std::vector<double> run{product_at({0, 0})};
  for (int l = 1; l <= grid.depth(); ++l) {
    std::vector<double> next(run.size() * 2);
    for (std::size_t j = 0; j < next.size(); ++j) next[j] = std::max(run[j / 2], product_at({l, j}));
    run = std::move(next);
  }
  return run;
}

std::vector<double> sup_of_products(const std::vector<std::vector<double>>& slots, const DyadicGrid& grid,
                                    SupMode mode) {
  return mode == SupMode::dyadic ? dyadic_sup(slots, grid) : interval_sup(slots);
}

}  // namespace

StepFunction maximal(const StepFunction& f, SupMode mode) {
  const std::span<const StepFunction> one(&f, 1);
  return StepFunction(f.grid(), sup_of_products(absolute_slots(one), f.grid(), mode));
}

StepFunction multilinear_maximal(std::span<const StepFunction> fv, SupMode mode) {
  const auto slots = absolute_slots(fv);
  return StepFunction(fv.front().grid(), sup_of_products(slots, fv.front().grid(), mode));
}

StepFunction product_of_maximals(std::span<const StepFunction> fv, SupMode mode) {
  if (fv.empty()) throw DomainError("operator needs at least one function");
  std::vector<double> out(fv.front().size(), 1.0);
  for (const auto& f : fv) {
    require_same_grid(f, fv.front());
    const auto mf = maximal(f, mode);
    for (std::size_t x = 0; x < out.size(); ++x) out[x] *= mf[x];
  }
  return StepFunction(fv.front().grid(), std::move(out));
}

void PVConfig::validate(const DyadicGrid& grid) const {
  if (m < 1) throw ConfigError("PV config needs m >= 1");
  if (component < 1 || component > m) throw ConfigError("PV component must lie in [1, m]");
  if (!(exclusion_radius >= grid.cell_width())) {
    throw ConfigError("exclusion radius " + format_double(exclusion_radius) + " is below the cell width " +
                      format_double(grid.cell_width()));
  }
  if (!override_cost_cap && grid.depth() * (m + 1) > kCostExponentCap) {
    throw ConfigError("Riesz transform at depth " + std::to_string(grid.depth()) + " with m = " +
                      std::to_string(m) + " exceeds the cost cap; pass --override-cost-cap to force it");
  }
}

namespace {

struct Support {
  std::vector<double> y;
  std::vector<double> f;
};

std::vector<Support> supports(std::span<const StepFunction> fv) {
  std::vector<Support> out;
  for (const auto& f : fv) {
    Support s;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] != 0.0) {
        s.y.push_back(f.grid().midpoint(i));
        s.f.push_back(f[i]);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

class RieszSum {
 public:
  RieszSum(const std::vector<Support>& sup, const PVConfig& cfg)
      : sup_(sup), j_(static_cast<std::size_t>(cfg.component - 1)), r2_(cfg.exclusion_radius * cfg.exclusion_radius),
        half_power_(0.5 * static_cast<double>(cfg.m + 1)) {}

  double at(double x) const {
    diffs_.assign(sup_.size(), 0.0);
    return recurse(x, 0, 0.0, 1.0);
  }

 private:
  double recurse(double x, std::size_t slot, double dist2, double prod) const {
    if (slot == sup_.size()) {
      if (!(dist2 > r2_)) return 0.0;
      return diffs_[j_] / std::pow(dist2, half_power_) * prod;
    }
    double total = 0.0;
    const auto& s = sup_[slot];
    for (std::size_t k = 0; k < s.y.size(); ++k) {
      const double d = x - s.y[k];
      diffs_[slot] = d;
      total += recurse(x, slot + 1, dist2 + d * d, prod * s.f[k]);
    }
    return total;
  }

  const std::vector<Support>& sup_;
  std::size_t j_;
  double r2_;
  double half_power_;
  mutable std::vector<double> diffs_;
};

void check_riesz_inputs(std::span<const StepFunction> fv, const PVConfig& cfg) {
  if (fv.empty()) throw DomainError("Riesz transform needs at least one function");
  if (static_cast<int>(fv.size()) != cfg.m) throw ConfigError("PV config m does not match the number of functions");
  for (const auto& f : fv) require_same_grid(f, fv.front());
  cfg.validate(fv.front().grid());
}

}  // namespace

StepFunction multilinear_riesz(std::span<const StepFunction> fv, const PVConfig& cfg) {
  check_riesz_inputs(fv, cfg);
  const auto& grid = fv.front().grid();
  const auto sup = supports(fv);
  const double volume = std::pow(grid.cell_width(), cfg.m);
  std::vector<double> out(grid.cell_count(), 0.0);
  parallel_chunks(out.size(), [&](std::size_t lo, std::size_t hi, unsigned) {
    const RieszSum sum(sup, cfg);
    for (std::size_t i = lo; i < hi; ++i) out[i] = sum.at(grid.midpoint(i)) * volume;
  });
  return StepFunction(grid, std::move(out));
}

double multilinear_riesz_at(std::span<const StepFunction> fv, const PVConfig& cfg, double x) {
  check_riesz_inputs(fv, cfg);
  const auto sup = supports(fv);
  return RieszSum(sup, cfg).at(x) * std::pow(fv.front().grid().cell_width(), cfg.m);
}

StepFunction rdf_S(const StepFunction& h, const Weight& nu, SupMode mode) {
  require_same_grid(h, nu.values());
  return divide(maximal(multiply(h, nu.values()), mode), nu.values());
}

RdFResult rdf_R(const StepFunction& h, const Weight& nu, const RdFConfig& cfg, SupMode mode) {
  if (!(cfg.K0 > 0.0)) throw ConfigError("Rubio de Francia K0 must be positive");
  if (cfg.series_terms < 1) throw ConfigError("Rubio de Francia series needs at least one term");
  for (double x : h.values()) {
    if (x < 0.0) throw DomainError("Rubio de Francia iteration needs h >= 0");
  }
  const double two_k0 = 2.0 * cfg.K0;
  std::vector<double> acc(h.values().begin(), h.values().end());
  StepFunction term = h;
  double sup_prev = h.max();
  double ratio_max = 0.0;
  double weight = 1.0;
  double sup_last = sup_prev;
  for (int k = 1; k <= cfg.series_terms + 1; ++k) {
    term = rdf_S(term, nu, mode);
    const double sup_now = term.max();
    if (sup_prev > 0.0) ratio_max = std::max(ratio_max, sup_now / sup_prev);
    sup_prev = sup_now;
    if (k > cfg.series_terms) break;  // S^{T+1} h only feeds the ratio estimate
    weight /= two_k0;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += term[i] * weight;
    sup_last = sup_now;
  }
  RdFResult r{StepFunction(h.grid(), std::move(acc)), 0.0, ratio_max, false};
  const double q = ratio_max / two_k0;
  if (q >= 1.0) {
    r.contraction_warning = true;
    r.tail_bound = std::numeric_limits<double>::infinity();
  } else {
    // sum_{j >= 1} sup(S^T h) q^j / (2 K0)^T
    r.tail_bound = sup_last * weight * q / (1.0 - q);
  }
  return r;
}

}  // namespace mwl
