#include "mwl/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mwl/errors.hpp"

namespace mwl {

WeightedMeasure::WeightedMeasure(StepFunction density) : density_(std::move(density)), total_(0.0) {
  for (double d : density_.values()) {
    if (d < 0.0) throw DomainError("measure density must be nonnegative");
    total_ += d;
  }
  total_ *= density_.grid().cell_width();
  if (!(total_ > 0.0)) throw DomainError("measure has zero total mass");
}

DistributionTable distribution(const StepFunction& g, const WeightedMeasure& mu) {
  require_same_grid(g, mu.density());
  std::vector<std::size_t> order;
  order.reserve(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] != 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::fabs(g[a]) > std::fabs(g[b]); });
  DistributionTable t;
  double cum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double level = std::fabs(g[order[k]]);
    cum += mu.cell_mass(order[k]);
    if (k + 1 < order.size() && std::fabs(g[order[k + 1]]) == level) continue;
    t.levels.push_back(level);
    t.cumulative.push_back(cum);
  }
  return t;
}

double lp_norm(const StepFunction& f, const WeightedMeasure& mu, double p) {
  if (!(p > 0.0)) throw DomainError("L^p norm needs p > 0");
  require_same_grid(f, mu.density());
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = std::fabs(f[i]);
    s += (p == 1.0 ? a : std::pow(a, p)) * mu.density()[i];
  }
  s *= f.grid().cell_width();
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

NormValue weak_quasinorm(const StepFunction& g, const WeightedMeasure& mu, double p) {
  if (!(p > 0.0)) throw DomainError("weak quasi-norm needs p > 0");
  const auto t = distribution(g, mu);
  NormValue best;
  for (std::size_t i = 0; i < t.levels.size(); ++i) {
    const double value = t.levels[i] * std::pow(t.cumulative[i], 1.0 / p);
    if (value > best.value) best = {value, t.levels[i]};
  }
  return best;
}

double lorentz_p1_norm(const StepFunction& g, const WeightedMeasure& mu, double p) {
  if (!(p > 1.0)) throw DomainError("Lorentz L^{p,1} norm needs p > 1");
  const auto t = distribution(g, mu);
  // mu{|g| > s} = cumulative[i] for s in [levels[i+1], levels[i]).
  double total = 0.0;
  for (std::size_t i = 0; i < t.levels.size(); ++i) {
    const double below = i + 1 < t.levels.size() ? t.levels[i + 1] : 0.0;
    total += (t.levels[i] - below) * std::pow(t.cumulative[i], 1.0 / p);
  }
  return total;
}

}  // namespace mwl
