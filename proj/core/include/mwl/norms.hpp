#pragma once

// Exact weighted Lebesgue norms, weak-type quasi-norms L^{p,inf}(mu) and
// Lorentz L^{p,1}(mu) norms of step functions.

#include <vector>

#include "mwl/grid.hpp"
#include "mwl/weights.hpp"

namespace mwl {

/// Measure with a nonnegative step density; total mass must be positive.
class WeightedMeasure {
 public:
  explicit WeightedMeasure(StepFunction density);
  explicit WeightedMeasure(const Weight& w) : WeightedMeasure(w.values()) {}

  static WeightedMeasure lebesgue(const DyadicGrid& grid) {
    return WeightedMeasure(StepFunction::constant(grid, 1.0));
  }

  const StepFunction& density() const { return density_; }
  double total() const { return total_; }
  /// Mass of a single finest cell.
  double cell_mass(std::size_t i) const { return density_[i] * density_.grid().cell_width(); }

 private:
  StepFunction density_;
  double total_;
};

/// Distinct values v_1 > v_2 > ... > 0 of |g| with cumulative measures
/// mu{|g| >= v_i}. Cells where g vanishes are not listed.
struct DistributionTable {
  std::vector<double> levels;
  std::vector<double> cumulative;
};

DistributionTable distribution(const StepFunction& g, const WeightedMeasure& mu);

struct NormValue {
  double value = 0.0;
  /// Level at which the supremum is attained (0 when g vanishes).
  double witness_t = 0.0;
};

double lp_norm(const StepFunction& f, const WeightedMeasure& mu, double p);

/// max_i v_i * mu{|g| >= v_i}^{1/p}, equal to sup_t t * mu{|g| > t}^{1/p}.
NormValue weak_quasinorm(const StepFunction& g, const WeightedMeasure& mu, double p);

/// int_0^inf mu{|g| > t}^{1/p} dt as a finite sum over levels, p > 1.
double lorentz_p1_norm(const StepFunction& g, const WeightedMeasure& mu, double p);

}  // namespace mwl
