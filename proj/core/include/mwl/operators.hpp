#pragma once

// Maximal operators, the truncated multilinear Riesz model of a
// Calderon-Zygmund operator, and the Rubio de Francia operators S and R.

#include <span>
#include <vector>

#include "mwl/grid.hpp"
#include "mwl/weights.hpp"

namespace mwl {

/// Hardy-Littlewood maximal function of |f|: at each cell, the largest
/// average over dyadic cubes (or grid-aligned intervals) containing it.
StepFunction maximal(const StepFunction& f, SupMode mode);

/// sup over Q containing x of prod_i <|f_i|>_Q.
StepFunction multilinear_maximal(std::span<const StepFunction> fv, SupMode mode);

/// prod_i maximal(f_i) cell-wise, multiplied in slot order.
StepFunction product_of_maximals(std::span<const StepFunction> fv, SupMode mode);

/// Truncated midpoint-rule model of the j-th m-linear Riesz transform on
/// the unit interval, kernel (x - y_j) / (sum_i (x - y_i)^2)^((m+1)/2).
struct PVConfig {
  int m = 1;
  /// 1-based slot whose coordinate appears in the kernel numerator.
  int component = 1;
  /// Absolute truncation radius; tuples within this Euclidean distance of
  /// the diagonal point (x, ..., x) are dropped.
  double exclusion_radius = 1.0 / 16.0;
  /// Lift the desk-scale runtime cap depth * (m + 1) <= 24.
  bool override_cost_cap = false;

  static constexpr int kCostExponentCap = 24;

  void validate(const DyadicGrid& grid) const;
};

StepFunction multilinear_riesz(std::span<const StepFunction> fv, const PVConfig& cfg);

/// Same sum evaluated at an arbitrary point x (not necessarily a midpoint).
double multilinear_riesz_at(std::span<const StepFunction> fv, const PVConfig& cfg, double x);

/// S h = M(h nu) / nu.
StepFunction rdf_S(const StepFunction& h, const Weight& nu, SupMode mode);

struct RdFConfig {
  double K0 = 1.0;
  int series_terms = 20;
  double r_prime = 3.0;
};

struct RdFResult {
  /// sum_{k=0}^{T} S^k h / (2 K0)^k with T = series_terms.
  StepFunction value;
  /// Pointwise bound on the omitted terms k > T, from measured sup-norm ratios.
  double tail_bound = 0.0;
  /// Largest measured ratio sup S^{k+1} h / sup S^k h.
  double max_sup_ratio = 0.0;
  /// Set when a measured ratio reached 2 K0 (the series need not contract).
  bool contraction_warning = false;
};

RdFResult rdf_R(const StepFunction& h, const Weight& nu, const RdFConfig& cfg, SupMode mode);

}  // namespace mwl
