#pragma once

// Depth-independent descriptions of inequality instances. Weights and
// functions are written in a small spec language so an instance can be
// regenerated at any depth from its flat configuration:
//
//   weights:   const(c)  power(a,center)  martingale(seed,beta,levels)
//              product(w,w)  factored(w,w)  pow(w,s)  recip(w)
//   functions: ind(c,level,index)  bump(c,offset,x)  const(c)  zero,
//              summed with `+`; families of functions are `;`-separated.
//
// bump(c,offset,x) is c/|Q| on the dyadic cube Q of level depth-offset
// containing x, so its Lebesgue L^1 norm is c at every depth.

#include <cstdint>
#include <string>
#include <vector>

#include "mwl/config.hpp"
#include "mwl/grid.hpp"
#include "mwl/inequalities.hpp"
#include "mwl/weights.hpp"

namespace mwl {

Weight build_weight(const std::string& spec, const DyadicGrid& grid);
StepFunction build_function(const std::string& spec, const DyadicGrid& grid);
std::vector<StepFunction> build_family(const std::string& spec, const DyadicGrid& grid);

struct Instance {
  TheoremId theorem = TheoremId::MAIN_1_4;
  int m = 1;
  int depth = 6;
  SupMode mode = SupMode::intervals;
  SupMode constants_mode = SupMode::intervals;
  bool compute_constants = true;
  std::uint64_t seed = 0;
  /// f1..fm; `;`-separated families for VV_4_2.
  std::vector<std::string> f;
  std::vector<std::string> w;
  std::string v = "const(1)";
  /// Second weight of the linear theorems.
  std::string u = "const(1)";
  LinearOperator op = LinearOperator::maximal;
  double pv_radius = 1.0 / 16.0;
  int pv_component = 1;
  bool override_cost_cap = false;
  double r = 2.0;
  Regime regime = Regime::unspecified;

  /// Missing keys fall back to the defaults above; f_i and w_i default to const(1).
  static Instance from_config(const FlatConfig& cfg);
  FlatConfig to_config() const;
  Instance at_depth(int d) const;
  PVConfig pv() const;
};

/// Builds the inputs at the instance's depth and runs the checker bound to
/// its theorem. Degenerate inputs produce a report flagged degenerate.
InequalityReport run_instance(const Instance& inst);

}  // namespace mwl
