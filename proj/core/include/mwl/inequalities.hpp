#pragma once

// One checker per mixed weak-type inequality: each assembles the left- and
// right-hand sides on the grid, reports their ratio and the constants of
// the weights involved.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mwl/grid.hpp"
#include "mwl/norms.hpp"
#include "mwl/operators.hpp"
#include "mwl/weights.hpp"

namespace mwl {

enum class TheoremId {
  SAWYER_1_1,
  CMP_1_2,
  LOP_1_3,
  MAIN_1_4,
  MAX_1_5,
  CONJ_1_6,
  MUCZO_1_7,
  COR_1_8,
  EXTRAP_A,
  VV_4_2,
};

std::string to_string(TheoremId id);
TheoremId parse_theorem(const std::string& text);

/// Hypothesis regime asserted by the generator families of an instance.
///   H1: every w_i in A_1 and v in A_inf.
///   H2: w in A_(1,...,1) and nu v^(1/m) in A_inf.
///   H3: w in A_(1,...,1) and v^(1/m) in A_inf (the open conjecture).
///   RH: w in A_(1,...,1) and v in RH_inf.
enum class Regime { unspecified, H1, H2, H3, RH };

std::string to_string(Regime r);
Regime parse_regime(const std::string& text);

enum class LinearOperator { maximal, riesz };

struct HypothesisConstant {
  std::string name;
  double value = 0.0;
  SupMode mode = SupMode::intervals;
  Interval where;
};

struct CheckOptions {
  /// Supremum family of the maximal operators.
  SupMode mode = SupMode::intervals;
  /// Family for the hypothesis constants.
  SupMode constants_mode = SupMode::intervals;
  bool compute_constants = true;
  /// The intervals-mode A_inf scan is O(N^3); above this depth it runs dyadic.
  int ainf_intervals_max_depth = 9;
  Regime regime = Regime::unspecified;
  std::map<std::string, std::string> provenance;
};

struct InequalityReport {
  static constexpr const char* kSchema = "mwl.inequality-report/1";

  TheoremId theorem = TheoremId::MAIN_1_4;
  double lhs = 0.0;
  double rhs = 0.0;
  /// lhs / rhs; 0 when the report is degenerate.
  double ratio = 0.0;
  double witness_t = 0.0;
  bool degenerate = false;
  std::string label;
  Regime regime = Regime::unspecified;
  std::vector<HypothesisConstant> hypothesis_constants;
  std::map<std::string, std::string> input_provenance;
  int grid_depth = 0;
  SupMode mode = SupMode::intervals;
  std::map<std::string, std::string> operator_config;

  std::optional<double> constant(const std::string& name) const;
};

nlohmann::json to_json(const InequalityReport& r);
/// Flat `key,value` CSV carrying the same values as the JSON form.
std::string to_csv(const InequalityReport& r);

/// Throws DegenerateInput when the report is degenerate.
void require_nondegenerate(const InequalityReport& r);

/// The measure nu * v^(1/m).
WeightedMeasure mixed_measure(const Weight& nu, const Weight& v, std::size_t m);

/// || prod_i M f_i / v ||_{L^{1/m,inf}(nu v^{1/m})} against prod_i ||f_i||_{L^1(w_i)}.
InequalityReport check_main(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                            const CheckOptions& opt = {});

/// As check_main with the multilinear maximal function in place of prod_i M f_i.
InequalityReport check_max(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                           const CheckOptions& opt = {});

/// check_max under the conjecture's hypotheses; never yields a verdict.
InequalityReport check_conjecture(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                                  const CheckOptions& opt = {});

/// || T(f v) / v ||_{L^{1,inf}(u v)} against ||f||_{L^1(u v)}, T = M or the
/// truncated Hilbert-type kernel.
InequalityReport check_linear(const StepFunction& f, const Weight& u, const Weight& v, LinearOperator op,
                              const PVConfig& pv, const CheckOptions& opt = {}, TheoremId id = TheoremId::LOP_1_3);

/// || T(f) / v ||_{L^{1/m,inf}(nu v^{1/m})} against prod_i ||f_i||_{L^1(w_i)}.
InequalityReport check_muczo(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                             const PVConfig& pv, const CheckOptions& opt = {}, TheoremId id = TheoremId::MUCZO_1_7);

/// || T(f) / v || against || M(f) / v || in the same weak space.
InequalityReport check_extrapolation(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                                     const PVConfig& pv, const CheckOptions& opt = {});

/// l^r-valued version of check_muczo over all m-tuples drawn from the families.
InequalityReport check_vector_valued(const std::vector<std::vector<StepFunction>>& families, const WeightVector& wv,
                                     const Weight& v, double r, const PVConfig& pv, const CheckOptions& opt = {});

}  // namespace mwl
