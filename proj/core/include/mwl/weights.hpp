#pragma once

// Weight classes on the dyadic grid: A_1, A_p, A_infinity (Fujii-Wilson),
// RH_infinity and the multilinear A_{1,...,1} condition, plus generator
// families whose constants are stable under refinement.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mwl/grid.hpp"

namespace mwl {

/// Which family of intervals a supremum ranges over.
enum class SupMode { dyadic, intervals };

std::string to_string(SupMode mode);
SupMode parse_sup_mode(const std::string& text);

/// Positive step function bounded below by `floor`.
class Weight {
 public:
  /// Values below the floor are raised to it. The default floor is
  /// 1e-8 * max value.
  explicit Weight(StepFunction values, std::optional<double> floor = std::nullopt, std::string provenance = {});

  static Weight constant(const DyadicGrid& grid, double c = 1.0);

  const StepFunction& values() const { return values_; }
  const DyadicGrid& grid() const { return values_.grid(); }
  double floor() const { return floor_; }
  const std::string& provenance() const { return provenance_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  Weight scaled(double c) const;
  /// w^s cell-wise.
  Weight pow(double s) const;
  /// 1 / w cell-wise.
  Weight reciprocal() const;
  Weight times(const Weight& other) const;

 private:
  StepFunction values_;
  double floor_;
  std::string provenance_;
};

/// m weights on a common grid and their geometric mean nu.
class WeightVector {
 public:
  explicit WeightVector(std::vector<Weight> components);

  std::size_t m() const { return components_.size(); }
  const Weight& operator[](std::size_t i) const { return components_[i]; }
  const std::vector<Weight>& components() const { return components_; }
  const Weight& nu() const { return nu_; }
  const DyadicGrid& grid() const { return nu_.grid(); }

 private:
  std::vector<Weight> components_;
  Weight nu_;
};

/// A supremum together with the interval attaining it. In dyadic mode the
/// interval is a dyadic cube's cell range.
struct Achieved {
  double value = 0.0;
  Interval where;
};

Achieved a1_constant(const Weight& w, SupMode mode = SupMode::intervals);
/// sup <w>_Q <w^{1-p'}>_Q^{p-1}, p > 1.
Achieved ap_constant(const Weight& w, double p, SupMode mode = SupMode::intervals);
/// Fujii-Wilson: sup_Q w(Q)^{-1} int_Q M(w chi_Q), M over subintervals of Q.
/// The intervals mode costs O(N^3).
Achieved ainf_constant(const Weight& w, SupMode mode = SupMode::intervals);
/// sup_Q max_Q w / <w>_Q.
Achieved rhinf_constant(const Weight& w, SupMode mode = SupMode::intervals);
/// sup_Q <nu>_Q^m prod_i (min_Q w_i)^{-1}.
Achieved multilinear_a1_constant(const WeightVector& wv, SupMode mode = SupMode::intervals);

/// All constants of one weight with their achieving intervals.
struct ConstantsReport {
  SupMode mode = SupMode::intervals;
  int depth = 0;
  std::string provenance;
  Achieved a1;
  std::map<double, Achieved> ap;
  Achieved ainf;
  Achieved rhinf;
};

ConstantsReport constants_report(const Weight& w, SupMode mode, const std::vector<double>& ps = {2.0});
nlohmann::json to_json(const ConstantsReport& report);
nlohmann::json to_json(const Achieved& a, SupMode mode, const DyadicGrid& grid);

// Generators. Each is a pure function of its parameters and the grid.

/// Cell averages of |x - center|^a in closed form, a > -1.
Weight gen_power(double a, double center, const DyadicGrid& grid, std::optional<double> floor = std::nullopt);

/// Dyadic martingale: every cube of level < levels hands factors (1 + beta)
/// and (1 - beta) to its two children in a seeded order. The weight does not
/// depend on depth once depth >= levels.
Weight gen_martingale(std::uint64_t seed, int depth, double beta, int levels);

/// Cell-wise product of an A_1-family factor and an RH_infinity-family factor.
Weight gen_ainf_factored(const Weight& a1_factor, const Weight& rh_factor);

}  // namespace mwl
