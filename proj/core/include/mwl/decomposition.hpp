#pragma once

// Level sets of the dyadic multilinear maximal function and the cube
// families built on them: maximal cubes I_j^k of Omega_k, the (l, k) bands,
// the Gamma filter, principal cubes, Carleson packing and the decay of
// nu(E_k cap I) / nu(I) across bands.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mwl/grid.hpp"
#include "mwl/weights.hpp"

namespace mwl {

struct DecompositionConfig {
  /// Level base; must exceed 2 (the dimension is one).
  double a = 3.0;
  int m = 1;
  /// Optional restriction of the k range; the observed range is used otherwise.
  std::optional<int> k_min;
  std::optional<int> k_max;

  void validate() const;
};

/// A maximal cube I_j^k of Omega_k with its band index l.
struct ForestCube {
  int k = 0;
  DyadicCube cube;
  /// prod_i <f_i>_I from the dyadic pyramid.
  double product_average = 0.0;
  /// <v^(1/m)>_I.
  double v_root_average = 0.0;
  /// a^(k+l) <= <v^(1/m)>_I < a^(k+l+1).
  int l = 0;
  /// I meets {a^k < v^(1/m) <= a^(k+1)} in positive measure.
  bool in_gamma = false;
};

struct ForestLevel {
  int k = 0;
  /// {M_d > a^(mk)}.
  CellSet omega;
  /// {1 < M_d / v <= 2, a^(mk) < v <= a^(m(k+1))}.
  CellSet e_set;
  /// Indices into CubeForest::cubes.
  std::vector<std::size_t> cubes;
};

struct CubeForest {
  DecompositionConfig cfg;
  int depth = 0;
  StepFunction dyadic_maximal = StepFunction::zero(DyadicGrid(0));
  StepFunction v = StepFunction::zero(DyadicGrid(0));
  /// {1 < M_d / v <= 2}.
  CellSet level_set;
  std::vector<ForestLevel> levels;
  std::vector<ForestCube> cubes;

  /// Distinct cubes of the union of Gamma_{l,k} over all (l, k).
  std::vector<DyadicCube> gamma() const;
  /// Distinct cubes of the union over k of Gamma_{l,k} for one l.
  std::vector<DyadicCube> gamma(int l) const;
  /// Observed band indices of Gamma cubes, ascending.
  std::vector<int> gamma_bands() const;
  const ForestLevel* level(int k) const;
};

/// Builds the forest for nonnegative f_i (dyadic mode throughout).
CubeForest build_forest(std::span<const StepFunction> fv, const Weight& v, const DecompositionConfig& cfg);

struct ForestAudit {
  bool ok = true;
  std::size_t checks = 0;
  std::vector<std::string> failures;
};

/// Re-derives every invariant of the forest from the inputs. Averages are
/// recomputed by direct summation and compared with relative slack 1e-12.
ForestAudit audit_forest(const CubeForest& forest, std::span<const StepFunction> fv, const Weight& v,
                         const Weight& nu);

struct PrincipalForest {
  int l = 0;
  std::vector<std::vector<DyadicCube>> generations;
  /// Gamma cube -> minimal principal cube containing it.
  std::map<DyadicCube, DyadicCube> pi;
  /// Maximal principal cubes.
  std::vector<DyadicCube> maximal;
  /// [nu]_{A_1} used in the Carleson bound.
  double nu_a1 = 0.0;
  /// max over covered cells of sum_P <nu>_P chi_P / (2 [nu]_{A_1} nu).
  double carleson_ratio = 0.0;
  bool carleson_ok = true;
};

PrincipalForest principal_cubes(const CubeForest& forest, const Weight& nu, int l,
                                SupMode a1_mode = SupMode::dyadic);

struct SparseReport {
  /// max_Q sum_{Q' in family, Q' within Q} |Q'| / |Q|.
  double packing = 0.0;
  /// 1 / packing.
  double eta = 0.0;
  DyadicCube attained;
  bool pass = false;
};

SparseReport verify_sparse(std::span<const DyadicCube> family, double lambda_max);

struct DecayRow {
  int l = 0;
  double max_ratio = 0.0;
  std::size_t cubes = 0;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  /// Log-linear fit ratio ~ c1 exp(-c2 l) over rows with l >= 0 and ratio > 0.
  bool fitted = false;
  double c1 = 0.0;
  double c2 = 0.0;
  /// max over l < 0 rows of ratio / a^l.
  double c1_negative = 0.0;
  /// l values whose ratio exceeds 4x the preceding nonnegative row.
  std::vector<int> trend_violations;

  std::size_t nonzero_nonnegative_rows() const;
};

DecayTable measure_decay(const CubeForest& forest, const Weight& nu, const DecompositionConfig& cfg);

/// sup_Q <w1 w2>_Q / (<w1>_Q <w2>_Q).
Achieved lemma_rh_ratio(const Weight& w1, const Weight& w2, SupMode mode = SupMode::intervals);

nlohmann::json forest_summary(const CubeForest& forest);
std::string decay_csv(const DecayTable& table);
/// `k,l,level,index` rows of every maximal cube.
std::string cube_listing_csv(const CubeForest& forest);

}  // namespace mwl
