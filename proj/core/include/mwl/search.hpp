#pragma once

// Seeded random search and hill climbing over generator parameters and
// indicator-sum inputs, maximizing an inequality ratio; plus refinement
// scans that regenerate one instance at several depths.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mwl/config.hpp"
#include "mwl/instance.hpp"

namespace mwl {

struct ScanRow {
  int depth = 0;
  InequalityReport report;
};

struct ScanCurve {
  std::vector<ScanRow> rows;
  /// max ratio / min ratio over the rows (0 when a row is degenerate).
  double max_over_min = 0.0;
  /// Least-squares slope of log(ratio) against log(cell_count).
  double growth_exponent = 0.0;
};

/// Same instance at each depth, generators re-evaluated per depth.
ScanCurve refinement_scan(const Instance& inst, const std::vector<int>& depths);

nlohmann::json to_json(const ScanCurve& curve);
/// `depth,ratio,lhs,rhs,witness_t` followed by one column per hypothesis constant.
std::string to_csv(const ScanCurve& curve);

struct Indicator {
  double coef = 1.0;
  int level = 0;
  long long index = 0;
};

/// Sampled point of the search space; rendered into an Instance.
struct TrialParams {
  enum class VKind { ones, martingale, factored, rh_power };

  std::vector<double> w_exp;
  std::vector<double> w_center;
  VKind v_kind = VKind::ones;
  std::uint64_t v_seed = 0;
  double v_beta = 0.3;
  int v_levels = 1;
  double v_neg_exp = 0.0;
  double v_neg_center = 0.0;
  double v_pos_exp = 0.0;
  double v_pos_center = 0.0;
  double u_exp = 0.0;
  double u_center = 0.0;
  std::vector<std::vector<Indicator>> f;
};

struct SearchSpace {
  TheoremId theorem = TheoremId::MAX_1_5;
  int m = 2;
  int depth = 6;
  /// Depths of the refinement scan of the best instance; empty skips it.
  std::vector<int> depths;
  /// unspecified picks the regime the theorem's hypotheses name.
  Regime regime = Regime::unspecified;
  SupMode mode = SupMode::intervals;
  /// A_1 power exponents are drawn from [power_min, power_max].
  double power_min = -0.7;
  double power_max = 0.0;
  /// RH_inf power exponents are drawn from [0, rh_max].
  double rh_max = 1.0;
  double beta_max = 0.5;
  int levels_max = 6;
  int max_indicators = 4;
  int indicator_max_level = 5;
  double pv_radius = 1.0 / 16.0;
  std::size_t budget = 50;
  std::uint64_t seed = 1;
  std::size_t top_k = 5;
  int hill_starts = 5;
  int hill_steps = 50;
  /// Pins every weight and function to 1 (a smoke-test family).
  bool ones = false;

  static SearchSpace from_config(const FlatConfig& cfg);
  FlatConfig to_config() const;
  void validate() const;
  Regime effective_regime() const;
};

struct Trial {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Instance instance;
  double ratio = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool degenerate = false;
};

struct SearchResult {
  static constexpr const char* kSchema = "mwl.search-result/1";

  SearchSpace space;
  /// Every evaluated trial in trial order (random phase, then hill climbing).
  std::vector<Trial> trials;
  /// Best non-degenerate trials by (ratio desc, seed asc), rerun with constants.
  std::vector<Trial> top;
  std::vector<InequalityReport> top_reports;
  ScanCurve best_curve;
};

/// Counter-based seed of trial `counter` under `master`.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t counter);

TrialParams sample_params(const SearchSpace& space, std::uint64_t seed);
TrialParams perturb_params(const SearchSpace& space, const TrialParams& p, std::uint64_t seed);
Instance render_instance(const SearchSpace& space, const TrialParams& p, std::uint64_t seed);

/// Throws DegenerateInput when every trial is degenerate.
SearchResult fuzz(const SearchSpace& space);

nlohmann::json to_json(const SearchResult& result);
/// `trial,ratio,depth,seed` then the instance's weight and function specs.
std::string to_csv(const SearchResult& result);

}  // namespace mwl
