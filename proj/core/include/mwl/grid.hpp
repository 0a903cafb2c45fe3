#pragma once

// Dyadic grid of the unit interval [0, 1) and piecewise-constant functions on
// its finest cells. Every other module computes on these types.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mwl {

class DyadicGrid {
 public:
  static constexpr int kMaxDepth = 24;

  explicit DyadicGrid(int depth);

  int depth() const { return depth_; }
  std::size_t cell_count() const { return std::size_t{1} << depth_; }
  /// 2^-depth, exact in binary floating point.
  double cell_width() const;
  /// Midpoint of cell i.
  double midpoint(std::size_t i) const { return (static_cast<double>(i) + 0.5) * cell_width(); }

  friend bool operator==(const DyadicGrid&, const DyadicGrid&) = default;

 private:
  int depth_;
};

/// Grid-aligned half-open interval of finest cells [start, end).
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return end <= start; }
  bool contains(std::size_t cell) const { return cell >= start && cell < end; }
  bool contains(const Interval& other) const { return other.start >= start && other.end <= end; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// [index * 2^-level, (index + 1) * 2^-level).
struct DyadicCube {
  int level = 0;
  std::size_t index = 0;

  DyadicCube parent() const;
  DyadicCube child(int which) const { return {level + 1, 2 * index + static_cast<std::size_t>(which)}; }
  /// Cells of `grid` covered by this cube; level must not exceed grid depth.
  Interval cells(const DyadicGrid& grid) const;
  bool contains(const DyadicCube& other) const;
  bool disjoint(const DyadicCube& other) const { return !contains(other) && !other.contains(*this); }

  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
  friend auto operator<=>(const DyadicCube&, const DyadicCube&) = default;
};

/// Smallest dyadic cube of the given level containing finest cell `cell`.
DyadicCube ancestor_at(const DyadicGrid& grid, std::size_t cell, int level);

class StepFunction {
 public:
  StepFunction(DyadicGrid grid, std::vector<double> values);

  static StepFunction constant(DyadicGrid grid, double c);
  static StepFunction zero(DyadicGrid grid) { return constant(grid, 0.0); }

  const DyadicGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  double max() const;
  double min() const;

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  DyadicGrid grid_;
  std::vector<double> values_;
};

/// Cell membership mask over the finest cells.
using CellSet = std::vector<bool>;

double average(const StepFunction& f, const Interval& q);
double average(const StepFunction& f, const DyadicCube& q);

/// Sum over the cells of `cells` of w * cell_width.
double weighted_measure(const StepFunction& w, const CellSet& cells);
double weighted_measure(const StepFunction& w, std::span<const std::size_t> cells);
double weighted_measure(const StepFunction& w, const Interval& q);

StepFunction refine(const StepFunction& f, int new_depth);

// Cell-wise arithmetic.
StepFunction abs(const StepFunction& f);
StepFunction scale(const StepFunction& f, double c);
StepFunction multiply(const StepFunction& a, const StepFunction& b);
StepFunction divide(const StepFunction& a, const StepFunction& b);
StepFunction power(const StepFunction& f, double s);
StepFunction add(const StepFunction& a, const StepFunction& b);

void require_same_grid(const StepFunction& a, const StepFunction& b);

/// Prefix sums over the finest cells for O(1) interval sums in scans.
class PrefixSums {
 public:
  explicit PrefixSums(std::span<const double> values);
  double sum(const Interval& q) const { return prefix_[q.end] - prefix_[q.start]; }
  double mean(const Interval& q) const { return sum(q) / static_cast<double>(q.size()); }

 private:
  std::vector<double> prefix_;
};

/// Cell sums of every dyadic cube, built bottom-up by pairwise addition.
/// level_sums(l)[j] is the sum of the finest values in cube (l, j).
class DyadicPyramid {
 public:
  explicit DyadicPyramid(const StepFunction& f);
  std::span<const double> level_sums(int level) const { return sums_[static_cast<std::size_t>(level)]; }
  double mean(const DyadicCube& q) const;
  int depth() const { return depth_; }

 private:
  int depth_;
  std::vector<std::vector<double>> sums_;
};

// Serialization: CSV `cell_index,value` (17 significant digits) plus a
// sidecar JSON `{"depth": d}` at the same path with extension `.json`.
std::string to_csv(const StepFunction& f);
StepFunction from_csv(const std::string& csv, int depth);
void write_step_function(const StepFunction& f, const std::filesystem::path& csv_path);
StepFunction read_step_function(const std::filesystem::path& csv_path);

/// "%.17g" formatting used by every text artifact.
std::string format_double(double x);

}  // namespace mwl
