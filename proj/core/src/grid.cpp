#include "mwl/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mwl/errors.hpp"

namespace mwl {

DyadicGrid::DyadicGrid(int depth) : depth_(depth) {
  if (depth < 0 || depth > kMaxDepth) {
    throw DomainError("grid depth must lie in [0, " + std::to_string(kMaxDepth) + "], got " +
                      std::to_string(depth));
  }
}

double DyadicGrid::cell_width() const { return std::ldexp(1.0, -depth_); }

DyadicCube DyadicCube::parent() const {
  if (level == 0) throw DomainError("the root cube has no parent");
  return {level - 1, index / 2};
}

Interval DyadicCube::cells(const DyadicGrid& grid) const {
  if (level < 0 || level > grid.depth() || index >= (std::size_t{1} << level)) {
    throw DomainError("dyadic cube outside the grid");
  }
  const int shift = grid.depth() - level;
  return {index << shift, (index + 1) << shift};
}

bool DyadicCube::contains(const DyadicCube& other) const {
  if (other.level < level) return false;
  return (other.index >> (other.level - level)) == index;
}

DyadicCube ancestor_at(const DyadicGrid& grid, std::size_t cell, int level) {
  if (level < 0 || level > grid.depth()) throw DomainError("ancestor level outside the grid");
  return {level, cell >> (grid.depth() - level)};
}

StepFunction::StepFunction(DyadicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.cell_count()) {
    throw DomainError("step function has " + std::to_string(values_.size()) + " values, grid has " +
                      std::to_string(grid_.cell_count()) + " cells");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("step function values must be finite");
  }
}

StepFunction StepFunction::constant(DyadicGrid grid, double c) {
  return StepFunction(grid, std::vector<double>(grid.cell_count(), c));
}

double StepFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }
double StepFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

double average(const StepFunction& f, const Interval& q) {
  if (q.empty()) throw DomainError("average over an empty interval");
  if (q.end > f.size()) throw DomainError("interval outside the grid");
  double s = 0.0;
  for (std::size_t i = q.start; i < q.end; ++i) s += f[i];
  return s / static_cast<double>(q.size());
}

double average(const StepFunction& f, const DyadicCube& q) { return average(f, q.cells(f.grid())); }

double weighted_measure(const StepFunction& w, const CellSet& cells) {
  if (cells.size() != w.size()) throw DomainError("cell set does not match the grid");
  double s = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i]) s += w[i];
  }
  return s * w.grid().cell_width();
}

double weighted_measure(const StepFunction& w, std::span<const std::size_t> cells) {
  double s = 0.0;
  for (std::size_t i : cells) {
    if (i >= w.size()) throw DomainError("cell index outside the grid");
    s += w[i];
  }
  return s * w.grid().cell_width();
}

double weighted_measure(const StepFunction& w, const Interval& q) {
  if (q.end > w.size()) throw DomainError("interval outside the grid");
  double s = 0.0;
  for (std::size_t i = q.start; i < q.end; ++i) s += w[i];
  return s * w.grid().cell_width();
}

StepFunction refine(const StepFunction& f, int new_depth) {
  const int depth = f.grid().depth();
  if (new_depth < depth) throw DomainError("refine cannot coarsen a step function");
  const std::size_t rep = std::size_t{1} << (new_depth - depth);
  std::vector<double> out;
  out.reserve(f.size() * rep);
  for (double v : f.values()) out.insert(out.end(), rep, v);
  return StepFunction(DyadicGrid(new_depth), std::move(out));
}

void require_same_grid(const StepFunction& a, const StepFunction& b) {
  if (!(a.grid() == b.grid())) throw DomainError("step functions live on different grids");
}

namespace {

template <class Op>
StepFunction cellwise(const StepFunction& a, const StepFunction& b, Op op) {
  require_same_grid(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
  return StepFunction(a.grid(), std::move(out));
}

template <class Op>
StepFunction cellwise(const StepFunction& a, Op op) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i]);
  return StepFunction(a.grid(), std::move(out));
}

}  // namespace

StepFunction abs(const StepFunction& f) {
  return cellwise(f, [](double x) { return std::fabs(x); });
}
StepFunction scale(const StepFunction& f, double c) {
  return cellwise(f, [c](double x) { return c * x; });
}
StepFunction multiply(const StepFunction& a, const StepFunction& b) {
  return cellwise(a, b, [](double x, double y) { return x * y; });
}
StepFunction divide(const StepFunction& a, const StepFunction& b) {
  return cellwise(a, b, [](double x, double y) {
    if (y == 0.0) throw DomainError("cell-wise division by zero");
    return x / y;
  });
}
StepFunction power(const StepFunction& f, double s) {
  return cellwise(f, [s](double x) { return std::pow(x, s); });
}
StepFunction add(const StepFunction& a, const StepFunction& b) {
  return cellwise(a, b, [](double x, double y) { return x + y; });
}

PrefixSums::PrefixSums(std::span<const double> values) : prefix_(values.size() + 1, 0.0) {
  for (std::size_t i = 0; i < values.size(); ++i) prefix_[i + 1] = prefix_[i] + values[i];
}

DyadicPyramid::DyadicPyramid(const StepFunction& f) : depth_(f.grid().depth()) {
  sums_.resize(static_cast<std::size_t>(depth_) + 1);
  sums_[static_cast<std::size_t>(depth_)].assign(f.values().begin(), f.values().end());
  for (int l = depth_ - 1; l >= 0; --l) {
    const auto& below = sums_[static_cast<std::size_t>(l) + 1];
    auto& here = sums_[static_cast<std::size_t>(l)];
    here.resize(below.size() / 2);
    for (std::size_t j = 0; j < here.size(); ++j) here[j] = below[2 * j] + below[2 * j + 1];
  }
}

double DyadicPyramid::mean(const DyadicCube& q) const {
  return sums_[static_cast<std::size_t>(q.level)][q.index] / std::ldexp(1.0, depth_ - q.level);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const StepFunction& f) {
  std::string out = "cell_index,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(f[i]);
    out += '\n';
  }
  return out;
}

StepFunction from_csv(const std::string& csv, int depth) {
  const DyadicGrid grid(depth);
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("cell_index,value", 0) != 0) {
    throw DomainError("step function CSV must start with header cell_index,value");
  }
  std::vector<double> values(grid.cell_count(), 0.0);
  std::vector<bool> seen(grid.cell_count(), false);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("malformed CSV row: " + line);
    std::size_t idx = 0;
    double value = 0.0;
    try {
      idx = std::stoul(line.substr(0, comma));
    } catch (const std::exception&) {
      throw DomainError("malformed CSV row: " + line);
    }
    // strtod rather than stod: subnormal values set ERANGE but are exact.
    const std::string field = line.substr(comma + 1);
    char* end = nullptr;
    value = std::strtod(field.c_str(), &end);
    while (end && (*end == '\r' || *end == ' ')) ++end;
    if (end == field.c_str() || *end != '\0' || std::isinf(value)) throw DomainError("malformed CSV row: " + line);
    if (idx >= values.size() || seen[idx]) throw DomainError("bad or repeated cell index in CSV");
    values[idx] = value;
    seen[idx] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw DomainError("CSV does not cover every cell of the grid");
  }
  return StepFunction(grid, std::move(values));
}

namespace {

std::filesystem::path sidecar(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

}  // namespace

void write_step_function(const StepFunction& f, const std::filesystem::path& csv_path) {
  std::ofstream(csv_path, std::ios::binary) << to_csv(f);
  std::ofstream(sidecar(csv_path), std::ios::binary)
      << nlohmann::json{{"depth", f.grid().depth()}}.dump() << '\n';
}

StepFunction read_step_function(const std::filesystem::path& csv_path) {
  std::ifstream desc(sidecar(csv_path));
  if (!desc) throw DomainError("missing descriptor " + sidecar(csv_path).string());
  const auto j = nlohmann::json::parse(desc);
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + csv_path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_csv(ss.str(), j.at("depth").get<int>());
}

}  // namespace mwl
