#include "mwl/weights.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "mwl/errors.hpp"
#include "mwl/parallel.hpp"

namespace mwl {

std::string to_string(SupMode mode) { return mode == SupMode::dyadic ? "dyadic" : "intervals"; }

SupMode parse_sup_mode(const std::string& text) {
  if (text == "dyadic") return SupMode::dyadic;
  if (text == "intervals") return SupMode::intervals;
  throw ConfigError("mode must be dyadic or intervals, got '" + text + "'");
}

namespace {

std::vector<double> clip_to_floor(std::span<const double> v, double floor) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x = std::max(x, floor);
  return out;
}

double resolve_floor(const StepFunction& values, std::optional<double> floor) {
  const double mx = values.max();
  if (!(mx > 0.0)) throw DomainError("a weight needs at least one positive value");
  const double f = floor.value_or(1e-8 * mx);
  if (!(f > 0.0)) throw DomainError("weight floor must be positive");
  return f;
}

}  // namespace

Weight::Weight(StepFunction values, std::optional<double> floor, std::string provenance)
    : values_(values.grid(), clip_to_floor(values.values(), resolve_floor(values, floor))),
      floor_(resolve_floor(values, floor)),
      provenance_(std::move(provenance)) {}

Weight Weight::constant(const DyadicGrid& grid, double c) {
  return Weight(StepFunction::constant(grid, c), c, "const(" + format_double(c) + ")");
}

// Derived weights keep their exact values: the floor is set to their minimum.
Weight Weight::scaled(double c) const {
  if (!(c > 0.0)) throw DomainError("weights scale by positive constants only");
  auto v = scale(values_, c);
  const double f = v.min();
  return Weight(std::move(v), f, provenance_);
}

Weight Weight::pow(double s) const {
  auto v = power(values_, s);
  const double f = v.min();
  return Weight(std::move(v), f, "pow(" + provenance_ + "," + format_double(s) + ")");
}

Weight Weight::reciprocal() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = 1.0 / values_[i];
  StepFunction v(grid(), std::move(out));
  const double f = v.min();
  return Weight(std::move(v), f, "recip(" + provenance_ + ")");
}

Weight Weight::times(const Weight& other) const {
  auto v = multiply(values_, other.values_);
  const double f = v.min();
  return Weight(std::move(v), f, "product(" + provenance_ + "," + other.provenance_ + ")");
}

namespace {

Weight geometric_mean(const std::vector<Weight>& comps) {
  if (comps.empty()) throw DomainError("a weight vector needs m >= 1 components");
  const auto& grid = comps.front().grid();
  for (const auto& w : comps) {
    if (!(w.grid() == grid)) throw DomainError("weight vector components live on different grids");
  }
  const std::size_t m = comps.size();
  std::vector<double> nu(grid.cell_count());
  for (std::size_t i = 0; i < nu.size(); ++i) {
    double prod = 1.0;
    for (const auto& w : comps) prod *= w[i];
    // sqrt is correctly rounded, so w1 == w2 gives nu == w1 bit-for-bit.
    nu[i] = m == 1 ? prod : m == 2 ? std::sqrt(prod) : std::pow(prod, 1.0 / static_cast<double>(m));
  }
  StepFunction v(grid, std::move(nu));
  const double f = v.min();
  return Weight(std::move(v), f, "nu");
}

}  // namespace

WeightVector::WeightVector(std::vector<Weight> components)
    : components_(std::move(components)), nu_(geometric_mean(components_)) {}

namespace {

struct Best {
  double value = -std::numeric_limits<double>::infinity();
  Interval where;

  // Ties go to the lexicographically smallest interval so that the result
  // does not depend on how the scan was split across workers.
  void offer(double v, std::size_t s, std::size_t e) {
    if (v > value || (v == value && (s < where.start || (s == where.start && e < where.end)))) {
      value = v;
      where = {s, e};
    }
  }
  void merge(const Best& o) {
    if (o.value > -std::numeric_limits<double>::infinity()) offer(o.value, o.where.start, o.where.end);
  }
};

/// Scans every grid-aligned interval: for each start s the functor receives
/// successive ends e = s+1..N through step(s, e), after init(s).
template <class Make>
Achieved scan_intervals(std::size_t n, Make make_scanner) {
  std::vector<Best> partial(thread_count());
  parallel_chunks(n, [&](std::size_t lo, std::size_t hi, unsigned worker) {
    Best best;
    auto scanner = make_scanner();
    for (std::size_t s = lo; s < hi; ++s) {
      scanner.init(s);
      for (std::size_t e = s + 1; e <= n; ++e) best.offer(scanner.step(e), s, e);
    }
    partial[worker] = best;
  });
  Best best;
  for (const auto& b : partial) best.merge(b);
  return {best.value, best.where};
}

/// Visits every dyadic cube with its cell interval.
template <class F>
Achieved scan_dyadic(const DyadicGrid& grid, F value_of) {
  Best best;
  for (int l = 0; l <= grid.depth(); ++l) {
    const std::size_t count = std::size_t{1} << l;
    for (std::size_t j = 0; j < count; ++j) {
      const Interval q = DyadicCube{l, j}.cells(grid);
      best.offer(value_of(q), q.start, q.end);
    }
  }
  return {best.value, best.where};
}

double min_over(std::span<const double> v, const Interval& q) {
  return *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(q.start),
                           v.begin() + static_cast<std::ptrdiff_t>(q.end));
}

double max_over(std::span<const double> v, const Interval& q) {
  return *std::max_element(v.begin() + static_cast<std::ptrdiff_t>(q.start),
                           v.begin() + static_cast<std::ptrdiff_t>(q.end));
}

double mean_over(std::span<const double> v, const Interval& q) {
  double s = 0.0;
  for (std::size_t i = q.start; i < q.end; ++i) s += v[i];
  return s / static_cast<double>(q.size());
}

}  // namespace

Achieved a1_constant(const Weight& w, SupMode mode) {
  const auto v = w.values().values();
  if (mode == SupMode::dyadic) {
    return scan_dyadic(w.grid(), [&](const Interval& q) { return mean_over(v, q) / min_over(v, q); });
  }
  struct Scanner {
    std::span<const double> v;
    std::size_t s = 0;
    double sum = 0.0, mn = 0.0;
    void init(std::size_t start) {
      s = start;
      sum = 0.0;
      mn = std::numeric_limits<double>::infinity();
    }
    double step(std::size_t e) {
      sum += v[e - 1];
      mn = std::min(mn, v[e - 1]);
      return sum / static_cast<double>(e - s) / mn;
    }
  };
  return scan_intervals(w.size(), [&] { return Scanner{v}; });
}

Achieved ap_constant(const Weight& w, double p, SupMode mode) {
  if (!(p > 1.0)) throw DomainError("A_p constant needs p > 1");
  const double dual_exp = -1.0 / (p - 1.0);  // 1 - p'
  const auto v = w.values().values();
  std::vector<double> dual(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dual[i] = std::pow(v[i], dual_exp);
  if (mode == SupMode::dyadic) {
    return scan_dyadic(w.grid(), [&](const Interval& q) {
      return mean_over(v, q) * std::pow(mean_over(dual, q), p - 1.0);
    });
  }
  struct Scanner {
    std::span<const double> v, d;
    double p;
    std::size_t s = 0;
    double sv = 0.0, sd = 0.0;
    void init(std::size_t start) {
      s = start;
      sv = sd = 0.0;
    }
    double step(std::size_t e) {
      sv += v[e - 1];
      sd += d[e - 1];
      const double len = static_cast<double>(e - s);
      return sv / len * std::pow(sd / len, p - 1.0);
    }
  };
  return scan_intervals(w.size(), [&] { return Scanner{v, dual, p}; });
}

Achieved rhinf_constant(const Weight& w, SupMode mode) {
  const auto v = w.values().values();
  if (mode == SupMode::dyadic) {
    return scan_dyadic(w.grid(), [&](const Interval& q) { return max_over(v, q) / mean_over(v, q); });
  }
  struct Scanner {
    std::span<const double> v;
    std::size_t s = 0;
    double sum = 0.0, mx = 0.0;
    void init(std::size_t start) {
      s = start;
      sum = 0.0;
      mx = 0.0;
    }
    double step(std::size_t e) {
      sum += v[e - 1];
      mx = std::max(mx, v[e - 1]);
      return mx / (sum / static_cast<double>(e - s));
    }
  };
  return scan_intervals(w.size(), [&] { return Scanner{v}; });
}

Achieved multilinear_a1_constant(const WeightVector& wv, SupMode mode) {
  const auto nu = wv.nu().values().values();
  const double m = static_cast<double>(wv.m());
  std::vector<std::span<const double>> comps;
  for (const auto& w : wv.components()) comps.push_back(w.values().values());
  if (mode == SupMode::dyadic) {
    return scan_dyadic(wv.grid(), [&](const Interval& q) {
      double value = std::pow(mean_over(nu, q), m);
      for (auto c : comps) value /= min_over(c, q);
      return value;
    });
  }
  struct Scanner {
    std::span<const double> nu;
    const std::vector<std::span<const double>>* comps;
    double m;
    std::size_t s = 0;
    double sum = 0.0;
    std::vector<double> mins;
    void init(std::size_t start) {
      s = start;
      sum = 0.0;
      mins.assign(comps->size(), std::numeric_limits<double>::infinity());
    }
    double step(std::size_t e) {
      sum += nu[e - 1];
      double value = std::pow(sum / static_cast<double>(e - s), m);
      for (std::size_t i = 0; i < mins.size(); ++i) {
        mins[i] = std::min(mins[i], (*comps)[i][e - 1]);
        value /= mins[i];
      }
      return value;
    }
  };
  return scan_intervals(wv.grid().cell_count(), [&] { return Scanner{nu, &comps, m, 0, 0.0, {}}; });
}

Achieved ainf_constant(const Weight& w, SupMode mode) {
  const auto v = w.values().values();
  const auto& grid = w.grid();
  if (mode == SupMode::dyadic) {
    const DyadicPyramid pyr(w.values());
    const int depth = grid.depth();
    return scan_dyadic(grid, [&](const Interval& q) {
      const int level = depth - std::countr_zero(q.size());
      // Running max of ancestor means, pushed down level by level inside q.
      std::vector<double> run{pyr.mean({level, q.start >> (depth - level)})};
      for (int l = level + 1; l <= depth; ++l) {
        std::vector<double> next(run.size() * 2);
        const std::size_t base = q.start >> (depth - l);
        for (std::size_t j = 0; j < next.size(); ++j) {
          next[j] = std::max(run[j / 2], pyr.mean({l, base + j}));
        }
        run = std::move(next);
      }
      double integral = 0.0;
      for (double x : run) integral += x;
      return integral / pyr.level_sums(level)[q.start >> (depth - level)];
    });
  }
  const PrefixSums prefix(v);
  struct Scanner {
    const PrefixSums* prefix;
    std::size_t s = 0;
    std::vector<double> local_max;  // M(w chi_Q) on the cells of Q = [s, e)
    double mass = 0.0;
    void init(std::size_t start) {
      s = start;
      local_max.clear();
      mass = 0.0;
    }
    double step(std::size_t e) {
      // New subintervals of [s, e) are exactly [a, e) with s <= a < e.
      local_max.push_back(0.0);
      double running = 0.0;
      double integral = 0.0;
      for (std::size_t x = s; x < e; ++x) {
        running = std::max(running, prefix->mean({x, e}));
        double& mx = local_max[x - s];
        mx = std::max(mx, running);
        integral += mx;
      }
      mass = prefix->sum({s, e});
      return integral / mass;
    }
  };
  return scan_intervals(w.size(), [&] { return Scanner{&prefix, 0, {}, 0.0}; });
}

ConstantsReport constants_report(const Weight& w, SupMode mode, const std::vector<double>& ps) {
  ConstantsReport r;
  r.mode = mode;
  r.depth = w.grid().depth();
  r.provenance = w.provenance();
  r.a1 = a1_constant(w, mode);
  for (double p : ps) r.ap[p] = ap_constant(w, p, mode);
  r.ainf = ainf_constant(w, mode);
  r.rhinf = rhinf_constant(w, mode);
  return r;
}

nlohmann::json to_json(const Achieved& a, SupMode mode, const DyadicGrid& grid) {
  nlohmann::json j{{"value", a.value}};
  if (mode == SupMode::dyadic && a.where.size() > 0 && std::has_single_bit(a.where.size())) {
    const int level = grid.depth() - std::countr_zero(a.where.size());
    j["cube"] = {{"level", level}, {"index", a.where.start >> (grid.depth() - level)}};
  } else {
    j["interval"] = {{"start_cell", a.where.start}, {"end_cell", a.where.end}};
  }
  return j;
}

nlohmann::json to_json(const ConstantsReport& r) {
  const DyadicGrid grid(r.depth);
  nlohmann::json ap = nlohmann::json::object();
  for (const auto& [p, a] : r.ap) ap[format_double(p)] = to_json(a, r.mode, grid);
  return {{"mode", to_string(r.mode)},
          {"depth", r.depth},
          {"provenance", r.provenance},
          {"a1", to_json(r.a1, r.mode, grid)},
          {"ap", ap},
          {"ainf", to_json(r.ainf, r.mode, grid)},
          {"rhinf", to_json(r.rhinf, r.mode, grid)}};
}

Weight gen_power(double a, double center, const DyadicGrid& grid, std::optional<double> floor) {
  if (!(a > -1.0)) throw DomainError("power weight exponent must exceed -1");
  const std::string prov = "power(" + format_double(a) + "," + format_double(center) + ")";
  if (a == 0.0) return Weight(StepFunction::constant(grid, 1.0), floor, prov);
  const double h = grid.cell_width();
  const double b = a + 1.0;
  std::vector<double> out(grid.cell_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double lo = static_cast<double>(i) * h;
    const double hi = lo + h;
    double integral;
    if (center <= lo) {
      integral = std::pow(hi - center, b) - std::pow(lo - center, b);
    } else if (center >= hi) {
      integral = std::pow(center - lo, b) - std::pow(center - hi, b);
    } else {
      integral = std::pow(center - lo, b) + std::pow(hi - center, b);
    }
    out[i] = integral / (b * h);
  }
  return Weight(StepFunction(grid, std::move(out)), floor, prov);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Weight gen_martingale(std::uint64_t seed, int depth, double beta, int levels) {
  if (levels < 0 || levels > depth) throw DomainError("martingale levels must lie in [0, depth]");
  if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("martingale beta must lie in [0, 1)");
  const DyadicGrid grid(depth);
  std::vector<double> out(grid.cell_count(), 1.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double value = 1.0;
    for (int l = 0; l < levels; ++l) {
      const std::size_t cube = i >> (depth - l);
      const bool left_up = splitmix64(splitmix64(seed ^ (static_cast<std::uint64_t>(l) << 56)) ^ cube) & 1U;
      const bool is_left = ((i >> (depth - l - 1)) & 1U) == 0;
      value *= (is_left == left_up) ? 1.0 + beta : 1.0 - beta;
    }
    out[i] = value;
  }
  return Weight(StepFunction(grid, std::move(out)), std::nullopt,
                "martingale(" + std::to_string(seed) + "," + format_double(beta) + "," + std::to_string(levels) + ")");
}

Weight gen_ainf_factored(const Weight& a1_factor, const Weight& rh_factor) {
  if (!(a1_factor.grid() == rh_factor.grid())) throw DomainError("factored weight: grid mismatch");
  auto v = multiply(a1_factor.values(), rh_factor.values());
  const double f = v.min();
  return Weight(std::move(v), f, "factored(" + a1_factor.provenance() + "," + rh_factor.provenance() + ")");
}

}  // namespace mwl
