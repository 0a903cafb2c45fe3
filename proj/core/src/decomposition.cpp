#include "mwl/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mwl/errors.hpp"
#include "mwl/operators.hpp"

namespace mwl {

void DecompositionConfig::validate() const {
  if (!(a > 2.0)) throw ConfigError("decomposition base a must exceed 2, got " + format_double(a));
  if (m < 1) throw ConfigError("decomposition needs m >= 1");
  if (k_min && k_max && *k_min > *k_max) throw ConfigError("empty k range");
}

namespace {

double ipow(double base, long e) { return std::pow(base, static_cast<double>(e)); }

/// k with base^k < x <= base^(k+1), x > 0.
int upper_band(double x, double base) {
  int k = static_cast<int>(std::ceil(std::log(x) / std::log(base))) - 1;
  while (ipow(base, k) >= x) --k;
  while (ipow(base, k + 1) < x) ++k;
  return k;
}

/// j with base^j <= x < base^(j+1), x > 0.
int lower_band(double x, double base) {
  int j = static_cast<int>(std::floor(std::log(x) / std::log(base)));
  while (ipow(base, j) > x) --j;
  while (ipow(base, j + 1) <= x) ++j;
  return j;
}

double root(double x, int m) {
  if (m == 1) return x;
  if (m == 2) return std::sqrt(x);
  return std::pow(x, 1.0 / m);
}

StepFunction root(const StepFunction& f, int m) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = root(f[i], m);
  return StepFunction(f.grid(), std::move(out));
}

double product_mean(const std::vector<DyadicPyramid>& pyramids, const DyadicCube& q) {
  double val = 1.0;
  for (const auto& p : pyramids) val *= p.mean(q);
  return val;
}

bool within(double recomputed, double stored) {
  return std::fabs(recomputed - stored) <= 1e-12 * std::max(std::fabs(stored), std::fabs(recomputed));
}

}  // namespace

const ForestLevel* CubeForest::level(int k) const {
  for (const auto& lv : levels) {
    if (lv.k == k) return &lv;
  }
  return nullptr;
}

std::vector<DyadicCube> CubeForest::gamma() const {
  std::set<DyadicCube> s;
  for (const auto& c : cubes) {
    if (c.in_gamma) s.insert(c.cube);
  }
  return {s.begin(), s.end()};
}

std::vector<DyadicCube> CubeForest::gamma(int l) const {
  std::set<DyadicCube> s;
  for (const auto& c : cubes) {
    if (c.in_gamma && c.l == l) s.insert(c.cube);
  }
  return {s.begin(), s.end()};
}

std::vector<int> CubeForest::gamma_bands() const {
  std::set<int> s;
  for (const auto& c : cubes) {
    if (c.in_gamma) s.insert(c.l);
  }
  return {s.begin(), s.end()};
}

CubeForest build_forest(std::span<const StepFunction> fv, const Weight& v, const DecompositionConfig& cfg_in) {
  DecompositionConfig cfg = cfg_in;
  if (fv.empty()) throw DomainError("decomposition needs at least one function");
  cfg.m = static_cast<int>(fv.size());
  cfg.validate();
  for (const auto& f : fv) {
    require_same_grid(f, v.values());
    for (double x : f.values()) {
      if (x < 0.0) throw DomainError("decomposition needs nonnegative functions");
    }
  }
  const auto& grid = v.grid();
  const int m = cfg.m;
  const double am = ipow(cfg.a, m);

  CubeForest forest;
  forest.cfg = cfg;
  forest.depth = grid.depth();
  forest.dyadic_maximal = multilinear_maximal(fv, SupMode::dyadic);
  forest.v = v.values();
  const auto& md = forest.dyadic_maximal;
  const std::size_t n = grid.cell_count();

  forest.level_set.assign(n, false);
  std::vector<int> cell_band(n);
  int e_min = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < n; ++i) {
    cell_band[i] = upper_band(v[i], am);
    const double ratio = md[i] / v[i];
    if (ratio > 1.0 && ratio <= 2.0) {
      forest.level_set[i] = true;
      e_min = std::min(e_min, cell_band[i]);
    }
  }

  const double md_max = md.max();
  if (!(md_max > 0.0)) return forest;

  std::vector<DyadicPyramid> pyramids;
  for (const auto& f : fv) pyramids.emplace_back(f);
  const DyadicPyramid vroot(root(v.values(), m));

  // Below k_root the root cube itself is selected; those levels are kept
  // only so that every nonempty E_k has its Omega_k.
  const double root_product = product_mean(pyramids, {0, 0});
  int k_lo = root_product > 0.0 ? upper_band(root_product, am) + 1 : upper_band(md_max, am);
  k_lo = std::min(k_lo, e_min);
  int k_hi = upper_band(md_max, am);
  if (cfg.k_min) k_lo = std::max(k_lo, *cfg.k_min);
  if (cfg.k_max) k_hi = std::min(k_hi, *cfg.k_max);

  for (int k = k_lo; k <= k_hi; ++k) {
    const double lambda = ipow(am, k);
    ForestLevel lv;
    lv.k = k;
    lv.omega.assign(n, false);
    lv.e_set.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      lv.omega[i] = md[i] > lambda;
      lv.e_set[i] = forest.level_set[i] && cell_band[i] == k;
    }
    std::vector<DyadicCube> stack{{0, 0}};
    while (!stack.empty()) {
      const DyadicCube q = stack.back();
      stack.pop_back();
      const double prod = product_mean(pyramids, q);
      if (prod > lambda) {
        ForestCube fc;
        fc.k = k;
        fc.cube = q;
        fc.product_average = prod;
        fc.v_root_average = vroot.mean(q);
        fc.l = lower_band(fc.v_root_average, cfg.a) - k;
        const Interval cells = q.cells(grid);
        for (std::size_t i = cells.start; i < cells.end && !fc.in_gamma; ++i) fc.in_gamma = cell_band[i] == k;
        lv.cubes.push_back(forest.cubes.size());
        forest.cubes.push_back(fc);
      } else if (q.level < grid.depth()) {
        stack.push_back(q.child(1));
        stack.push_back(q.child(0));
      }
    }
    forest.levels.push_back(std::move(lv));
  }
  return forest;
}

ForestAudit audit_forest(const CubeForest& forest, std::span<const StepFunction> fv, const Weight& v,
                         const Weight& nu) {
  ForestAudit audit;
  auto check = [&audit](bool ok, const std::string& what) {
    ++audit.checks;
    if (!ok) {
      audit.ok = false;
      if (audit.failures.size() < 50) audit.failures.push_back(what);
    }
  };
  const auto& cfg = forest.cfg;
  const int m = cfg.m;
  const double am = ipow(cfg.a, m);
  const DyadicGrid grid(forest.depth);
  const std::size_t n = grid.cell_count();
  const auto vroot = root(v.values(), m);
  const StepFunction mu = multiply(nu.values(), vroot);

  CellSet seen_e(n, false);
  double e_mass = 0.0;
  for (const auto& lv : forest.levels) {
    const std::string tag = "k=" + std::to_string(lv.k) + ": ";
    const double lambda = ipow(am, lv.k);
    CellSet covered(n, false);
    for (std::size_t idx : lv.cubes) {
      const auto& fc = forest.cubes[idx];
      const Interval cells = fc.cube.cells(grid);
      const std::string ctag = tag + "cube (" + std::to_string(fc.cube.level) + "," + std::to_string(fc.cube.index) + ") ";
      for (std::size_t i = cells.start; i < cells.end; ++i) {
        check(!covered[i], ctag + "overlaps another maximal cube");
        covered[i] = true;
      }
      // Sandwich with the stored pyramid averages, then with direct sums.
      check(fc.product_average > lambda, ctag + "lower sandwich bound");
      if (fc.cube.level > 0) check(fc.product_average <= ipow(2.0, m) * lambda, ctag + "upper sandwich bound");
      double direct = 1.0;
      for (const auto& f : fv) direct *= average(f, fc.cube);
      check(within(direct, fc.product_average), ctag + "recomputed product average disagrees");
      if (fc.cube.level > 0) {
        double parent = 1.0;
        for (const auto& f : fv) parent *= average(f, fc.cube.parent());
        check(parent <= lambda * (1.0 + 1e-12), ctag + "parent also exceeds the level (not maximal)");
      }
      const double vavg = average(vroot, fc.cube);
      check(within(vavg, fc.v_root_average), ctag + "recomputed <v^(1/m)> disagrees");
      check(ipow(cfg.a, lv.k + fc.l) <= fc.v_root_average && fc.v_root_average < ipow(cfg.a, lv.k + fc.l + 1),
            ctag + "band l does not bracket <v^(1/m)>");
      bool meets = false;
      for (std::size_t i = cells.start; i < cells.end; ++i) {
        meets = meets || (ipow(am, lv.k) < v[i] && v[i] <= ipow(am, lv.k + 1));
      }
      check(meets == fc.in_gamma, ctag + "Gamma membership disagrees with the band intersection");
    }
    for (std::size_t i = 0; i < n; ++i) {
      check(covered[i] == static_cast<bool>(lv.omega[i]), tag + "maximal cubes do not tile Omega_k");
      if (lv.e_set[i]) {
        check(!seen_e[i], tag + "E_k sets overlap");
        seen_e[i] = true;
        check(static_cast<bool>(lv.omega[i]), tag + "E_k not inside Omega_k");
        e_mass += mu[i];
      }
    }
  }
  double level_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (forest.level_set[i]) level_mass += mu[i];
  }
  check(within(e_mass, level_mass) || (e_mass == 0.0 && level_mass == 0.0),
        "E_k do not partition the level set {1 < M_d/v <= 2}");
  return audit;
}

PrincipalForest principal_cubes(const CubeForest& forest, const Weight& nu, int l, SupMode a1_mode) {
  PrincipalForest pf;
  pf.l = l;
  const auto family = forest.gamma(l);
  if (family.empty()) return pf;
  const DyadicPyramid pyr(nu.values());
  const std::set<DyadicCube> members(family.begin(), family.end());

  auto has_ancestor_in = [](const DyadicCube& q, const std::set<DyadicCube>& s) {
    for (DyadicCube a = q; a.level > 0;) {
      a = a.parent();
      if (s.count(a)) return true;
    }
    return false;
  };

  std::vector<DyadicCube> current;
  for (const auto& q : family) {
    if (!has_ancestor_in(q, members)) current.push_back(q);
  }
  pf.maximal = current;
  std::set<DyadicCube> principal(current.begin(), current.end());
  while (!current.empty()) {
    pf.generations.push_back(current);
    std::vector<DyadicCube> next;
    for (const auto& p : current) {
      const double threshold = 2.0 * pyr.mean(p);
      std::set<DyadicCube> candidates;
      for (const auto& q : family) {
        if (q.level > p.level && p.contains(q) && pyr.mean(q) > threshold) candidates.insert(q);
      }
      for (const auto& q : candidates) {
        if (!has_ancestor_in(q, candidates)) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    principal.insert(next.begin(), next.end());
    current = std::move(next);
  }
  for (const auto& q : family) {
    DyadicCube a = q;
    while (!principal.count(a)) a = a.parent();
    pf.pi[q] = a;
  }

  pf.nu_a1 = a1_constant(nu, a1_mode).value;
  const DyadicGrid grid(forest.depth);
  std::vector<double> sum(grid.cell_count(), 0.0);
  CellSet covered(grid.cell_count(), false);
  for (const auto& p : principal) {
    const double avg = pyr.mean(p);
    const Interval cells = p.cells(grid);
    for (std::size_t i = cells.start; i < cells.end; ++i) {
      sum[i] += avg;
      covered[i] = true;
    }
  }
  for (std::size_t i = 0; i < sum.size(); ++i) {
    if (!covered[i]) continue;
    const double ratio = sum[i] / (2.0 * pf.nu_a1 * nu[i]);
    pf.carleson_ratio = std::max(pf.carleson_ratio, ratio);
  }
  pf.carleson_ok = pf.carleson_ratio <= 1.0;
  return pf;
}

SparseReport verify_sparse(std::span<const DyadicCube> family, double lambda_max) {
  SparseReport rep;
  if (family.empty()) {
    rep.pass = true;
    return rep;
  }
  const std::set<DyadicCube> unique(family.begin(), family.end());
  // Every cube adds its length (in units of its own level) to each member
  // ancestor, including itself.
  std::map<DyadicCube, double> packed;
  for (const auto& q : unique) packed[q] += 1.0;
  for (const auto& q : unique) {
    DyadicCube a = q;
    while (a.level > 0) {
      a = a.parent();
      auto it = packed.find(a);
      if (it != packed.end()) it->second += std::ldexp(1.0, a.level - q.level);
    }
  }
  for (const auto& [q, total] : packed) {
    if (total > rep.packing) {
      rep.packing = total;
      rep.attained = q;
    }
  }
  rep.eta = 1.0 / rep.packing;
  rep.pass = rep.packing <= lambda_max;
  return rep;
}

std::size_t DecayTable::nonzero_nonnegative_rows() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const DecayRow& r) { return r.l >= 0 && r.max_ratio > 0.0; }));
}

DecayTable measure_decay(const CubeForest& forest, const Weight& nu, const DecompositionConfig& cfg) {
  cfg.validate();
  DecayTable table;
  const DyadicGrid grid(forest.depth);
  std::map<int, DecayRow> rows;
  for (const auto& fc : forest.cubes) {
    if (!fc.in_gamma) continue;
    const ForestLevel* lv = forest.level(fc.k);
    const Interval cells = fc.cube.cells(grid);
    double inside = 0.0, total = 0.0;
    for (std::size_t i = cells.start; i < cells.end; ++i) {
      total += nu[i];
      if (lv->e_set[i]) inside += nu[i];
    }
    auto& row = rows[fc.l];
    row.l = fc.l;
    row.max_ratio = std::max(row.max_ratio, inside / total);
    ++row.cubes;
  }
  for (const auto& [l, row] : rows) table.rows.push_back(row);

  std::vector<double> xs, ys;
  double previous = -1.0;
  for (const auto& row : table.rows) {
    if (row.l < 0) {
      table.c1_negative = std::max(table.c1_negative, row.max_ratio / ipow(cfg.a, row.l));
      continue;
    }
    if (previous > 0.0 && row.max_ratio > 4.0 * previous) table.trend_violations.push_back(row.l);
    previous = row.max_ratio;
    if (row.max_ratio > 0.0) {
      xs.push_back(row.l);
      ys.push_back(std::log(row.max_ratio));
    }
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    table.fitted = true;
    table.c2 = -slope;
    table.c1 = std::exp((sy - slope * sx) / n);
  }
  return table;
}

Achieved lemma_rh_ratio(const Weight& w1, const Weight& w2, SupMode mode) {
  if (!(w1.grid() == w2.grid())) throw DomainError("lemma ratio: grid mismatch");
  const auto a = w1.values().values();
  const auto b = w2.values().values();
  const std::size_t n = a.size();
  std::vector<double> ab(n);
  for (std::size_t i = 0; i < n; ++i) ab[i] = a[i] * b[i];

  Achieved best{-1.0, {}};
  auto offer = [&best](double sab, double sa, double sb, double len, std::size_t s, std::size_t e) {
    const double value = (sab / len) / ((sa / len) * (sb / len));
    if (value > best.value) best = {value, {s, e}};
  };
  if (mode == SupMode::dyadic) {
    const auto& grid = w1.grid();
    for (int l = 0; l <= grid.depth(); ++l) {
      for (std::size_t j = 0; j < (std::size_t{1} << l); ++j) {
        const Interval q = DyadicCube{l, j}.cells(grid);
        double sab = 0, sa = 0, sb = 0;
        for (std::size_t i = q.start; i < q.end; ++i) {
          sab += ab[i];
          sa += a[i];
          sb += b[i];
        }
        offer(sab, sa, sb, static_cast<double>(q.size()), q.start, q.end);
      }
    }
    return best;
  }
  for (std::size_t s = 0; s < n; ++s) {
    double sab = 0, sa = 0, sb = 0;
    for (std::size_t e = s + 1; e <= n; ++e) {
      sab += ab[e - 1];
      sa += a[e - 1];
      sb += b[e - 1];
      offer(sab, sa, sb, static_cast<double>(e - s), s, e);
    }
  }
  return best;
}

nlohmann::json forest_summary(const CubeForest& forest) {
  std::map<std::pair<int, int>, std::pair<int, int>> counts;
  for (const auto& c : forest.cubes) {
    auto& slot = counts[{c.k, c.l}];
    ++slot.first;
    if (c.in_gamma) ++slot.second;
  }
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& [kl, n] : counts) {
    bands.push_back({{"k", kl.first}, {"l", kl.second}, {"cubes", n.first}, {"gamma", n.second}});
  }
  std::size_t level_cells = 0;
  for (bool b : forest.level_set) level_cells += b ? 1 : 0;
  nlohmann::json j{{"depth", forest.depth},
                   {"a", forest.cfg.a},
                   {"m", forest.cfg.m},
                   {"maximal_cubes", forest.cubes.size()},
                   {"gamma_cubes", forest.gamma().size()},
                   {"level_set_cells", level_cells},
                   {"bands", bands}};
  if (!forest.levels.empty()) {
    j["k_min"] = forest.levels.front().k;
    j["k_max"] = forest.levels.back().k;
  }
  return j;
}

std::string decay_csv(const DecayTable& table) {
  std::string out = "l,max_ratio\n";
  for (const auto& r : table.rows) out += std::to_string(r.l) + "," + format_double(r.max_ratio) + "\n";
  return out;
}

std::string cube_listing_csv(const CubeForest& forest) {
  std::string out = "k,l,level,index\n";
  for (const auto& c : forest.cubes) {
    out += std::to_string(c.k) + "," + std::to_string(c.l) + "," + std::to_string(c.cube.level) + "," +
           std::to_string(c.cube.index) + "\n";
  }
  return out;
}

}  // namespace mwl
