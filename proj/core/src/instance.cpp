#include "mwl/instance.hpp"

#include <algorithm>
#include <cmath>

#include "mwl/errors.hpp"

namespace mwl {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

/// Splits on `sep` outside parentheses.
std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0) throw ConfigError("unbalanced parentheses in '" + s + "'");
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) throw ConfigError("unbalanced parentheses in '" + s + "'");
  out.push_back(trim(cur));
  return out;
}

struct Call {
  std::string name;
  std::vector<std::string> args;
};

Call parse_call(const std::string& text) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos) return {s, {}};
  if (s.back() != ')') throw ConfigError("malformed spec '" + s + "'");
  Call c{trim(s.substr(0, open)), {}};
  const std::string inner = s.substr(open + 1, s.size() - open - 2);
  if (!trim(inner).empty()) c.args = split_top(inner, ',');
  return c;
}

void arity(const Call& c, std::size_t n) {
  if (c.args.size() != n) {
    throw ConfigError("spec '" + c.name + "' takes " + std::to_string(n) + " arguments, got " +
                      std::to_string(c.args.size()));
  }
}

double number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used == s.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("expected a number, got '" + s + "'");
}

long long integer(const std::string& s) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(s, &used);
    if (used == s.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("expected an integer, got '" + s + "'");
}

std::string slot(const char* base, int i) { return std::string(base) + std::to_string(i + 1); }

}  // namespace

Weight build_weight(const std::string& spec, const DyadicGrid& grid) {
  const Call c = parse_call(spec);
  if (c.name == "const") {
    arity(c, 1);
    const double v = number(c.args[0]);
    if (!(v > 0.0)) throw ConfigError("constant weight must be positive");
    return Weight(StepFunction::constant(grid, v), v, "const(" + c.args[0] + ")");
  }
  if (c.name == "power") {
    arity(c, 2);
    return gen_power(number(c.args[0]), number(c.args[1]), grid);
  }
  if (c.name == "martingale") {
    arity(c, 3);
    const long long seed = integer(c.args[0]);
    const long long levels = integer(c.args[2]);
    if (seed < 0 || levels < 0) throw ConfigError("martingale seed and levels must be nonnegative");
    // Coarser grids cannot hold all levels; the weight is the same family.
    return gen_martingale(static_cast<std::uint64_t>(seed), grid.depth(), number(c.args[1]),
                          static_cast<int>(std::min<long long>(levels, grid.depth())));
  }
  if (c.name == "product") {
    arity(c, 2);
    return build_weight(c.args[0], grid).times(build_weight(c.args[1], grid));
  }
  if (c.name == "factored") {
    arity(c, 2);
    return gen_ainf_factored(build_weight(c.args[0], grid), build_weight(c.args[1], grid));
  }
  if (c.name == "pow") {
    arity(c, 2);
    return build_weight(c.args[0], grid).pow(number(c.args[1]));
  }
  if (c.name == "recip") {
    arity(c, 1);
    return build_weight(c.args[0], grid).reciprocal();
  }
  throw ConfigError("unknown weight spec '" + spec + "'");
}

StepFunction build_function(const std::string& spec, const DyadicGrid& grid) {
  std::vector<double> out(grid.cell_count(), 0.0);
  for (const auto& term : split_top(spec, '+')) {
    const Call c = parse_call(term);
    if (c.name == "zero") {
      arity(c, 0);
    } else if (c.name == "const") {
      arity(c, 1);
      const double v = number(c.args[0]);
      for (double& x : out) x += v;
    } else if (c.name == "ind") {
      arity(c, 3);
      const double v = number(c.args[0]);
      const long long level = integer(c.args[1]);
      const long long index = integer(c.args[2]);
      if (level < 0 || level > grid.depth()) throw DomainError("indicator level outside [0, depth]");
      if (index < 0 || index >= (1LL << level)) throw DomainError("indicator index outside the level");
      const Interval q = DyadicCube{static_cast<int>(level), static_cast<std::size_t>(index)}.cells(grid);
      for (std::size_t i = q.start; i < q.end; ++i) out[i] += v;
    } else if (c.name == "bump") {
      arity(c, 3);
      const double v = number(c.args[0]);
      const long long offset = integer(c.args[1]);
      const double x = number(c.args[2]);
      if (offset < 0) throw ConfigError("bump offset must be nonnegative");
      if (!(x >= 0.0 && x < 1.0)) throw DomainError("bump point must lie in [0, 1)");
      const int level = static_cast<int>(std::max<long long>(0, grid.depth() - offset));
      const auto cell = static_cast<std::size_t>(std::floor(x * static_cast<double>(grid.cell_count())));
      const Interval q = ancestor_at(grid, cell, level).cells(grid);
      const double height = std::ldexp(v, level);
      for (std::size_t i = q.start; i < q.end; ++i) out[i] += height;
    } else {
      throw ConfigError("unknown function spec '" + term + "'");
    }
  }
  return StepFunction(grid, std::move(out));
}

std::vector<StepFunction> build_family(const std::string& spec, const DyadicGrid& grid) {
  std::vector<StepFunction> out;
  for (const auto& part : split_top(spec, ';')) out.push_back(build_function(part, grid));
  return out;
}

Instance Instance::from_config(const FlatConfig& cfg) {
  Instance inst;
  inst.theorem = parse_theorem(cfg.get("theorem", to_string(inst.theorem)));
  inst.m = static_cast<int>(cfg.get_int("m", inst.m));
  inst.depth = static_cast<int>(cfg.get_int("depth", inst.depth));
  if (inst.m < 1 || inst.m > 8) throw ConfigError("m must lie in [1, 8]");
  if (inst.depth < 0 || inst.depth > DyadicGrid::kMaxDepth) throw ConfigError("depth must lie in [0, 24]");
  inst.mode = parse_sup_mode(cfg.get("mode", to_string(inst.mode)));
  inst.constants_mode = parse_sup_mode(cfg.get("constants_mode", to_string(inst.constants_mode)));
  inst.compute_constants = cfg.get_bool("constants", inst.compute_constants);
  inst.seed = cfg.get_u64("seed", inst.seed);
  for (int i = 0; i < inst.m; ++i) {
    inst.f.push_back(cfg.get(slot("f", i), "const(1)"));
    inst.w.push_back(cfg.get(slot("w", i), "const(1)"));
  }
  inst.v = cfg.get("v", inst.v);
  inst.u = cfg.get("u", inst.u);
  const std::string op = cfg.get("operator", "M");
  if (op == "M") {
    inst.op = LinearOperator::maximal;
  } else if (op == "riesz") {
    inst.op = LinearOperator::riesz;
  } else {
    throw ConfigError("operator must be M or riesz");
  }
  inst.pv_radius = cfg.get_double("pv_radius", inst.pv_radius);
  inst.pv_component = static_cast<int>(cfg.get_int("pv_component", inst.pv_component));
  inst.override_cost_cap = cfg.get_bool("override_cost_cap", inst.override_cost_cap);
  inst.r = cfg.get_double("r", inst.r);
  inst.regime = parse_regime(cfg.get("regime", to_string(inst.regime)));
  return inst;
}

FlatConfig Instance::to_config() const {
  FlatConfig cfg;
  cfg.set("theorem", to_string(theorem));
  cfg.set("m", m);
  cfg.set("depth", depth);
  cfg.set("mode", to_string(mode));
  cfg.set("constants_mode", to_string(constants_mode));
  cfg.set("constants", compute_constants ? "1" : "0");
  cfg.set("seed", std::to_string(seed));
  for (int i = 0; i < m; ++i) {
    cfg.set(slot("f", i), f[static_cast<std::size_t>(i)]);
    cfg.set(slot("w", i), w[static_cast<std::size_t>(i)]);
  }
  cfg.set("v", v);
  cfg.set("u", u);
  cfg.set("operator", op == LinearOperator::maximal ? "M" : "riesz");
  cfg.set("pv_radius", pv_radius);
  cfg.set("pv_component", pv_component);
  cfg.set("override_cost_cap", override_cost_cap ? "1" : "0");
  cfg.set("r", r);
  cfg.set("regime", to_string(regime));
  return cfg;
}

Instance Instance::at_depth(int d) const {
  Instance copy = *this;
  copy.depth = d;
  return copy;
}

PVConfig Instance::pv() const {
  PVConfig cfg;
  cfg.m = m;
  cfg.component = pv_component;
  cfg.exclusion_radius = pv_radius;
  cfg.override_cost_cap = override_cost_cap;
  return cfg;
}

InequalityReport run_instance(const Instance& inst) {
  const DyadicGrid grid(inst.depth);
  CheckOptions opt;
  opt.mode = inst.mode;
  opt.constants_mode = inst.constants_mode;
  opt.compute_constants = inst.compute_constants;
  opt.regime = inst.regime;
  for (int i = 0; i < inst.m; ++i) {
    opt.provenance[slot("f", i)] = inst.f[static_cast<std::size_t>(i)];
    opt.provenance[slot("w", i)] = inst.w[static_cast<std::size_t>(i)];
  }
  opt.provenance["v"] = inst.v;
  opt.provenance["seed"] = std::to_string(inst.seed);

  const Weight v = build_weight(inst.v, grid);
  switch (inst.theorem) {
    case TheoremId::SAWYER_1_1:
    case TheoremId::CMP_1_2:
    case TheoremId::LOP_1_3: {
      if (inst.m != 1) throw ConfigError(to_string(inst.theorem) + " is a linear inequality; set m = 1");
      opt.provenance["u"] = inst.u;
      return check_linear(build_function(inst.f[0], grid), build_weight(inst.u, grid), v, inst.op, inst.pv(), opt,
                          inst.theorem);
    }
    default:
      break;
  }

  std::vector<Weight> comps;
  for (const auto& spec : inst.w) comps.push_back(build_weight(spec, grid));
  const WeightVector wv(std::move(comps));
  if (inst.theorem == TheoremId::VV_4_2) {
    std::vector<std::vector<StepFunction>> families;
    for (const auto& spec : inst.f) families.push_back(build_family(spec, grid));
    return check_vector_valued(families, wv, v, inst.r, inst.pv(), opt);
  }
  std::vector<StepFunction> fv;
  for (const auto& spec : inst.f) fv.push_back(build_function(spec, grid));
  switch (inst.theorem) {
    case TheoremId::MAIN_1_4:
      return check_main(fv, wv, v, opt);
    case TheoremId::MAX_1_5:
      return check_max(fv, wv, v, opt);
    case TheoremId::CONJ_1_6:
      return check_conjecture(fv, wv, v, opt);
    case TheoremId::MUCZO_1_7:
    case TheoremId::COR_1_8:
      return check_muczo(fv, wv, v, inst.pv(), opt, inst.theorem);
    case TheoremId::EXTRAP_A:
      return check_extrapolation(fv, wv, v, inst.pv(), opt);
    default:
      throw ConfigError("unsupported theorem");
  }
}

}  // namespace mwl
