#include "mwl/inequalities.hpp"

#include <array>
#include <cmath>

#include <nlohmann/json.hpp>

#include "mwl/errors.hpp"

namespace mwl {
namespace {

constexpr std::array<std::pair<TheoremId, const char*>, 10> kTheoremNames{{
    {TheoremId::SAWYER_1_1, "SAWYER_1_1"},
    {TheoremId::CMP_1_2, "CMP_1_2"},
    {TheoremId::LOP_1_3, "LOP_1_3"},
    {TheoremId::MAIN_1_4, "MAIN_1_4"},
    {TheoremId::MAX_1_5, "MAX_1_5"},
    {TheoremId::CONJ_1_6, "CONJ_1_6"},
    {TheoremId::MUCZO_1_7, "MUCZO_1_7"},
    {TheoremId::COR_1_8, "COR_1_8"},
    {TheoremId::EXTRAP_A, "EXTRAP_A"},
    {TheoremId::VV_4_2, "VV_4_2"},
}};

constexpr std::array<std::pair<Regime, const char*>, 5> kRegimeNames{{
    {Regime::unspecified, "unspecified"},
    {Regime::H1, "H1"},
    {Regime::H2, "H2"},
    {Regime::H3, "H3"},
    {Regime::RH, "RH"},
}};

}  // namespace

std::string to_string(TheoremId id) {
  for (const auto& [k, name] : kTheoremNames) {
    if (k == id) return name;
  }
  return "?";
}

TheoremId parse_theorem(const std::string& text) {
  for (const auto& [k, name] : kTheoremNames) {
    if (text == name) return k;
  }
  throw ConfigError("unknown theorem id '" + text + "'");
}

std::string to_string(Regime r) {
  for (const auto& [k, name] : kRegimeNames) {
    if (k == r) return name;
  }
  return "?";
}

Regime parse_regime(const std::string& text) {
  for (const auto& [k, name] : kRegimeNames) {
    if (text == name) return k;
  }
  throw ConfigError("unknown regime '" + text + "'");
}

std::optional<double> InequalityReport::constant(const std::string& name) const {
  for (const auto& c : hypothesis_constants) {
    if (c.name == name) return c.value;
  }
  return std::nullopt;
}

nlohmann::json to_json(const InequalityReport& r) {
  const DyadicGrid grid(r.grid_depth);
  nlohmann::json constants = nlohmann::json::array();
  for (const auto& c : r.hypothesis_constants) {
    auto j = to_json(Achieved{c.value, c.where}, c.mode, grid);
    j["name"] = c.name;
    j["mode"] = to_string(c.mode);
    constants.push_back(std::move(j));
  }
  return {{"schema", InequalityReport::kSchema},
          {"theorem", to_string(r.theorem)},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"ratio", r.ratio},
          {"witness_t", r.witness_t},
          {"degenerate", r.degenerate},
          {"label", r.label},
          {"regime", to_string(r.regime)},
          {"hypothesis_constants", constants},
          {"input_provenance", r.input_provenance},
          {"grid_depth", r.grid_depth},
          {"mode", to_string(r.mode)},
          {"operator_config", r.operator_config}};
}

std::string to_csv(const InequalityReport& r) {
  std::string out = "key,value\n";
  auto row = [&out](const std::string& k, const std::string& v) { out += k + "," + v + "\n"; };
  row("schema", InequalityReport::kSchema);
  row("theorem", to_string(r.theorem));
  row("lhs", format_double(r.lhs));
  row("rhs", format_double(r.rhs));
  row("ratio", format_double(r.ratio));
  row("witness_t", format_double(r.witness_t));
  row("degenerate", r.degenerate ? "true" : "false");
  row("label", r.label);
  row("regime", to_string(r.regime));
  for (const auto& c : r.hypothesis_constants) {
    row("constant." + c.name, format_double(c.value));
    row("constant." + c.name + ".mode", to_string(c.mode));
    row("constant." + c.name + ".interval", std::to_string(c.where.start) + ":" + std::to_string(c.where.end));
  }
  for (const auto& [k, v] : r.input_provenance) row("input." + k, "\"" + v + "\"");
  row("grid_depth", std::to_string(r.grid_depth));
  row("mode", to_string(r.mode));
  for (const auto& [k, v] : r.operator_config) row("operator." + k, v);
  return out;
}

void require_nondegenerate(const InequalityReport& r) {
  if (r.degenerate) throw DegenerateInput(to_string(r.theorem) + ": comparison side vanishes");
}

namespace {

double root(double x, std::size_t m) {
  if (m == 1) return x;
  if (m == 2) return std::sqrt(x);
  return std::pow(x, 1.0 / static_cast<double>(m));
}

StepFunction root(const StepFunction& f, std::size_t m) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = root(f[i], m);
  return StepFunction(f.grid(), std::move(out));
}

Weight weight_root(const Weight& v, std::size_t m) {
  auto r = root(v.values(), m);
  const double f = r.min();
  return Weight(std::move(r), f, "root(" + v.provenance() + "," + std::to_string(m) + ")");
}

void check_common_grid(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v) {
  if (fv.size() != wv.m()) throw DomainError("need one weight per function slot");
  for (const auto& f : fv) require_same_grid(f, v.values());
  require_same_grid(wv.nu().values(), v.values());
}

class Assembler {
 public:
  Assembler(TheoremId id, const DyadicGrid& grid, const CheckOptions& opt) : opt_(opt) {
    r_.theorem = id;
    r_.grid_depth = grid.depth();
    r_.mode = opt.mode;
    r_.regime = opt.regime;
    r_.input_provenance = opt.provenance;
    r_.operator_config["maximal_mode"] = to_string(opt.mode);
  }

  void sides(NormValue lhs, double rhs) {
    r_.lhs = lhs.value;
    r_.witness_t = lhs.witness_t;
    r_.rhs = rhs;
    r_.degenerate = !(rhs > 0.0);
    r_.ratio = r_.degenerate ? 0.0 : lhs.value / rhs;
  }

  void a1(const std::string& name, const Weight& w) {
    if (!opt_.compute_constants) return;
    add(name, a1_constant(w, opt_.constants_mode), opt_.constants_mode);
  }
  void ainf(const std::string& name, const Weight& w) {
    if (!opt_.compute_constants) return;
    SupMode mode = opt_.constants_mode;
    if (mode == SupMode::intervals && w.grid().depth() > opt_.ainf_intervals_max_depth) mode = SupMode::dyadic;
    add(name, ainf_constant(w, mode), mode);
  }
  void rhinf(const std::string& name, const Weight& w) {
    if (!opt_.compute_constants) return;
    add(name, rhinf_constant(w, opt_.constants_mode), opt_.constants_mode);
  }
  void multilinear_a1(const WeightVector& wv) {
    if (!opt_.compute_constants) return;
    const auto a = multilinear_a1_constant(wv, opt_.constants_mode);
    add("a1_vec(w)", a, opt_.constants_mode);
    add("a1_vec(w)^(1/m)", {root(a.value, wv.m()), a.where}, opt_.constants_mode);
  }
  void pv(const PVConfig& cfg) {
    r_.operator_config["pv_m"] = std::to_string(cfg.m);
    r_.operator_config["pv_component"] = std::to_string(cfg.component);
    r_.operator_config["pv_exclusion_radius"] = format_double(cfg.exclusion_radius);
  }

  InequalityReport& report() { return r_; }

 private:
  void add(const std::string& name, const Achieved& a, SupMode mode) {
    r_.hypothesis_constants.push_back({name, a.value, mode, a.where});
  }

  const CheckOptions& opt_;
  InequalityReport r_;
};

double product_of_l1(std::span<const StepFunction> fv, const WeightVector& wv) {
  double rhs = 1.0;
  for (std::size_t i = 0; i < fv.size(); ++i) rhs *= lp_norm(fv[i], WeightedMeasure(wv[i]), 1.0);
  return rhs;
}

std::string slot_name(const char* base, std::size_t i) { return std::string(base) + std::to_string(i + 1); }

StepFunction abs_riesz(std::span<const StepFunction> fv, const PVConfig& pv) {
  return abs(multilinear_riesz(fv, pv));
}

}  // namespace

WeightedMeasure mixed_measure(const Weight& nu, const Weight& v, std::size_t m) {
  return WeightedMeasure(multiply(nu.values(), root(v.values(), m)));
}

InequalityReport check_main(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                            const CheckOptions& opt) {
  check_common_grid(fv, wv, v);
  const std::size_t m = wv.m();
  Assembler a(TheoremId::MAIN_1_4, v.grid(), opt);
  const auto g = divide(product_of_maximals(fv, opt.mode), v.values());
  a.sides(weak_quasinorm(g, mixed_measure(wv.nu(), v, m), 1.0 / static_cast<double>(m)), product_of_l1(fv, wv));
  for (std::size_t i = 0; i < m; ++i) a.a1(slot_name("a1(w", i) + ")", wv[i]);
  a.ainf("ainf(v)", v);
  return a.report();
}

namespace {

InequalityReport max_pipeline(TheoremId id, std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                              const CheckOptions& opt) {
  check_common_grid(fv, wv, v);
  const std::size_t m = wv.m();
  Assembler a(id, v.grid(), opt);
  const auto g = divide(multilinear_maximal(fv, opt.mode), v.values());
  a.sides(weak_quasinorm(g, mixed_measure(wv.nu(), v, m), 1.0 / static_cast<double>(m)), product_of_l1(fv, wv));
  a.multilinear_a1(wv);
  a.a1("a1(nu)", wv.nu());
  const auto vroot = weight_root(v, m);
  if (id == TheoremId::CONJ_1_6) a.ainf("ainf(v^(1/m))", vroot);
  a.ainf("ainf(nu*v^(1/m))", wv.nu().times(vroot));
  return a.report();
}

}  // namespace

InequalityReport check_max(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                           const CheckOptions& opt) {
  return max_pipeline(TheoremId::MAX_1_5, fv, wv, v, opt);
}

InequalityReport check_conjecture(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                                  const CheckOptions& opt) {
  if (opt.regime == Regime::unspecified) {
    throw ConfigError("conjecture runs need a declared hypothesis regime (H1, H2, H3 or RH)");
  }
  auto r = max_pipeline(TheoremId::CONJ_1_6, fv, wv, v, opt);
  r.label = "open target — no pass/fail";
  return r;
}

InequalityReport check_linear(const StepFunction& f, const Weight& u, const Weight& v, LinearOperator op,
                              const PVConfig& pv, const CheckOptions& opt, TheoremId id) {
  require_same_grid(f, v.values());
  require_same_grid(u.values(), v.values());
  Assembler a(id, v.grid(), opt);
  const auto fv = multiply(f, v.values());
  StepFunction t = StepFunction::zero(v.grid());
  if (op == LinearOperator::maximal) {
    t = maximal(fv, opt.mode);
    a.report().operator_config["operator"] = "M";
  } else {
    PVConfig one = pv;
    one.m = 1;
    one.component = 1;
    t = abs_riesz(std::span<const StepFunction>(&fv, 1), one);
    a.report().operator_config["operator"] = "riesz";
    a.pv(one);
  }
  const WeightedMeasure uv(multiply(u.values(), v.values()));
  a.sides(weak_quasinorm(divide(t, v.values()), uv, 1.0), lp_norm(f, uv, 1.0));
  a.a1("a1(u)", u);
  a.a1("a1(v)", v);
  a.ainf("ainf(v)", v);
  a.ainf("ainf(u*v)", u.times(v));
  return a.report();
}

InequalityReport check_muczo(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                             const PVConfig& pv, const CheckOptions& opt, TheoremId id) {
  check_common_grid(fv, wv, v);
  const std::size_t m = wv.m();
  Assembler a(id, v.grid(), opt);
  a.pv(pv);
  const auto g = divide(abs_riesz(fv, pv), v.values());
  a.sides(weak_quasinorm(g, mixed_measure(wv.nu(), v, m), 1.0 / static_cast<double>(m)), product_of_l1(fv, wv));
  a.multilinear_a1(wv);
  if (id == TheoremId::COR_1_8) {
    a.rhinf("rhinf(v)", v);
  } else {
    a.ainf("ainf(nu*v^(1/m))", wv.nu().times(weight_root(v, m)));
    for (std::size_t i = 0; i < m; ++i) a.a1(slot_name("a1(w", i) + ")", wv[i]);
    a.ainf("ainf(v)", v);
  }
  return a.report();
}

InequalityReport check_extrapolation(std::span<const StepFunction> fv, const WeightVector& wv, const Weight& v,
                                     const PVConfig& pv, const CheckOptions& opt) {
  check_common_grid(fv, wv, v);
  const std::size_t m = wv.m();
  Assembler a(TheoremId::EXTRAP_A, v.grid(), opt);
  a.pv(pv);
  const auto mu = mixed_measure(wv.nu(), v, m);
  const double p = 1.0 / static_cast<double>(m);
  const auto lhs = weak_quasinorm(divide(abs_riesz(fv, pv), v.values()), mu, p);
  const auto rhs = weak_quasinorm(divide(multilinear_maximal(fv, opt.mode), v.values()), mu, p);
  a.sides(lhs, rhs.value);
  a.multilinear_a1(wv);
  a.ainf("ainf(v^(1/m))", weight_root(v, m));
  return a.report();
}

InequalityReport check_vector_valued(const std::vector<std::vector<StepFunction>>& families, const WeightVector& wv,
                                     const Weight& v, double r, const PVConfig& pv, const CheckOptions& opt) {
  if (!(r > 1.0 && r <= 2.0)) throw DomainError("vector-valued exponent r must lie in (1, 2]");
  const std::size_t m = wv.m();
  if (families.size() != m) throw DomainError("need one family per weight slot");
  std::size_t tuples = 1;
  for (const auto& fam : families) {
    if (fam.empty()) throw DomainError("families must be nonempty");
    for (const auto& f : fam) require_same_grid(f, v.values());
    tuples *= fam.size();
  }
  if (tuples > 64) throw ConfigError("vector-valued check allows at most 64 tuples");
  Assembler a(TheoremId::VV_4_2, v.grid(), opt);
  a.pv(pv);
  a.report().operator_config["r"] = format_double(r);

  // l^r aggregation; a single term is |x| itself so singletons match check_muczo.
  auto aggregate = [r](const std::vector<StepFunction>& terms) {
    if (terms.size() == 1) return abs(terms.front());
    std::vector<double> out(terms.front().size(), 0.0);
    for (const auto& t : terms) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += std::pow(std::fabs(t[i]), r);
    }
    for (double& x : out) x = std::pow(x, 1.0 / r);
    return StepFunction(terms.front().grid(), std::move(out));
  };

  std::vector<StepFunction> outputs;
  std::vector<std::size_t> idx(m, 0);
  for (std::size_t t = 0; t < tuples; ++t) {
    std::vector<StepFunction> tuple;
    for (std::size_t i = 0; i < m; ++i) tuple.push_back(families[i][idx[i]]);
    outputs.push_back(multilinear_riesz(tuple, pv));
    for (std::size_t i = m; i-- > 0;) {
      if (++idx[i] < families[i].size()) break;
      idx[i] = 0;
    }
  }
  const auto g = divide(aggregate(outputs), v.values());
  double rhs = 1.0;
  for (std::size_t i = 0; i < m; ++i) rhs *= lp_norm(aggregate(families[i]), WeightedMeasure(wv[i]), 1.0);
  a.sides(weak_quasinorm(g, mixed_measure(wv.nu(), v, m), 1.0 / static_cast<double>(m)), rhs);
  a.multilinear_a1(wv);
  a.rhinf("rhinf(v)", v);
  for (std::size_t i = 0; i < m; ++i) a.a1(slot_name("a1(w", i) + ")", wv[i]);
  a.ainf("ainf(v)", v);
  return a.report();
}

}  // namespace mwl
