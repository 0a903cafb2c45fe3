#include "mwl/search.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "mwl/errors.hpp"
#include "mwl/parallel.hpp"

namespace mwl {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

long long uniform_int(std::mt19937_64& rng, long long lo, long long hi) {
  return std::uniform_int_distribution<long long>(lo, hi)(rng);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool better(const Trial& a, const Trial& b) {
  if (a.ratio != b.ratio) return a.ratio > b.ratio;
  return a.seed < b.seed;
}

Trial evaluate(const Instance& inst, std::size_t index) {
  Trial t;
  t.trial = index;
  t.seed = inst.seed;
  t.instance = inst;
  const auto r = run_instance(inst);
  t.ratio = r.ratio;
  t.lhs = r.lhs;
  t.rhs = r.rhs;
  t.degenerate = r.degenerate;
  return t;
}

bool linear(TheoremId id) {
  return id == TheoremId::SAWYER_1_1 || id == TheoremId::CMP_1_2 || id == TheoremId::LOP_1_3;
}

}  // namespace

ScanCurve refinement_scan(const Instance& inst, const std::vector<int>& depths) {
  if (depths.empty()) throw ConfigError("refinement scan needs at least one depth");
  for (std::size_t i = 1; i < depths.size(); ++i) {
    if (depths[i] <= depths[i - 1]) throw ConfigError("refinement depths must be strictly increasing");
  }
  ScanCurve curve;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool any_degenerate = false;
  std::vector<double> xs, ys;
  for (int d : depths) {
    ScanRow row{d, run_instance(inst.at_depth(d))};
    any_degenerate = any_degenerate || row.report.degenerate;
    lo = std::min(lo, row.report.ratio);
    hi = std::max(hi, row.report.ratio);
    if (row.report.ratio > 0.0) {
      xs.push_back(d * std::log(2.0));
      ys.push_back(std::log(row.report.ratio));
    }
    curve.rows.push_back(std::move(row));
  }
  curve.max_over_min = (any_degenerate || !(lo > 0.0)) ? 0.0 : hi / lo;
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    curve.growth_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return curve;
}

nlohmann::json to_json(const ScanCurve& curve) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : curve.rows) rows.push_back({{"depth", r.depth}, {"report", to_json(r.report)}});
  return {{"rows", rows}, {"max_over_min", curve.max_over_min}, {"growth_exponent", curve.growth_exponent}};
}

std::string to_csv(const ScanCurve& curve) {
  std::vector<std::string> names;
  for (const auto& r : curve.rows) {
    for (const auto& c : r.report.hypothesis_constants) {
      if (std::find(names.begin(), names.end(), c.name) == names.end()) names.push_back(c.name);
    }
  }
  std::string out = "depth,ratio,lhs,rhs,witness_t";
  for (const auto& n : names) out += "," + csv_quote(n);
  out += "\n";
  for (const auto& r : curve.rows) {
    out += std::to_string(r.depth) + "," + format_double(r.report.ratio) + "," + format_double(r.report.lhs) + "," +
           format_double(r.report.rhs) + "," + format_double(r.report.witness_t);
    for (const auto& n : names) {
      const auto c = r.report.constant(n);
      out += "," + (c ? format_double(*c) : std::string());
    }
    out += "\n";
  }
  return out;
}

SearchSpace SearchSpace::from_config(const FlatConfig& cfg) {
  SearchSpace s;
  s.theorem = parse_theorem(cfg.get("theorem", to_string(s.theorem)));
  s.m = static_cast<int>(cfg.get_int("m", s.m));
  s.depth = static_cast<int>(cfg.get_int("depth", s.depth));
  s.depths = cfg.get_int_list("depths", s.depths);
  s.regime = parse_regime(cfg.get("regime", to_string(s.regime)));
  s.mode = parse_sup_mode(cfg.get("mode", to_string(s.mode)));
  s.power_min = cfg.get_double("power_min", s.power_min);
  s.power_max = cfg.get_double("power_max", s.power_max);
  s.rh_max = cfg.get_double("rh_max", s.rh_max);
  s.beta_max = cfg.get_double("beta_max", s.beta_max);
  s.levels_max = static_cast<int>(cfg.get_int("levels_max", s.levels_max));
  s.max_indicators = static_cast<int>(cfg.get_int("max_indicators", s.max_indicators));
  s.indicator_max_level = static_cast<int>(cfg.get_int("indicator_max_level", s.indicator_max_level));
  s.pv_radius = cfg.get_double("pv_radius", s.pv_radius);
  s.budget = static_cast<std::size_t>(cfg.get_u64("budget", s.budget));
  s.seed = cfg.get_u64("seed", s.seed);
  s.top_k = static_cast<std::size_t>(cfg.get_u64("top_k", s.top_k));
  s.hill_starts = static_cast<int>(cfg.get_int("hill_starts", s.hill_starts));
  s.hill_steps = static_cast<int>(cfg.get_int("hill_steps", s.hill_steps));
  s.ones = cfg.get("family", "indicators") == "ones";
  if (cfg.has("family") && !s.ones && cfg.get("family", "") != "indicators") {
    throw ConfigError("family must be indicators or ones");
  }
  s.validate();
  return s;
}

FlatConfig SearchSpace::to_config() const {
  FlatConfig cfg;
  cfg.set("theorem", to_string(theorem));
  cfg.set("m", m);
  cfg.set("depth", depth);
  std::string ds;
  for (std::size_t i = 0; i < depths.size(); ++i) ds += (i ? "," : "") + std::to_string(depths[i]);
  if (!depths.empty()) cfg.set("depths", ds);
  cfg.set("regime", to_string(regime));
  cfg.set("mode", to_string(mode));
  cfg.set("power_min", power_min);
  cfg.set("power_max", power_max);
  cfg.set("rh_max", rh_max);
  cfg.set("beta_max", beta_max);
  cfg.set("levels_max", levels_max);
  cfg.set("max_indicators", max_indicators);
  cfg.set("indicator_max_level", indicator_max_level);
  cfg.set("pv_radius", pv_radius);
  cfg.set("budget", std::to_string(budget));
  cfg.set("seed", std::to_string(seed));
  cfg.set("top_k", std::to_string(top_k));
  cfg.set("hill_starts", hill_starts);
  cfg.set("hill_steps", hill_steps);
  cfg.set("family", ones ? "ones" : "indicators");
  return cfg;
}

void SearchSpace::validate() const {
  if (m < 1 || m > 8) throw ConfigError("m must lie in [1, 8]");
  if (linear(theorem) && m != 1) throw ConfigError(to_string(theorem) + " is a linear inequality; set m = 1");
  if (depth < 0 || depth > DyadicGrid::kMaxDepth) throw ConfigError("depth must lie in [0, 24]");
  if (budget < 1) throw ConfigError("search budget must be at least 1");
  if (!(power_min > -1.0 && power_min <= power_max && power_max <= 0.0)) {
    throw ConfigError("A_1 power exponents need -1 < power_min <= power_max <= 0");
  }
  if (!(rh_max >= 0.0)) throw ConfigError("rh_max must be nonnegative");
  if (!(beta_max > 0.0 && beta_max < 1.0)) throw ConfigError("beta_max must lie in (0, 1)");
  if (levels_max < 0 || max_indicators < 1 || indicator_max_level < 0) {
    throw ConfigError("levels_max, max_indicators and indicator_max_level must be nonnegative (max_indicators >= 1)");
  }
  if (hill_starts < 0 || hill_steps < 0) throw ConfigError("hill-climb sizes must be nonnegative");
  if (!ones && indicator_max_level > depth) throw ConfigError("indicator_max_level exceeds the search depth");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (i && depths[i] <= depths[i - 1]) throw ConfigError("refinement depths must be strictly increasing");
    if (depths[i] < 0 || depths[i] > DyadicGrid::kMaxDepth) throw ConfigError("refinement depths must lie in [0, 24]");
    if (!ones && depths[i] < indicator_max_level) {
      throw ConfigError("refinement depths must be at least indicator_max_level");
    }
  }
}

Regime SearchSpace::effective_regime() const {
  if (regime != Regime::unspecified) return regime;
  switch (theorem) {
    case TheoremId::MAX_1_5:
    case TheoremId::MUCZO_1_7:
    case TheoremId::VV_4_2:
      return Regime::H2;
    case TheoremId::CONJ_1_6:
    case TheoremId::EXTRAP_A:
      return Regime::H3;
    case TheoremId::COR_1_8:
      return Regime::RH;
    default:
      return Regime::H1;
  }
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t counter) {
  return splitmix64(master ^ splitmix64(counter + 1));
}

TrialParams sample_params(const SearchSpace& space, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TrialParams p;
  const auto m = static_cast<std::size_t>(space.m);
  p.w_exp.assign(m, 0.0);
  p.w_center.assign(m, 0.0);
  p.f.assign(m, {Indicator{}});
  if (space.ones) return p;
  for (std::size_t i = 0; i < m; ++i) {
    p.w_exp[i] = uniform(rng, space.power_min, space.power_max);
    p.w_center[i] = uniform(rng, 0.0, 1.0);
  }
  const Regime regime = space.effective_regime();
  if (regime == Regime::H2 || regime == Regime::RH) {
    p.v_kind = TrialParams::VKind::rh_power;
  } else {
    p.v_kind = uniform_int(rng, 0, 1) == 0 ? TrialParams::VKind::martingale : TrialParams::VKind::factored;
  }
  p.v_seed = rng() >> 16;
  p.v_beta = uniform(rng, 0.05, space.beta_max);
  p.v_levels = static_cast<int>(uniform_int(rng, std::min(1, space.levels_max), space.levels_max));
  p.v_neg_exp = uniform(rng, space.power_min, space.power_max);
  p.v_neg_center = uniform(rng, 0.0, 1.0);
  p.v_pos_exp = uniform(rng, 0.0, space.rh_max);
  p.v_pos_center = uniform(rng, 0.0, 1.0);
  p.u_exp = uniform(rng, space.power_min, space.power_max);
  p.u_center = uniform(rng, 0.0, 1.0);
  const int max_level = std::min(space.indicator_max_level, space.depth);
  for (auto& fi : p.f) {
    fi.clear();
    const auto count = uniform_int(rng, 1, space.max_indicators);
    for (long long k = 0; k < count; ++k) {
      Indicator ind;
      // The first coefficient stays 1: ratios are homogeneous in each f_i.
      ind.coef = k == 0 ? 1.0 : uniform(rng, 0.25, 4.0);
      ind.level = static_cast<int>(uniform_int(rng, 0, max_level));
      ind.index = uniform_int(rng, 0, (1LL << ind.level) - 1);
      fi.push_back(ind);
    }
  }
  return p;
}

TrialParams perturb_params(const SearchSpace& space, const TrialParams& base, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TrialParams p = base;
  if (space.ones) return p;
  struct Knob {
    double* x;
    double lo, hi;
  };
  std::vector<Knob> knobs;
  for (std::size_t i = 0; i < p.w_exp.size(); ++i) {
    knobs.push_back({&p.w_exp[i], space.power_min, space.power_max});
    knobs.push_back({&p.w_center[i], 0.0, 1.0});
  }
  switch (p.v_kind) {
    case TrialParams::VKind::martingale:
      knobs.push_back({&p.v_beta, 0.0, space.beta_max});
      break;
    case TrialParams::VKind::factored:
      knobs.push_back({&p.v_neg_exp, space.power_min, space.power_max});
      knobs.push_back({&p.v_neg_center, 0.0, 1.0});
      [[fallthrough]];
    case TrialParams::VKind::rh_power:
      knobs.push_back({&p.v_pos_exp, 0.0, space.rh_max});
      knobs.push_back({&p.v_pos_center, 0.0, 1.0});
      break;
    case TrialParams::VKind::ones:
      break;
  }
  if (linear(space.theorem)) {
    knobs.push_back({&p.u_exp, space.power_min, space.power_max});
    knobs.push_back({&p.u_center, 0.0, 1.0});
  }
  std::vector<Indicator*> indicators;
  for (auto& fi : p.f) {
    for (std::size_t k = 0; k < fi.size(); ++k) {
      if (k > 0) knobs.push_back({&fi[k].coef, 0.25, 4.0});
      indicators.push_back(&fi[k]);
    }
  }
  const auto pick = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long long>(knobs.size() + indicators.size()) - 1));
  if (pick < knobs.size()) {
    Knob& k = knobs[pick];
    const double delta = uniform(rng, -0.1, 0.1);
    // Multiplicative 10% moves; parameters sitting at zero move additively.
    const double moved = *k.x != 0.0 ? *k.x * (1.0 + delta) : delta * 0.1;
    *k.x = std::clamp(moved, k.lo, k.hi);
    return p;
  }
  Indicator& ind = *indicators[pick - knobs.size()];
  const int max_level = std::min(space.indicator_max_level, space.depth);
  switch (uniform_int(rng, 0, 3)) {
    case 0:
      ind.index = std::max(0LL, ind.index - 1);
      break;
    case 1:
      ind.index = std::min((1LL << ind.level) - 1, ind.index + 1);
      break;
    case 2:
      if (ind.level > 0) {
        --ind.level;
        ind.index /= 2;
      }
      break;
    default:
      if (ind.level < max_level) {
        ++ind.level;
        ind.index = 2 * ind.index + uniform_int(rng, 0, 1);
      }
      break;
  }
  return p;
}

Instance render_instance(const SearchSpace& space, const TrialParams& p, std::uint64_t seed) {
  Instance inst;
  inst.theorem = space.theorem;
  inst.m = space.m;
  inst.depth = space.depth;
  inst.mode = space.mode;
  inst.seed = seed;
  inst.pv_radius = space.pv_radius;
  inst.regime = space.ones ? Regime::unspecified : space.effective_regime();
  if (space.ones && space.theorem == TheoremId::CONJ_1_6) inst.regime = Regime::H3;
  auto power = [](double a, double c) { return "power(" + format_double(a) + "," + format_double(c) + ")"; };
  for (std::size_t i = 0; i < static_cast<std::size_t>(space.m); ++i) {
    inst.w.push_back(space.ones ? "const(1)" : power(p.w_exp[i], p.w_center[i]));
    std::string f;
    for (const auto& ind : p.f[i]) {
      if (!f.empty()) f += "+";
      f += space.ones ? "const(1)"
                      : "ind(" + format_double(ind.coef) + "," + std::to_string(ind.level) + "," +
                            std::to_string(ind.index) + ")";
    }
    inst.f.push_back(f);
  }
  std::string v;
  switch (p.v_kind) {
    case TrialParams::VKind::ones:
      v = "const(1)";
      break;
    case TrialParams::VKind::martingale:
      v = "martingale(" + std::to_string(p.v_seed) + "," + format_double(p.v_beta) + "," +
          std::to_string(p.v_levels) + ")";
      break;
    case TrialParams::VKind::factored:
      v = "factored(" + power(p.v_neg_exp, p.v_neg_center) + "," + power(p.v_pos_exp, p.v_pos_center) + ")";
      break;
    case TrialParams::VKind::rh_power:
      v = power(p.v_pos_exp, p.v_pos_center);
      break;
  }
  // H2 and H3 constrain v^(1/m), so the generator describes that root.
  const Regime regime = inst.regime;
  if (space.m > 1 && (regime == Regime::H2 || regime == Regime::H3) && p.v_kind != TrialParams::VKind::ones) {
    v = "pow(" + v + "," + std::to_string(space.m) + ")";
  }
  inst.v = v;
  if (linear(space.theorem) && !space.ones) inst.u = power(p.u_exp, p.u_center);
  return inst;
}

SearchResult fuzz(const SearchSpace& space) {
  space.validate();
  SearchResult res;
  res.space = space;

  std::vector<Trial> random(space.budget);
  std::vector<TrialParams> params(space.budget);
  parallel_for(space.budget, [&](std::size_t t) {
    const auto seed = trial_seed(space.seed, t);
    params[t] = sample_params(space, seed);
    auto inst = render_instance(space, params[t], seed);
    inst.compute_constants = false;
    random[t] = evaluate(inst, t);
  });

  std::vector<std::size_t> order(space.budget);
  for (std::size_t t = 0; t < order.size(); ++t) order[t] = t;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return better(random[a], random[b]); });

  std::vector<std::size_t> starts;
  for (std::size_t t : order) {
    if (starts.size() >= static_cast<std::size_t>(space.hill_starts)) break;
    if (!random[t].degenerate) starts.push_back(t);
  }
  const auto steps = static_cast<std::size_t>(space.hill_steps);
  std::vector<Trial> climbed(starts.size() * steps);
  parallel_for(starts.size(), [&](std::size_t s) {
    TrialParams current = params[starts[s]];
    double best = random[starts[s]].ratio;
    for (std::size_t k = 0; k < steps; ++k) {
      const std::size_t index = space.budget + s * steps + k;
      const auto seed = trial_seed(space.seed, index);
      TrialParams next = perturb_params(space, current, seed);
      auto inst = render_instance(space, next, seed);
      inst.compute_constants = false;
      climbed[s * steps + k] = evaluate(inst, index);
      const Trial& t = climbed[s * steps + k];
      if (!t.degenerate && t.ratio > best) {
        best = t.ratio;
        current = std::move(next);
      }
    }
  });

  res.trials = std::move(random);
  res.trials.insert(res.trials.end(), climbed.begin(), climbed.end());
  std::vector<Trial> ranked;
  for (const auto& t : res.trials) {
    if (!t.degenerate) ranked.push_back(t);
  }
  if (ranked.empty()) throw DegenerateInput("every search trial was degenerate");
  std::sort(ranked.begin(), ranked.end(), better);
  // Identical instances can recur during climbing; keep one of each.
  std::set<std::string> seen;
  for (const auto& t : ranked) {
    if (res.top.size() >= std::max<std::size_t>(space.top_k, 1)) break;
    auto key = t.instance.to_config();
    key.erase("seed");
    key.erase("constants");
    if (!seen.insert(key.dump()).second) continue;
    res.top.push_back(t);
  }
  res.top_reports.resize(res.top.size());
  parallel_for(res.top.size(), [&](std::size_t i) { res.top_reports[i] = run_instance(res.top[i].instance); });
  for (auto& t : res.top) t.instance.compute_constants = true;
  if (!space.depths.empty()) res.best_curve = refinement_scan(res.top.front().instance, space.depths);
  return res;
}

nlohmann::json to_json(const SearchResult& result) {
  nlohmann::json space = nlohmann::json::object();
  const FlatConfig space_cfg = result.space.to_config();
  for (const auto& [k, v] : space_cfg.entries()) space[k] = v;
  nlohmann::json top = nlohmann::json::array();
  for (std::size_t i = 0; i < result.top.size(); ++i) {
    const auto& t = result.top[i];
    nlohmann::json cfg = nlohmann::json::object();
    const FlatConfig inst_cfg = t.instance.to_config();
    for (const auto& [k, v] : inst_cfg.entries()) cfg[k] = v;
    top.push_back({{"trial", t.trial},
                   {"seed", t.seed},
                   {"ratio", t.ratio},
                   {"lhs", t.lhs},
                   {"rhs", t.rhs},
                   {"instance", cfg},
                   {"report", to_json(result.top_reports[i])}});
  }
  nlohmann::json j{{"schema", SearchResult::kSchema},
                   {"space", space},
                   {"trials_evaluated", result.trials.size()},
                   {"top", top}};
  if (!result.best_curve.rows.empty()) j["best_curve"] = to_json(result.best_curve);
  return j;
}

std::string to_csv(const SearchResult& result) {
  const int m = result.space.m;
  std::string out = "trial,ratio,depth,seed";
  for (int i = 1; i <= m; ++i) out += ",w" + std::to_string(i);
  out += ",v,u";
  for (int i = 1; i <= m; ++i) out += ",f" + std::to_string(i);
  out += "\n";
  for (const auto& t : result.trials) {
    out += std::to_string(t.trial) + "," + format_double(t.ratio) + "," + std::to_string(t.instance.depth) + "," +
           std::to_string(t.seed);
    for (const auto& w : t.instance.w) out += "," + csv_quote(w);
    out += "," + csv_quote(t.instance.v) + "," + csv_quote(t.instance.u);
    for (const auto& f : t.instance.f) out += "," + csv_quote(f);
    out += "\n";
  }
  return out;
}

}  // namespace mwl
