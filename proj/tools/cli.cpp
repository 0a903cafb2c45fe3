#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mwl/config.hpp"
#include "mwl/decomposition.hpp"
#include "mwl/errors.hpp"
#include "mwl/instance.hpp"
#include "mwl/operators.hpp"
#include "mwl/parallel.hpp"
#include "mwl/search.hpp"

namespace mwl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Flags {
  std::optional<int> depth;
  std::optional<int> m;
  std::optional<std::string> mode;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string format = "json";
  bool override_cost_cap = false;
  std::optional<unsigned> threads;
  std::optional<std::string> theorem;
  std::optional<std::string> in;
};

/// One file produced by a subcommand; role names the manifest entry.
struct Artifact {
  std::string role;
  std::string suffix;  // appended to --out; empty for the main artifact
  std::string content;
  /// Written at --out with its extension replaced by suffix instead.
  bool replace_extension = false;
};

struct Outcome {
  std::vector<Artifact> artifacts;
  /// Fully resolved configuration recorded in the manifest.
  FlatConfig resolved;
  std::map<std::string, std::string> inputs;
  std::string summary;
};

const std::set<std::string> kKnownKeys = {
    "theorem", "m",        "depth",      "mode",        "constants_mode", "constants",   "seed",
    "v",       "u",        "operator",   "pv_radius",   "pv_component",   "override_cost_cap",
    "r",       "regime",   "a",          "budget",      "depths",         "top_k",       "hill_starts",
    "hill_steps", "power_min", "power_max", "rh_max",   "beta_max",       "levels_max",  "max_indicators",
    "indicator_max_level", "family", "in", "w",        "p",              "transform",   "K0",
    "terms",   "r_prime",  "cubes",      "format",
};

void check_keys(const FlatConfig& cfg) {
  static const std::regex slot_key("[fw][1-9][0-9]*");
  for (const auto& [k, v] : cfg.entries()) {
    if (!kKnownKeys.count(k) && !std::regex_match(k, slot_key)) throw ConfigError("unknown config key '" + k + "'");
  }
}

std::string flatten_csv(const json& j) {
  std::string out = "key,value\n";
  const json flat = j.flatten();
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    std::string v = it->is_string() ? it->get<std::string>() : it->dump();
    if (v.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : v) {
        if (c == '"') q += '"';
        q += c;
      }
      v = q + "\"";
    }
    out += it.key() + "," + v + "\n";
  }
  return out;
}

std::string render(const json& j, const std::string& format) {
  return format == "csv" ? flatten_csv(j) : j.dump(2) + "\n";
}

std::string step_json(const StepFunction& f) {
  json values = json::array();
  for (double x : f.values()) values.push_back(x);
  return json{{"depth", f.grid().depth()}, {"values", values}}.dump(2) + "\n";
}

/// Main artifact for a step function; CSV output gets the depth descriptor
/// beside it so it can be read back with --in.
void push_step(Outcome& o, const StepFunction& f, const std::string& format) {
  if (format != "csv") {
    o.artifacts.push_back({"main", "", step_json(f)});
    return;
  }
  o.artifacts.push_back({"main", "", to_csv(f)});
  o.artifacts.push_back({"descriptor", ".json", json{{"depth", f.grid().depth()}}.dump() + "\n", true});
}

std::vector<StepFunction> slot_functions(const FlatConfig& cfg, int m, const DyadicGrid& grid) {
  std::vector<StepFunction> fv;
  for (int i = 1; i <= m; ++i) fv.push_back(build_function(cfg.get("f" + std::to_string(i), "const(1)"), grid));
  return fv;
}

WeightVector slot_weights(const FlatConfig& cfg, int m, const DyadicGrid& grid) {
  std::vector<Weight> ws;
  for (int i = 1; i <= m; ++i) ws.push_back(build_weight(cfg.get("w" + std::to_string(i), "const(1)"), grid));
  return WeightVector(std::move(ws));
}

int config_m(const FlatConfig& cfg) {
  const auto m = cfg.get_int("m", 1);
  if (m < 1 || m > 8) throw ConfigError("m must lie in [1, 8]");
  return static_cast<int>(m);
}

int config_depth(const FlatConfig& cfg, int fallback) {
  const auto d = cfg.get_int("depth", fallback);
  if (d < 0 || d > DyadicGrid::kMaxDepth) throw ConfigError("depth must lie in [0, 24]");
  return static_cast<int>(d);
}

SupMode config_mode(const FlatConfig& cfg) { return parse_sup_mode(cfg.get("mode", "intervals")); }

/// Reads the step function named by `in`, recording its content hash.
std::optional<StepFunction> input_function(const FlatConfig& cfg, Outcome& o) {
  const auto path = cfg.find("in");
  if (!path) return std::nullopt;
  if (!fs::exists(*path)) throw ConfigError("input file " + *path + " does not exist");
  o.inputs["in"] = sha256_file(*path);
  fs::path sidecar = *path;
  sidecar.replace_extension(".json");
  if (fs::exists(sidecar)) o.inputs["in_descriptor"] = sha256_file(sidecar);
  return read_step_function(*path);
}

Outcome cmd_constants(const FlatConfig& cfg, const std::string& format) {
  Outcome o;
  o.resolved = cfg;
  std::optional<Weight> w;
  if (auto f = input_function(cfg, o)) {
    w.emplace(*f, std::nullopt, "file");
  } else {
    const int depth = config_depth(cfg, 6);
    o.resolved.set("depth", depth);
    const std::string spec = cfg.get("w", cfg.get("w1", "const(1)"));
    o.resolved.set("w", spec);
    w.emplace(build_weight(spec, DyadicGrid(depth)));
  }
  const SupMode mode = config_mode(cfg);
  o.resolved.set("mode", to_string(mode));
  std::vector<double> ps;
  {
    std::istringstream in(cfg.get("p", "2"));
    std::string item;
    while (std::getline(in, item, ',')) {
      FlatConfig one;
      one.set("p", item);
      const double p = one.get_double("p", 2.0);
      if (!(p > 1.0)) throw ConfigError("A_p exponents must exceed 1");
      ps.push_back(p);
    }
  }
  o.resolved.set("p", cfg.get("p", "2"));
  const auto report = constants_report(*w, mode, ps);
  o.artifacts.push_back({"main", "", render(to_json(report), format)});
  o.summary = "a1 = " + format_double(report.a1.value) + ", ainf = " + format_double(report.ainf.value) +
              ", rhinf = " + format_double(report.rhinf.value);
  return o;
}

Outcome cmd_maximal(const FlatConfig& cfg, const std::string& format) {
  Outcome o;
  o.resolved = cfg;
  const SupMode mode = config_mode(cfg);
  o.resolved.set("mode", to_string(mode));
  StepFunction result = StepFunction::zero(DyadicGrid(0));
  if (auto f = input_function(cfg, o)) {
    result = maximal(*f, mode);
  } else {
    const int m = config_m(cfg);
    const int depth = config_depth(cfg, 6);
    o.resolved.set("m", m);
    o.resolved.set("depth", depth);
    const auto fv = slot_functions(cfg, m, DyadicGrid(depth));
    for (int i = 1; i <= m; ++i) o.resolved.set("f" + std::to_string(i), cfg.get("f" + std::to_string(i), "const(1)"));
    result = multilinear_maximal(fv, mode);
  }
  push_step(o, result, format);
  o.summary = "max = " + format_double(result.max());
  return o;
}

Outcome cmd_transform(const FlatConfig& cfg, const std::string& format) {
  Outcome o;
  o.resolved = cfg;
  const std::string kind = cfg.get("transform", "riesz");
  o.resolved.set("transform", kind);
  const int m = config_m(cfg);
  const int depth = config_depth(cfg, 6);
  o.resolved.set("m", m);
  o.resolved.set("depth", depth);
  const DyadicGrid grid(depth);
  for (int i = 1; i <= m; ++i) {
    o.resolved.set("f" + std::to_string(i), cfg.get("f" + std::to_string(i), "const(1)"));
    o.resolved.set("w" + std::to_string(i), cfg.get("w" + std::to_string(i), "const(1)"));
  }
  if (kind == "riesz") {
    PVConfig pv;
    pv.m = m;
    pv.component = static_cast<int>(cfg.get_int("pv_component", 1));
    pv.exclusion_radius = cfg.get_double("pv_radius", pv.exclusion_radius);
    pv.override_cost_cap = cfg.get_bool("override_cost_cap", false);
    o.resolved.set("pv_component", pv.component);
    o.resolved.set("pv_radius", pv.exclusion_radius);
    o.resolved.set("override_cost_cap", pv.override_cost_cap ? "1" : "0");
    const auto t = multilinear_riesz(slot_functions(cfg, m, grid), pv);
    push_step(o, t, format);
    o.summary = "riesz transform, max |T| = " + format_double(abs(t).max());
    return o;
  }
  if (kind != "S" && kind != "R") throw ConfigError("transform must be riesz, S or R");
  const SupMode mode = config_mode(cfg);
  o.resolved.set("mode", to_string(mode));
  const auto wv = slot_weights(cfg, m, grid);
  const auto h = slot_functions(cfg, 1, grid).front();
  if (kind == "S") {
    const auto s = rdf_S(h, wv.nu(), mode);
    push_step(o, s, format);
    o.summary = "S h, max = " + format_double(s.max());
    return o;
  }
  RdFConfig rc;
  rc.K0 = cfg.has("K0") ? cfg.get_double("K0", 1.0) : a1_constant(wv.nu(), mode).value;
  rc.series_terms = static_cast<int>(cfg.get_int("terms", rc.series_terms));
  o.resolved.set("K0", rc.K0);
  o.resolved.set("terms", rc.series_terms);
  const auto r = rdf_R(h, wv.nu(), rc, mode);
  push_step(o, r.value, format);
  const json meta{{"K0", rc.K0},
                  {"series_terms", rc.series_terms},
                  {"tail_bound", r.tail_bound},
                  {"max_sup_ratio", r.max_sup_ratio},
                  {"contraction_warning", r.contraction_warning}};
  o.artifacts.push_back({"rdf", ".rdf." + format, render(meta, format)});
  o.summary = "R h, tail bound = " + format_double(r.tail_bound);
  return o;
}

Outcome cmd_verify(const FlatConfig& cfg, const std::string& format) {
  Outcome o;
  const Instance inst = Instance::from_config(cfg);
  o.resolved = cfg;
  o.resolved.merge(inst.to_config());
  const auto report = run_instance(inst);
  require_nondegenerate(report);
  o.artifacts.push_back({"main", "", format == "csv" ? to_csv(report) : to_json(report).dump(2) + "\n"});
  o.summary = to_string(report.theorem) + ": lhs = " + format_double(report.lhs) + ", rhs = " +
              format_double(report.rhs) + ", ratio = " + format_double(report.ratio);
  if (!report.label.empty()) o.summary += " (" + report.label + ")";
  return o;
}

Outcome cmd_decompose(const FlatConfig& cfg, const std::string& format) {
  Outcome o;
  o.resolved = cfg;
  const int m = config_m(cfg);
  const int depth = config_depth(cfg, 8);
  const DyadicGrid grid(depth);
  DecompositionConfig dc;
  dc.a = cfg.get_double("a", dc.a);
  dc.m = m;
  o.resolved.set("m", m);
  o.resolved.set("depth", depth);
  o.resolved.set("a", dc.a);
  for (int i = 1; i <= m; ++i) {
    o.resolved.set("f" + std::to_string(i), cfg.get("f" + std::to_string(i), "const(1)"));
    o.resolved.set("w" + std::to_string(i), cfg.get("w" + std::to_string(i), "const(1)"));
  }
  o.resolved.set("v", cfg.get("v", "const(1)"));
  dc.validate();
  const auto fv = slot_functions(cfg, m, grid);
  const auto wv = slot_weights(cfg, m, grid);
  const Weight v = build_weight(cfg.get("v", "const(1)"), grid);
  const auto forest = build_forest(fv, v, dc);
  const auto audit = audit_forest(forest, fv, v, wv.nu());
  const auto gamma = forest.gamma();
  const double lambda_max = 1.0 + depth;
  const auto sparse = verify_sparse(gamma, lambda_max);
  const auto decay = measure_decay(forest, wv.nu(), dc);

  json summary = forest_summary(forest);
  summary["audit"] = {{"ok", audit.ok}, {"checks", audit.checks}, {"failures", audit.failures}};
  summary["sparse"] = {{"packing", sparse.packing},
                       {"eta", sparse.eta},
                       {"lambda_max", lambda_max},
                       {"pass", sparse.pass},
                       {"attained", {{"level", sparse.attained.level}, {"index", sparse.attained.index}}}};
  json carleson = json::array();
  for (int l : forest.gamma_bands()) {
    const auto pf = principal_cubes(forest, wv.nu(), l);
    carleson.push_back({{"l", l},
                        {"generations", pf.generations.size()},
                        {"maximal", pf.maximal.size()},
                        {"nu_a1", pf.nu_a1},
                        {"carleson_ratio", pf.carleson_ratio},
                        {"ok", pf.carleson_ok}});
  }
  summary["principal"] = carleson;
  json violations = json::array();
  for (int l : decay.trend_violations) violations.push_back(l);
  summary["decay"] = {{"fitted", decay.fitted},
                      {"c1", decay.c1},
                      {"c2", decay.c2},
                      {"c1_negative", decay.c1_negative},
                      {"trend_violations", violations}};
  o.artifacts.push_back({"main", "", render(summary, format)});
  o.artifacts.push_back({"decay", ".decay.csv", decay_csv(decay)});
  if (cfg.get_bool("cubes", false)) o.artifacts.push_back({"cubes", ".cubes.csv", cube_listing_csv(forest)});
  o.resolved.set("cubes", cfg.get_bool("cubes", false) ? "1" : "0");
  o.summary = std::to_string(forest.cubes.size()) + " maximal cubes, " + std::to_string(gamma.size()) +
              " in Gamma, packing = " + format_double(sparse.packing) + ", audit " + (audit.ok ? "ok" : "FAILED");
  return o;
}

Outcome cmd_fuzz(const FlatConfig& cfg, const std::string& format) {
  Outcome o;
  const auto space = SearchSpace::from_config(cfg);
  o.resolved = cfg;
  o.resolved.merge(space.to_config());
  const auto result = fuzz(space);
  o.artifacts.push_back({"main", "", render(to_json(result), format)});
  o.artifacts.push_back({"trials", ".trials.csv", to_csv(result)});
  o.summary = std::to_string(result.trials.size()) + " trials, best ratio = " + format_double(result.top.front().ratio);
  return o;
}

Outcome cmd_scan(const FlatConfig& cfg, const std::string& format) {
  Outcome o;
  const Instance inst = Instance::from_config(cfg);
  const auto depths = cfg.get_int_list("depths", {inst.depth});
  o.resolved = cfg;
  o.resolved.merge(inst.to_config());
  std::string ds;
  for (std::size_t i = 0; i < depths.size(); ++i) ds += (i ? "," : "") + std::to_string(depths[i]);
  o.resolved.set("depths", ds);
  const auto curve = refinement_scan(inst, depths);
  o.artifacts.push_back({"main", "", format == "csv" ? to_csv(curve) : to_json(curve).dump(2) + "\n"});
  o.summary = std::to_string(curve.rows.size()) + " depths, max/min = " + format_double(curve.max_over_min) +
              ", growth exponent = " + format_double(curve.growth_exponent);
  return o;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << content;
}

int execute(const std::string& sub, const Flags& flags, std::ostream& out, std::ostream& err) {
  unsigned threads = 1;
  if (flags.threads) {
    threads = *flags.threads;
  } else if (const char* env = std::getenv("MWL_THREADS")) {
    threads = static_cast<unsigned>(std::max(1L, std::strtol(env, nullptr, 10)));
  }
  set_thread_count(threads);

  if (flags.format != "json" && flags.format != "csv") throw ConfigError("--format must be json or csv");
  FlatConfig cfg;
  std::optional<RunManifest> replay;
  if (flags.config) {
    const FlatConfig loaded = FlatConfig::load(*flags.config);
    const auto manifest = RunManifest::parse(loaded);
    if (!manifest.subcommand.empty()) {
      if (manifest.subcommand != sub) {
        throw ConfigError("manifest was written by '" + manifest.subcommand + "', not '" + sub + "'");
      }
      replay = manifest;
    }
    cfg = manifest.config;
  }
  if (flags.depth) cfg.set("depth", *flags.depth);
  if (flags.m) cfg.set("m", *flags.m);
  if (flags.mode) cfg.set("mode", *flags.mode);
  if (flags.seed) cfg.set("seed", std::to_string(*flags.seed));
  if (flags.theorem) cfg.set("theorem", *flags.theorem);
  if (flags.in) cfg.set("in", *flags.in);
  if (flags.override_cost_cap) cfg.set("override_cost_cap", "1");
  // The format shapes the artifacts, so it travels with the manifest.
  const std::string format = flags.format != "json" || !cfg.has("format") ? flags.format : cfg.get("format", "json");
  cfg.set("format", format);
  check_keys(cfg);

  Outcome o;
  if (sub == "constants") o = cmd_constants(cfg, format);
  else if (sub == "maximal") o = cmd_maximal(cfg, format);
  else if (sub == "transform") o = cmd_transform(cfg, format);
  else if (sub == "verify") o = cmd_verify(cfg, format);
  else if (sub == "decompose") o = cmd_decompose(cfg, format);
  else if (sub == "fuzz") o = cmd_fuzz(cfg, format);
  else o = cmd_scan(cfg, format);

  if (replay) {
    for (const auto& [role, hash] : replay->inputs) {
      const auto now = o.inputs.find(role);
      if (now == o.inputs.end() || now->second != hash) {
        throw ConfigError("input '" + role + "' differs from the one recorded in the manifest");
      }
    }
  }

  const fs::path main_path = flags.out.value_or(sub + "." + format);
  RunManifest manifest;
  manifest.version = kVersion;
  manifest.subcommand = sub;
  manifest.config = o.resolved;
  manifest.config.set("format", format);
  manifest.seed = manifest.config.get_u64("seed", 0);
  manifest.inputs = o.inputs;
  manifest.timestamp = utc_timestamp();
  std::vector<fs::path> paths;
  for (const auto& a : o.artifacts) {
    fs::path p = main_path.string() + a.suffix;
    if (a.replace_extension) {
      p = main_path;
      p.replace_extension(a.suffix);
      if (p == main_path) throw ConfigError("--out " + main_path.string() + " collides with its descriptor");
    }
    paths.push_back(p);
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    write_file(paths[i], o.artifacts[i].content);
    manifest.outputs[o.artifacts[i].role] = sha256_hex(o.artifacts[i].content);
  }
  const fs::path manifest_path = main_path.string() + ".manifest";
  write_file(manifest_path, manifest.dump());

  out << o.summary << "\n";
  out << "wrote " << main_path.string() << " and " << manifest_path.string() << "\n";
  if (replay) {
    bool same = replay->outputs.size() == manifest.outputs.size();
    for (const auto& [role, hash] : replay->outputs) {
      const auto it = manifest.outputs.find(role);
      same = same && it != manifest.outputs.end() && it->second == hash;
    }
    if (!same) {
      err << "replay: artifacts differ from the manifest\n";
      return kFailure;
    }
    out << "replay: artifacts match the manifest\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed weak-type inequality laboratory on dyadic grids", "mwl"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--depth", flags.depth, "Grid depth (cells = 2^depth)");
  app.add_option("--m", flags.m, "Number of function slots");
  app.add_option("--mode", flags.mode, "Supremum family")->check(CLI::IsMember({"dyadic", "intervals"}));
  app.add_option("--config", flags.config, "Flat key = value config file or run manifest");
  app.add_option("--seed", flags.seed, "Master seed");
  app.add_option("--out", flags.out, "Main output path; sidecars and the manifest are written beside it");
  app.add_option("--format", flags.format, "Output encoding")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--override-cost-cap", flags.override_cost_cap, "Allow Riesz transforms above the desk-scale cap");
  app.add_option("--threads", flags.threads, "Worker threads (default: MWL_THREADS or 1)");
  app.add_option("--theorem", flags.theorem, "Theorem id for verify, fuzz and scan");
  app.add_option("--in", flags.in, "Input step function CSV (sidecar .json holds the depth)");

  const std::vector<std::pair<const char*, const char*>> subs = {
      {"constants", "Weight-class constants of one weight"},
      {"maximal", "Maximal or multilinear maximal function"},
      {"transform", "Truncated multilinear Riesz transform or the operators S and R"},
      {"verify", "Evaluate one inequality as a ratio"},
      {"decompose", "Cube forest, sparseness, Carleson and decay audits"},
      {"fuzz", "Seeded search for large inequality ratios"},
      {"scan", "Ratio curve of one instance across depths"},
  };
  for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();

  std::vector<const char*> argv{"mwl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ExtrasError& e) {
    err << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const CLI::RequiredError& e) {
    err << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kConfigError;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return execute(sub, flags, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const DegenerateInput& e) {
    err << "degenerate input: " << e.what() << "\n";
    return kDegenerate;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace mwl::cli
