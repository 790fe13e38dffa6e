#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "repairctl/cli.hpp"

namespace repairctl::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json &obj, const std::set<std::string> &allowed, const std::string &where) {
  if (!obj.is_object())
    throw ConfigError(where + " must be an object");
  for (const auto &item : obj.items())
    if (!allowed.count(item.key()))
      throw ConfigError("unknown field '" + item.key() + "' in " + where);
}

template <class T> T get(const json &obj, const char *key, const std::string &where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception &) {
    throw ConfigError("field '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

template <class T> void read(const json &obj, const char *key, T &dst, const std::string &where) {
  if (obj.contains(key))
    dst = get<T>(obj, key, where);
}

double positive(double v, const char *what) {
  if (!(v > 0.0))
    throw ConfigError(std::string(what) + " must be positive");
  return v;
}

std::filesystem::path existing(const std::filesystem::path &base, const std::string &rel, const char *what) {
  std::filesystem::path p(rel);
  if (p.is_relative())
    p = base / p;
  if (!std::filesystem::exists(p))
    throw ConfigError(std::string(what) + " table not found: " + p.string());
  return p;
}

} // namespace

RunConfig parse_config(const std::string &text, const std::filesystem::path &base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root,
                 {"version", "lambda", "L", "target", "initial", "t_f", "t_end", "alpha", "grid", "i_max",
                  "stage_lengths", "stage", "tolerances", "fv", "scan", "calibration", "output_dir"},
                 "config");
  RunConfig cfg;
  if (!root.contains("version"))
    throw ConfigError("config needs a \"version\" field");
  cfg.version = get<int>(root, "version", "config");
  if (cfg.version != 1)
    throw ConfigError("unsupported config version " + std::to_string(cfg.version));

  read(root, "lambda", cfg.lambda, "config");
  read(root, "L", cfg.length, "config");
  read(root, "t_f", cfg.t_f, "config");
  read(root, "t_end", cfg.t_end, "config");
  read(root, "i_max", cfg.i_max, "config");
  read(root, "stage_lengths", cfg.stage_lengths, "config");
  if (root.contains("output_dir"))
    cfg.output_dir = get<std::string>(root, "output_dir", "config");
  positive(cfg.lambda, "lambda");
  positive(cfg.length, "L");
  positive(cfg.t_f, "t_f");
  positive(cfg.t_end, "t_end");
  if (cfg.i_max < 1)
    throw ConfigError("i_max must be at least 1");

  if (root.contains("target")) {
    const json &t = root["target"];
    reject_unknown(t, {"form", "table"}, "target");
    const std::string form = t.contains("form") ? get<std::string>(t, "form", "target") : "linear-decay";
    if (form == "linear-decay")
      cfg.target.form = TargetForm::linear_decay;
    else if (form == "quadratic-decay")
      cfg.target.form = TargetForm::quadratic_decay;
    else if (form == "tabulated")
      cfg.target.form = TargetForm::tabulated;
    else
      throw ConfigError("unknown target form '" + form + "'");
    if (cfg.target.form == TargetForm::tabulated) {
      if (!t.contains("table"))
        throw ConfigError("tabulated target needs a \"table\" path");
      cfg.target.table = existing(base_dir, get<std::string>(t, "table", "target"), "target");
    }
  }

  if (root.contains("initial")) {
    const json &i = root["initial"];
    reject_unknown(i, {"kind", "table", "p0"}, "initial");
    read(i, "kind", cfg.initial.kind, "initial");
    static const std::set<std::string> kinds{"point-mass-good", "uniform-failure", "tabulated", "target",
                                             "compatible"};
    if (!kinds.count(cfg.initial.kind))
      throw ConfigError("unknown initial kind '" + cfg.initial.kind + "'");
    if (i.contains("p0"))
      cfg.initial.p0 = get<double>(i, "p0", "initial");
    if (cfg.initial.kind == "tabulated") {
      if (!i.contains("table"))
        throw ConfigError("tabulated initial condition needs a \"table\" path");
      cfg.initial.table = existing(base_dir, get<std::string>(i, "table", "initial"), "initial");
    }
  }

  if (root.contains("alpha")) {
    const json &a = root["alpha"];
    reject_unknown(a, {"policy", "value"}, "alpha");
    const std::string policy = a.contains("policy") ? get<std::string>(a, "policy", "alpha") : "auto";
    if (policy == "auto") {
      cfg.alpha_auto = true;
    } else if (policy == "fixed") {
      cfg.alpha_auto = false;
      if (!a.contains("value"))
        throw ConfigError("fixed alpha policy needs a \"value\"");
      cfg.alpha_value = positive(get<double>(a, "value", "alpha"), "alpha value");
    } else {
      throw ConfigError("unknown alpha policy '" + policy + "'");
    }
  }

  if (root.contains("grid")) {
    const json &g = root["grid"];
    reject_unknown(g, {"cells", "steps_per_stage", "horizon_divisor"}, "grid");
    read(g, "cells", cfg.cells, "grid");
    read(g, "steps_per_stage", cfg.steps_per_stage, "grid");
    read(g, "horizon_divisor", cfg.horizon_divisor, "grid");
    if (cfg.cells < SpatialGrid::min_cells)
      throw ConfigError("grid.cells must be at least 8");
    if (cfg.steps_per_stage < 1 || cfg.horizon_divisor < 4.0)
      throw ConfigError("grid.steps_per_stage must be >= 1 and grid.horizon_divisor >= 4");
  }

  if (root.contains("stage")) {
    const json &s = root["stage"];
    reject_unknown(s, {"index", "alpha", "duration", "dt"}, "stage");
    read(s, "index", cfg.stage.index, "stage");
    if (s.contains("alpha"))
      cfg.stage.alpha = positive(get<double>(s, "alpha", "stage"), "stage.alpha");
    read(s, "duration", cfg.stage.duration, "stage");
    if (s.contains("dt"))
      cfg.stage.dt = positive(get<double>(s, "dt", "stage"), "stage.dt");
    if (cfg.stage.index < 1)
      throw ConfigError("stage.index must be at least 1");
    positive(cfg.stage.duration, "stage.duration");
  }

  if (root.contains("tolerances")) {
    const json &t = root["tolerances"];
    reject_unknown(t, {"validate", "mass", "negativity", "endpoint", "final"}, "tolerances");
    read(t, "validate", cfg.tol.validate, "tolerances");
    read(t, "mass", cfg.tol.mass, "tolerances");
    read(t, "negativity", cfg.tol.negativity, "tolerances");
    read(t, "endpoint", cfg.tol.endpoint, "tolerances");
    read(t, "final", cfg.tol.final_error, "tolerances");
    for (double v : {cfg.tol.validate, cfg.tol.mass, cfg.tol.negativity, cfg.tol.endpoint, cfg.tol.final_error})
      if (!(v >= 0.0))
        throw ConfigError("tolerances must be nonnegative");
  }

  if (root.contains("fv")) {
    const json &f = root["fv"];
    reject_unknown(f, {"cfl", "levels", "t_end", "stage_duration", "min_order"}, "fv");
    read(f, "cfl", cfg.fv.cfl, "fv");
    read(f, "levels", cfg.fv.levels, "fv");
    read(f, "t_end", cfg.fv.t_end, "fv");
    read(f, "stage_duration", cfg.fv.stage_duration, "fv");
    read(f, "min_order", cfg.fv.min_order, "fv");
    if (cfg.fv.levels.size() < 2)
      throw ConfigError("fv.levels needs at least two grid levels");
  }

  if (root.contains("scan")) {
    const json &s = root["scan"];
    reject_unknown(s, {"enabled", "l_frac", "ceiling_factor"}, "scan");
    read(s, "enabled", cfg.scan.enabled, "scan");
    read(s, "l_frac", cfg.scan.l_frac, "scan");
    read(s, "ceiling_factor", cfg.scan.ceiling_factor, "scan");
    if (!(cfg.scan.l_frac > 0.0 && cfg.scan.l_frac < 1.0))
      throw ConfigError("scan.l_frac must lie in (0, 1)");
  }

  if (root.contains("calibration")) {
    const json &c = root["calibration"];
    reject_unknown(c, {"duration", "skip"}, "calibration");
    if (c.contains("duration"))
      cfg.calibration.duration = positive(get<double>(c, "duration", "calibration"), "calibration.duration");
    read(c, "skip", cfg.calibration.skip, "calibration");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

TargetProfile build_target(const RunConfig &cfg) {
  switch (cfg.target.form) {
  case TargetForm::linear_decay:
    return make_linear_target(cfg.lambda, cfg.length);
  case TargetForm::quadratic_decay:
    return make_quadratic_target(cfg.lambda, cfg.length);
  case TargetForm::tabulated: {
    TargetProfile t = load_tabulated_target(cfg.target.table, cfg.lambda);
    if (std::abs(t.length - cfg.length) > 1e-12 * cfg.length)
      throw ConfigError("target table ends at x = " + std::to_string(t.length) + " but L = " +
                        std::to_string(cfg.length));
    return t;
  }
  }
  throw ConfigError("unknown target form");
}

SpatialGrid build_grid(const RunConfig &cfg) { return SpatialGrid::uniform(cfg.length, cfg.cells); }

SystemState build_initial(const RunConfig &cfg, const TargetProfile &target, const SpatialGrid &grid) {
  const std::string &kind = cfg.initial.kind;
  if (kind == "point-mass-good")
    return point_mass_good(grid);
  if (kind == "uniform-failure")
    return uniform_failure(grid);
  if (kind == "target")
    return target_state(target, grid);
  if (kind == "compatible")
    return compatible_state(target, grid, cfg.initial.p0.value_or(0.5));
  // tabulated: p1 interpolated onto the grid, p0 given or fixed by unit mass
  auto [xs, ys] = read_two_column_csv(cfg.initial.table);
  const SpatialGrid table = SpatialGrid::from_nodes(xs);
  if (std::abs(table.length() - grid.length()) > 1e-12 * grid.length())
    throw ConfigError("initial table must span [0, L]");
  SystemState s;
  s.p1.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k)
    s.p1[k] = interpolate(table, ys, grid[k]);
  s.p0 = cfg.initial.p0.value_or(1.0 - trapezoid(grid, s.p1));
  if (s.p0 < 0.0)
    throw ConfigError("initial table carries more than unit mass");
  return s;
}

} // namespace repairctl::cli
