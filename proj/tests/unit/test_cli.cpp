#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "repairctl/cli.hpp"

using namespace repairctl;
using namespace repairctl::cli;
namespace fs = std::filesystem;

namespace {

const fs::path data_dir{REPAIRCTL_TEST_DATA};

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / "repairctl_unit" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path &p) { return nlohmann::json::parse(slurp(p)); }

RunConfig quick(const std::string &extra) {
  return parse_config(R"({"version": 1, "lambda": 1.0, "L": 1.0, "target": {"form": "linear-decay"})" + extra +
                          "}",
                      data_dir);
}

} // namespace

TEST_CASE("config parsing") {
  const auto cfg = load_config(data_dir / "canonical.json");
  CHECK(cfg.cells == 512);
  CHECK(cfg.i_max == 40);
  CHECK(cfg.alpha_auto);
  CHECK(cfg.scan.enabled);

  CHECK_THROWS_AS(parse_config(R"({"lambda": 1.0})", data_dir), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"version": 2})", data_dir), ConfigError);
  CHECK_THROWS_AS(quick(R"(, "colour": "red")"), ConfigError);
  CHECK_THROWS_AS(quick(R"(, "grid": {"cells": 64, "bogus": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json", data_dir), ConfigError);
  CHECK_THROWS_AS(load_config(data_dir / "missing_table.json"), ConfigError);

  const auto tab = quick(R"(, "initial": {"kind": "tabulated", "table": "linear_table.csv"})");
  CHECK(tab.initial.table == data_dir / "linear_table.csv");
}

TEST_CASE("validate command") {
  std::ostringstream log;
  const auto out = scratch("validate");
  CHECK(run_command("validate", load_config(data_dir / "linear.json"), out, log) == exit_pass);
  const auto report = read_json(out / "validation_report.json");
  CHECK(report["passed"] == true);

  const auto bad_out = scratch("validate_bad");
  CHECK(run_command("validate", load_config(data_dir / "bad_endpoint.json"), bad_out, log) == exit_check_failed);
  const auto bad = read_json(bad_out / "validation_report.json");
  CHECK(bad["passed"] == false);
  bool named = false;
  for (const auto &c : bad["checks"])
    if (c["name"] == "endpoint-vanishing")
      named = c["passed"] == false;
  CHECK(named);

  CHECK(run_command("frobnicate", load_config(data_dir / "linear.json"), bad_out, log) == exit_usage);
}

TEST_CASE("failed validation writes no artifacts") {
  std::ostringstream log;
  const auto out = scratch("no_artifacts");
  CHECK(run_command("control", load_config(data_dir / "bad_endpoint.json"), out, log) == exit_check_failed);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("control started at the target") {
  std::ostringstream log;
  const auto out = scratch("control_target");
  const auto cfg = quick(R"(, "initial": {"kind": "target"}, "grid": {"cells": 128})");
  CHECK(run_command("control", cfg, out, log) == exit_pass);
  const auto summary = read_json(out / "summary.json");
  CHECK(summary["stages_run"] == 1);
  CHECK(summary["final_error"].get<double>() <= 1e-14);
  for (const char *f : {"trajectory.csv", "envelope.csv", "plan.json", "invariants.json"})
    CHECK(fs::exists(out / f));
}

TEST_CASE("canonical control run") {
  std::ostringstream log;
  const auto out = scratch("control_canonical");
  CHECK(run_command("control", load_config(data_dir / "canonical.json"), out, log) == exit_pass);
  const auto summary = read_json(out / "summary.json");
  CHECK(summary["final_error"].get<double>() <= 1e-3);
  CHECK(summary["envelope_passed"] == true);
  CHECK(summary["mu_scan"]["passed"] == true);
  CHECK(fs::exists(out / "mu_scan.csv"));
}

TEST_CASE("scan skipped when t_f is too short") {
  std::ostringstream log;
  const auto out = scratch("short_tf");
  const auto cfg = quick(R"(, "t_f": 0.5, "grid": {"cells": 128}, "scan": {"enabled": true})");
  run_command("control", cfg, out, log);
  CHECK(log.str().find("warning: boundedness scan skipped") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "mu_scan.csv"));
}

TEST_CASE("runs are deterministic") {
  std::ostringstream log;
  const auto cfg = quick(R"(, "grid": {"cells": 128}, "i_max": 12)");
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_command("control", cfg, a, log);
  run_command("control", cfg, b, log);
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "envelope.csv") == slurp(b / "envelope.csv"));
  CHECK_FALSE(slurp(a / "trajectory.csv").empty());
}

TEST_CASE("simulate-open approaches the steady state") {
  std::ostringstream log;
  const auto out = scratch("open");
  const auto cfg = quick(R"(, "t_end": 5.0, "grid": {"cells": 256})");
  CHECK(run_command("simulate-open", cfg, out, log) == exit_pass);
  std::ifstream in(out / "trajectory.csv");
  std::string line, first, last;
  std::getline(in, line);
  std::getline(in, first);
  while (std::getline(in, line))
    if (!line.empty())
      last = line;
  const auto dist = [](const std::string &row) { return std::stod(row.substr(row.rfind(',') + 1)); };
  CHECK(dist(last) * 10.0 <= dist(first));
  CHECK(read_json(out / "invariants.json")["passed"] == true);
}

TEST_CASE("simulate-open when the cell width does not divide t_end") {
  std::ostringstream log;
  const auto out = scratch("open_odd");
  const auto cfg = parse_config(
      R"({"version": 1, "lambda": 2.0, "L": 1.5, "target": {"form": "quadratic-decay"}, "grid": {"cells": 256}})",
      data_dir);
  CHECK(run_command("validate", cfg, out, log) == exit_pass);
  CHECK(run_command("simulate-open", cfg, out, log) == exit_pass);
  const auto summary = read_json(out / "summary.json");
  CHECK(summary["dt"].get<double>() <= 1.5 / 256);
  CHECK(read_json(out / "invariants.json")["max_mass_drift"].get<double>() <= 1e-13);
}
