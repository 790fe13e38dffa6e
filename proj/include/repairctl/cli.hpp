#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "repairctl/errors.hpp"
#include "repairctl/grid.hpp"
#include "repairctl/state.hpp"
#include "repairctl/target.hpp"

namespace repairctl::cli {

/// Malformed or inconsistent configuration (exit status 2).
class ConfigError : public Error {
public:
  using Error::Error;
};

inline constexpr int exit_pass = 0;
inline constexpr int exit_check_failed = 1;
inline constexpr int exit_usage = 2;

struct TargetSpec {
  TargetForm form = TargetForm::linear_decay;
  std::filesystem::path table;
};

struct InitialSpec {
  std::string kind = "point-mass-good"; // point-mass-good | uniform-failure | tabulated | target | compatible
  std::filesystem::path table;
  std::optional<double> p0;
};

struct Tolerances {
  double validate = 1e-10;
  double mass = 1e-6;
  double negativity = 1e-12;
  double endpoint = 1e-10;
  double final_error = 1e-3;
};

struct StageSpec {
  int index = 1;
  std::optional<double> alpha; // defaults to 1
  double duration = 4.0;
  std::optional<double> dt; // defaults to horizon / 64
};

struct FvSpec {
  double cfl = 0.9;
  std::vector<std::size_t> levels{128, 256, 512};
  double t_end = 1.0;
  double stage_duration = 0.3;
  double min_order = 0.9;
};

struct ScanSpec {
  bool enabled = false;
  double l_frac = 0.9;
  double ceiling_factor = 10.0;
};

struct CalibrationSpec {
  std::optional<double> duration; // defaults to max(4, 12 ||p1*||_{L1})
  double skip = 0.2;
};

struct RunConfig {
  int version = 1;
  double lambda = 1.0;
  double length = 1.0;
  TargetSpec target;
  InitialSpec initial;
  double t_f = 2.0;
  double t_end = 5.0;
  bool alpha_auto = true;
  double alpha_value = 0.0;
  std::size_t cells = 512;
  int steps_per_stage = 64;
  double horizon_divisor = 8.0;
  int i_max = 40;
  std::vector<double> stage_lengths; // optional alternative schedule
  StageSpec stage;
  Tolerances tol;
  FvSpec fv;
  ScanSpec scan;
  CalibrationSpec calibration;
  std::filesystem::path output_dir = "out";
};

/// Parses JSON text; relative table paths resolve against `base_dir`.
RunConfig parse_config(const std::string &text, const std::filesystem::path &base_dir);
RunConfig load_config(const std::filesystem::path &path);

TargetProfile build_target(const RunConfig &cfg);
SpatialGrid build_grid(const RunConfig &cfg);
SystemState build_initial(const RunConfig &cfg, const TargetProfile &target, const SpatialGrid &grid);

inline constexpr const char *command_names[] = {"validate", "simulate-open", "simulate-closed-stage",
                                                "control", "compare", "scan-mu"};

/// Runs one subcommand and writes its artifacts under `out_dir`. Returns the exit status.
int run_command(const std::string &name, const RunConfig &cfg, const std::filesystem::path &out_dir,
                std::ostream &log);

} // namespace repairctl::cli
