#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "repairctl/grid.hpp"
#include "repairctl/state.hpp"

namespace repairctl {

enum class TargetForm { linear_decay, quadratic_decay, tabulated };

const char *to_string(TargetForm form);

/// Desired distribution (p0*, p1*(x)) that the controller steers toward.
///
/// Analytic families evaluate in closed form. Tabulated profiles interpolate
/// piecewise-linearly and report the segment slope as the derivative.
struct TargetProfile {
  double lambda = 0.0;
  double length = 0.0;
  double p0_star = 0.0;
  std::function<double(double)> p1_star;
  std::function<double(double)> dp1_star;
  TargetForm form = TargetForm::linear_decay;
  std::string table_path; // only for tabulated profiles loaded from disk
  std::vector<double> knots; // slope breaks of tabulated profiles

  double p1(double x) const { return p1_star(x); }
  double dp1(double x) const { return dp1_star(x); }
};

/// p1*(x) = C (L - x) with p0* = 1 / (1 + lambda L / 2).
TargetProfile make_linear_target(double lambda, double length);

/// p1*(x) = C (L - x)^2 with p0* = 1 / (1 + lambda L / 3).
TargetProfile make_quadratic_target(double lambda, double length);

TargetProfile make_tabulated_target(double lambda, double p0_star, std::vector<double> xs,
                                    std::vector<double> values);

/// Reads a two-column CSV (x, p1_star) with a header row. p0* is fixed by unit total mass.
TargetProfile load_tabulated_target(const std::filesystem::path &path, double lambda);

/// Two-column numeric CSV with a mandatory header row.
std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(const std::filesystem::path &path);

std::vector<double> sample_p1(const TargetProfile &target, const SpatialGrid &grid);
SystemState target_state(const TargetProfile &target, const SpatialGrid &grid);

/// Boundary-compatible initial datum with good-mode probability p0:
/// p1 = p1*(x) (a + b F(x)), F(x) = int_0^x p1*, a = p0 / p0* so that p1(0) = lambda p0,
/// and b fixed by unit trapezoid mass. Throws InvalidParameter if p1 would turn negative.
SystemState compatible_state(const TargetProfile &target, const SpatialGrid &grid, double p0);

/// ||p1*||_{L1} by trapezoid on the grid.
double target_failure_mass(const TargetProfile &target, const SpatialGrid &grid);
/// Integral of p1* itself: 3-point Gauss between consecutive grid nodes and knots.
/// Exact for the polynomial families and for tabulated profiles.
double exact_failure_mass(const TargetProfile &target, const SpatialGrid &grid);

struct ValidationCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct ValidationReport {
  bool passed = false;
  std::vector<ValidationCheck> checks;

  const ValidationCheck *find(const std::string &name) const;
};

namespace check_names {
inline constexpr const char *boundary = "boundary-compatibility";
inline constexpr const char *endpoint = "endpoint-vanishing";
inline constexpr const char *positivity = "positivity";
inline constexpr const char *monotone = "strict-decrease";
inline constexpr const char *mass = "unit-mass";
} // namespace check_names

/// Checks p1*(0) = lambda p0*, p1*(L) = 0, positivity and strict decrease at interior
/// nodes, and unit total mass of the profile itself. Failures are reported, never thrown.
ValidationReport validate_target(const TargetProfile &target, const SpatialGrid &grid, double tol);

} // namespace repairctl
