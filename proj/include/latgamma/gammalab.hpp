#pragma once

#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "latgamma/coarsegrain.hpp"
#include "latgamma/energy.hpp"
#include "latgamma/field.hpp"
#include "latgamma/kernel.hpp"

namespace latgamma {

struct ScheduleStep {
  double eps = 0.0;
  double eta = 0.0;
};

struct Schedule {
  std::vector<ScheduleStep> steps;
  std::string rule = "explicit";

  /// eps_0, eps_0/2, ... with eta = sqrt(eps).
  static Schedule sqrt_halving(double eps0, int count);
  /// eps = 1/R^2, eta = 1/R for each ratio R (so eta = sqrt(eps) with integer eta/eps).
  static Schedule sqrt_ratios(const std::vector<double>& ratios);
  static Schedule explicit_steps(std::vector<ScheduleStep> steps);

  /// eps strictly decreasing, eta non-increasing, eps/eta non-increasing, all positive.
  void validate() const;
};

/// Target value with a note on how it was obtained ("closed-form" or "quadrature").
struct Target {
  double value = 0.0;
  std::string provenance;
};

struct StepRecord {
  double eps = 0.0;
  double eta = 0.0;
  double range_ratio = 0.0;
  double energy = 0.0;
  double normalized = 0.0;
  double rel_error = 0.0;
  double interface_measure = 0.0;
  double line_bound = -1.0;  // negative when not computed
  Site window_extent{1, 1, 1};
  std::int64_t cube_side = 1;
  std::int64_t mixed_count = 0;
  std::int64_t phase1_count = 0;
  std::int64_t phase0_count = 0;
  std::int64_t interface_cubes = 0;
  double mixed_measure = 0.0;
  double mixed_boundary = 0.0;
  double k1_perimeter = 0.0;
  // Counterexample extras.
  double unmasked_energy = 0.0;
  std::vector<double> box_averages;
  std::vector<std::string> warnings;
};

struct ConvergenceReport {
  std::string experiment;
  std::string kernel;
  int dimension = 1;
  std::vector<double> direction;
  std::string schedule_rule;
  Target target;
  /// true when rel_error holds |energy - target| because the target is 0.
  bool absolute_error = false;
  std::vector<StepRecord> records;
  std::optional<double> rate;
  std::vector<std::string> notes;
};

/// sum over integer xi of h^d a(h xi) |<h xi, nu>|, with 1/h snapped like eta/eps.
double riemann_phi(const Kernel& k, const Point& nu, double h);

/// phi(k, nu) from the closed form when available, else from quadrature.
Target phi_target(const Kernel& k, const Point& nu);

enum class EnergyMethod { Direct, Fft };

struct HalfspaceOptions {
  double delta = 0.5;
  /// Window extent along the normal, in units of eta.
  double normal_side_eta = 8.0;
  /// Tangential window side in physical units; 0 means normal_side_eta * eta.
  double tangential_side = 0.0;
  bool line_bound = true;
  EnergyMethod method = EnergyMethod::Fft;
  /// Sampled instead of the half-space when set (sanity runs).
  std::optional<TargetSet> substitute;
};

/// Integer primitive direction closest to nu with entries bounded by `bound`.
Site rational_direction(const Point& nu, int d, int bound = 64);

ConvergenceReport halfspace_experiment(const Kernel& k, const Point& nu, const Schedule& s,
                                       const HalfspaceOptions& opt = {});

struct PolytopeOptions {
  double delta = 0.5;
  /// Margin around the polytope in units of eta; must be at least 1 + support.
  double margin_eta = 0.0;  // 0 means 1 + support
  EnergyMethod method = EnergyMethod::Fft;
};

ConvergenceReport polytope_experiment(const Kernel& k, const TargetSet& A, const Schedule& s,
                                      const PolytopeOptions& opt = {});

struct CounterexampleOptions {
  double delta = 0.9;
  double window_side_eta = 8.0;
};

/// Perforated field with perforation-masked coefficients along the schedule.
ConvergenceReport perforation_counterexample(int n, int d, const Kernel& k, const Schedule& s,
                                             const CounterexampleOptions& opt = {});

/// Least-squares slope of log y against log x; throws with fewer than 3 points.
double fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Slope of log|rel_error| against log(eps/eta) over records with positive error.
double fit_rate(const ConvergenceReport& r);

void write_csv(std::ostream& out, const ConvergenceReport& r);
std::string to_json(const ConvergenceReport& r);
/// Writes <stem>.csv and <stem>.json into `dir`.
void write_report(const std::filesystem::path& dir, const std::string& stem, const ConvergenceReport& r);

}  // namespace latgamma
