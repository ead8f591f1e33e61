#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "latgamma/field.hpp"
#include "latgamma/kernel.hpp"

namespace latgamma {

/// Rule that sets some coefficients a_ij to zero.
class CoefficientMask {
 public:
  enum class Kind { Full, Perforation, Custom };
  /// Returns true when the pair (y_i, y_j) (lattice coordinates) has its coefficient zeroed.
  using Predicate = std::function<bool(const Point& yi, const Point& yj)>;

  static CoefficientMask full() { return CoefficientMask(); }
  /// Zeroes every pair with an endpoint in N Z^d.
  static CoefficientMask perforation(int n);
  static CoefficientMask custom(Predicate masked, std::string name = "custom");

  Kind kind() const { return kind_; }
  int period() const { return n_; }
  bool site_masked(const Point& y, int d) const;
  bool masked(const Point& yi, const Point& yj, int d) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::Full;
  int n_ = 0;
  Predicate pred_;
  std::string name_ = "full";
};

/// Rounds r to the nearest integer when within 1e-9 relative, else returns r.
double snap_ratio(double r);

/// eps, eta, kernel and the pair-sum conventions of one energy evaluation.
struct EnergyParams {
  double eps = 0.0;
  double eta = 0.0;
  Kernel kernel = Kernel::ball(1);
  CoefficientMask mask;
  /// When set, the outer index i only runs over cells of this (global) box.
  std::optional<CellBox> localization;

  EnergyParams(double eps_, double eta_, Kernel k) : eps(eps_), eta(eta_), kernel(std::move(k)) {}

  /// R = eta/eps, snapped to the nearest integer when within 1e-9 relative.
  double range_ratio() const;
  /// eps^(2d)/eta^(d+1) = eps^(d-1)/R^(d+1).
  double prefactor() const;
  /// Throws std::invalid_argument for non-positive or non-finite scales.
  void validate() const;
  /// Soft violations (eps >= eta, eta >= 1, R < 4).
  std::vector<std::string> warnings() const;
};

/// One interaction shift: from offset `from` in cell c to offset `to` in cell c + cell.
struct Shift {
  Site cell{0, 0, 0};
  std::size_t from = 0;
  std::size_t to = 0;
  Point disp{};  // cell + o_to - o_from, lattice units
  double weight = 0.0;  // a(disp / R)
};

/// a(disp / R); ball kernels are tested on |disp|^2 < (rR)^2 to avoid rounding at the rim.
double shift_weight(const Kernel& k, const Point& disp, double range_ratio);

/// Every shift with |disp| < support * R, in lexicographic (cell, from, to) order.
std::vector<Shift> enumerate_shifts(const PeriodicLattice& lattice, const Kernel& k, double range_ratio);
std::vector<Shift> enumerate_shifts(const PeriodicLattice& lattice, const EnergyParams& p);

/// #{i in window : u_{i+xi} != u_i} on a single-offset lattice, no mask, no localization.
std::int64_t pair_difference_count(const SpinField& f, const Site& xi);
/// Count for one shift with the mask and localization of `p`.
std::int64_t pair_difference_count(const SpinField& f, const Shift& s, const EnergyParams& p);

std::vector<std::int64_t> pair_counts_direct(const SpinField& f, const std::vector<Shift>& shifts,
                                             const EnergyParams& p);
/// Same counts from FFT correlations; throws NumericalFailure on rounding residue
/// and std::invalid_argument for custom masks.
std::vector<std::int64_t> pair_counts_fft(const SpinField& f, const std::vector<Shift>& shifts,
                                          const EnergyParams& p);

/// prefactor * sum_s weight_s * counts_s, with a fixed summation tree.
double weighted_energy(const std::vector<Shift>& shifts, const std::vector<std::int64_t>& counts,
                       const EnergyParams& p, int d);

double energy_direct(const SpinField& f, const EnergyParams& p);
double energy_fft(const SpinField& f, const EnergyParams& p);

/// Warnings about the field/params combination (restricted window shorter than the range, ...).
std::vector<std::string> energy_warnings(const SpinField& f, const EnergyParams& p);

/// Jumps along the line base + k xi (both ends in the window); base is a local cell.
std::int64_t count_line_jumps(const SpinField& f, const Site& xi, const Site& base);

/// prefactor * sum_xi a * #(lines in direction xi with at least one jump).
/// Single-offset lattices and the full mask only.
double line_jump_lower_bound(const SpinField& f, const EnergyParams& p);

}  // namespace latgamma
