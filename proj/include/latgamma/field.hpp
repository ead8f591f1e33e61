#pragma once

#include <cstdint>
#include <iosfwd>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "latgamma/types.hpp"

namespace latgamma {

/// A discrete set with period 1 in every coordinate: offsets + Z^d.
class PeriodicLattice {
 public:
  PeriodicLattice(int dim, std::vector<Point> offsets);
  static PeriodicLattice cubic(int dim);

  int dimension() const { return dim_; }
  std::size_t offset_count() const { return offsets_.size(); }
  const std::vector<Point>& offsets() const { return offsets_; }
  const Point& offset(std::size_t a) const { return offsets_.at(a); }
  bool is_cubic() const;

 private:
  int dim_;
  std::vector<Point> offsets_;
};

enum class Boundary { Periodic, Restricted };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// A box of lattice cells [origin, origin + extent) with a boundary rule per axis.
struct Window {
  int dim = 1;
  Site origin{0, 0, 0};
  Site extent{1, 1, 1};
  std::array<Boundary, kMaxDim> boundary{Boundary::Restricted, Boundary::Restricted, Boundary::Restricted};

  static Window make(int dim, const Site& origin, const Site& extent, Boundary b);

  std::int64_t cell_count() const { return extent[0] * extent[1] * extent[2]; }
  bool periodic(int axis) const { return boundary[static_cast<std::size_t>(axis)] == Boundary::Periodic; }
  bool all_restricted() const;

  std::int64_t linear(const Site& local) const { return (local[0] * extent[1] + local[1]) * extent[2] + local[2]; }
  Site local_from_linear(std::int64_t idx) const;

  /// Local index of a global cell, wrapping periodic axes; nullopt when a
  /// restricted axis is out of range.
  std::optional<Site> locate(const Site& global) const;

  void validate() const;
};

struct HalfSpace {
  Point normal{};  // unit
  double offset = 0.0;
};

class TargetSet;

/// Points satisfying every constraint  <x, normal> < offset.
struct Polytope {
  std::vector<HalfSpace> constraints;
};

struct BallSet {
  Point center{};
  double radius = 0.0;
};

/// Lattice-defined: contains every site except those of N Z^d.
struct PerforatedConstant {
  int n = 2;
};

struct WholeSpace {};

struct Complement {
  std::shared_ptr<const TargetSet> inner;
};

/// One (d-1)-face of a polytope.
struct PolytopeFace {
  Point normal{};
  double measure = 0.0;
};

/// Target sets used to generate recovery sequences and reference fields.
class TargetSet {
 public:
  static TargetSet half_space(int dim, const Point& nu, double offset = 0.0);
  static TargetSet polytope(int dim, std::vector<HalfSpace> constraints);
  /// Open box lo < x < hi.
  static TargetSet box(int dim, const Point& lo, const Point& hi);
  static TargetSet ball(int dim, const Point& center, double radius);
  static TargetSet perforated(int dim, int n);
  static TargetSet whole(int dim);

  TargetSet complement() const;

  int dimension() const { return dim_; }
  std::string describe() const;

  /// Membership of a site with lattice coordinates `y` (cell + offset) on eps L.
  bool contains_site(const Point& y, double eps) const;
  /// Membership of a physical point; throws for lattice-defined sets.
  bool contains(const Point& x) const;

  bool is_polytope() const;
  const Polytope& as_polytope() const;

  /// Faces with positive measure; empty when the polytope has no interior.
  std::vector<PolytopeFace> faces() const;
  /// Lebesgue measure of a polytope.
  double volume() const;
  /// Bounding box of a polytope or ball.
  Box bounding_box() const;

  using Variant = std::variant<HalfSpace, Polytope, BallSet, PerforatedConstant, WholeSpace, Complement>;
  const Variant& variant() const { return v_; }

 private:
  TargetSet(int dim, Variant v) : dim_(dim), v_(std::move(v)) {}
  int dim_;
  Variant v_;
};

/// Binary occupancy on a finite window of eps * L. Values are stored as
/// [cell linear index * offset_count + offset index], cells row-major with
/// axis 0 slowest. Immutable once built.
class SpinField {
 public:
  SpinField(PeriodicLattice lattice, double eps, Window window, std::vector<std::uint8_t> values);

  /// u_i = 1 iff eps * i lies in the set.
  static SpinField sample(const TargetSet& set, const PeriodicLattice& lattice, double eps, const Window& window);

  const PeriodicLattice& lattice() const { return lattice_; }
  double eps() const { return eps_; }
  const Window& window() const { return window_; }
  int dimension() const { return window_.dim; }
  std::size_t offset_count() const { return lattice_.offset_count(); }
  std::size_t site_count() const { return values_.size(); }
  std::span<const std::uint8_t> values() const { return values_; }

  std::uint8_t at(std::int64_t cell, std::size_t offset) const {
    return values_[static_cast<std::size_t>(cell) * lattice_.offset_count() + offset];
  }
  std::uint8_t at_local(const Site& local, std::size_t offset = 0) const { return at(window_.linear(local), offset); }

  /// Lattice coordinates (global cell + offset) of a site.
  Point lattice_coord(const Site& local, std::size_t offset) const;
  /// Physical position eps * (cell + offset).
  Point position(const Site& local, std::size_t offset) const;

  std::int64_t ones() const;

  /// 1 - u.
  SpinField flipped() const;
  /// Copy with one site toggled.
  SpinField with_toggled(const Site& local, std::size_t offset = 0) const;

 private:
  PeriodicLattice lattice_;
  double eps_;
  Window window_;
  std::vector<std::uint8_t> values_;
};

/// Piecewise-constant interpolation: the value of the nearest scaled site,
/// ties broken towards the lexicographically smallest (cell, offset).
std::uint8_t interpolate(const SpinField& f, const Point& x);

/// Mean of u over the sites whose positions lie in the half-open region.
double window_average(const SpinField& f, const Box& region);

/// eps^d times the number of sites in `region` where u differs from the set.
double l1_distance(const SpinField& f, const TargetSet& set, const Box& region);

struct VoronoiEstimate {
  double volume = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo volume of the Voronoi cell of offset `a` (nearest-site
/// classification of uniform samples in the unit cell).
VoronoiEstimate voronoi_volume_estimate(const PeriodicLattice& lattice, std::size_t a, std::int64_t samples,
                                        std::uint64_t seed);

/// Nearest site of the infinite lattice to lattice-unit point y: (cell, offset).
std::pair<Site, std::size_t> nearest_site(const PeriodicLattice& lattice, const Point& y);

// SPIN1 text format.
void write_spin(std::ostream& out, const SpinField& f);
void write_spin(const std::filesystem::path& path, const SpinField& f);
SpinField read_spin(std::istream& in);
SpinField read_spin(const std::filesystem::path& path);

}  // namespace latgamma
