#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "latgamma/energy.hpp"
#include "latgamma/field.hpp"

namespace latgamma {

enum class CubeLabel : std::uint8_t { Phase0 = 0, Phase1 = 1, Mixed = 2 };

std::string to_string(CubeLabel l);

struct CoarseGrainParams {
  double delta = 0.5;
  std::int64_t side = 1;  // cube side in lattice cells
  double requested_side = 1.0;  // eta/(4 eps) before rounding

  /// side = max(1, round(eta/(4 eps))).
  static CoarseGrainParams from(const EnergyParams& p, double delta);
  static CoarseGrainParams with_side(std::int64_t side, double delta);

  /// |side - requested| / requested.
  double rounding_error() const;
  void validate() const;
  std::vector<std::string> warnings() const;
};

/// Cube k covers the global cells [side*k - side/2, side*k - side/2 + side) on each axis.
struct CoarseGrid {
  int dim = 1;
  Site origin{0, 0, 0};  // index of the first full cube
  Site extent{1, 1, 1};
  std::array<bool, kMaxDim> periodic{false, false, false};

  std::int64_t cell_count() const { return extent[0] * extent[1] * extent[2]; }
  std::int64_t linear(const Site& local) const { return (local[0] * extent[1] + local[1]) * extent[2] + local[2]; }
  Site local_from_linear(std::int64_t idx) const;
  /// Neighbour of `local` along `axis` in direction `dir` (+1/-1); false off a non-periodic edge.
  bool neighbour(const Site& local, int axis, int dir, Site& out) const;
};

struct CoarseGrainResult {
  CoarseGrid grid;
  std::int64_t side = 1;
  double cube_side = 0.0;  // side * eps
  double delta = 0.5;
  std::vector<CubeLabel> labels;
  std::vector<double> majority;  // D per cube
  std::int64_t phase1 = 0;
  std::int64_t phase0 = 0;
  std::int64_t mixed = 0;
  std::int64_t partial_cubes = 0;  // window-edge cubes left out
  std::int64_t interface_cubes = 0;  // Phase1 cubes with a Phase0 face neighbour
  double mixed_measure = 0.0;
  double mixed_boundary = 0.0;
  double k1_perimeter = 0.0;
  double k0_perimeter = 0.0;
  std::array<std::int64_t, 32> histogram{};
  std::vector<std::string> warnings;
};

/// Grid of full cubes inside the window of `f`, plus the count of partial ones.
CoarseGrid coarse_grid(const SpinField& f, std::int64_t side, std::int64_t* partial = nullptr);

/// |#ones - #zeros| / #sites over the cube with global index k.
double majority_statistic(const SpinField& f, const Site& k, const CoarseGrainParams& p);

CoarseGrainResult classify(const SpinField& f, const CoarseGrainParams& p);

struct KSets {
  std::vector<std::uint8_t> k1;
  std::vector<std::uint8_t> k0;
};

KSets k_sets(const CoarseGrainResult& r);

/// Exposed faces of the set times cube_side^(d-1); a face on a non-periodic edge is exposed.
double boundary_measure(const CoarseGrid& grid, const std::vector<std::uint8_t>& set, double cube_side);

/// JSON document: extents, run-length label grid, 32-bin D histogram, scalars.
std::string to_json(const CoarseGrainResult& r);

}  // namespace latgamma
