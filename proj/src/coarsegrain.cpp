#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "latgamma/coarsegrain.hpp"
#include "latgamma/parallel.hpp"

namespace latgamma {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

}  // namespace

std::string to_string(CubeLabel l) {
  switch (l) {
    case CubeLabel::Phase0:
      return "phase0";
    case CubeLabel::Phase1:
      return "phase1";
    case CubeLabel::Mixed:
      return "mixed";
  }
  return "?";
}

CoarseGrainParams CoarseGrainParams::from(const EnergyParams& e, double delta) {
  e.validate();
  CoarseGrainParams p;
  p.delta = delta;
  p.requested_side = e.range_ratio() / 4.0;
  p.side = std::max<std::int64_t>(1, std::llround(p.requested_side));
  p.validate();
  return p;
}

CoarseGrainParams CoarseGrainParams::with_side(std::int64_t side, double delta) {
  CoarseGrainParams p;
  p.delta = delta;
  p.side = side;
  p.requested_side = static_cast<double>(side);
  p.validate();
  return p;
}

double CoarseGrainParams::rounding_error() const {
  return std::abs(static_cast<double>(side) - requested_side) / requested_side;
}

void CoarseGrainParams::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie strictly between 0 and 1");
  if (side < 1) throw std::invalid_argument("cube side must be at least one cell");
  if (!(requested_side > 0.0)) throw std::invalid_argument("requested cube side must be positive");
}

std::vector<std::string> CoarseGrainParams::warnings() const {
  std::vector<std::string> out;
  if (rounding_error() > 0.25) {
    out.push_back("cube side rounded from " + format_real(requested_side) + " to " + std::to_string(side) +
                  " cells");
  }
  return out;
}

Site CoarseGrid::local_from_linear(std::int64_t idx) const {
  Site s{};
  s[2] = idx % extent[2];
  idx /= extent[2];
  s[1] = idx % extent[1];
  s[0] = idx / extent[1];
  return s;
}

bool CoarseGrid::neighbour(const Site& local, int axis, int dir, Site& out) const {
  out = local;
  std::int64_t x = local[axis] + dir;
  if (x < 0 || x >= extent[axis]) {
    if (!periodic[axis]) return false;
    x = (x + extent[axis]) % extent[axis];
  }
  out[axis] = x;
  return true;
}

CoarseGrid coarse_grid(const SpinField& f, std::int64_t side, std::int64_t* partial) {
  if (side < 1) throw std::invalid_argument("cube side must be at least one cell");
  const Window& w = f.window();
  const std::int64_t h = side / 2;
  CoarseGrid g;
  g.dim = w.dim;
  std::int64_t intersecting = 1;
  std::int64_t full = 1;
  for (int k = 0; k < w.dim; ++k) {
    const std::int64_t lo = w.origin[k];
    const std::int64_t hi = w.origin[k] + w.extent[k];
    if (w.periodic(k) && w.extent[k] % side == 0) {
      // Wrapping cubes stay whole on a periodic axis whose period they tile.
      g.periodic[k] = true;
      g.origin[k] = ceil_div(lo + h, side);
      g.extent[k] = w.extent[k] / side;
      intersecting *= g.extent[k];
      full *= g.extent[k];
      continue;
    }
    const std::int64_t first_full = ceil_div(lo + h, side);
    const std::int64_t last_full = floor_div(hi + h, side) - 1;
    const std::int64_t first_any = floor_div(lo + h, side);
    const std::int64_t last_any = ceil_div(hi + h, side) - 1;
    g.origin[k] = first_full;
    g.extent[k] = std::max<std::int64_t>(0, last_full - first_full + 1);
    intersecting *= last_any - first_any + 1;
    full *= g.extent[k];
  }
  if (partial) *partial = intersecting - full;
  return g;
}

namespace {

// (#ones, #sites) of the cube with global index k; cells are located through the
// window so periodic axes wrap.
std::pair<std::int64_t, std::int64_t> cube_counts(const SpinField& f, const Site& k, std::int64_t side) {
  const Window& w = f.window();
  const int d = w.dim;
  const std::int64_t h = side / 2;
  Site lo{0, 0, 0};
  Site n{1, 1, 1};
  for (int a = 0; a < d; ++a) {
    lo[a] = side * k[a] - h;
    n[a] = side;
  }
  std::int64_t ones = 0;
  std::int64_t sites = 0;
  for (std::int64_t i0 = 0; i0 < n[0]; ++i0) {
    for (std::int64_t i1 = 0; i1 < n[1]; ++i1) {
      for (std::int64_t i2 = 0; i2 < n[2]; ++i2) {
        const auto local = w.locate({lo[0] + i0, lo[1] + i1, lo[2] + i2});
        if (!local) continue;
        const std::int64_t c = w.linear(*local);
        for (std::size_t a = 0; a < f.offset_count(); ++a) {
          ones += f.at(c, a);
          ++sites;
        }
      }
    }
  }
  return {ones, sites};
}

}  // namespace

double majority_statistic(const SpinField& f, const Site& k, const CoarseGrainParams& p) {
  p.validate();
  const auto [ones, sites] = cube_counts(f, k, p.side);
  if (sites == 0) throw std::invalid_argument("cube does not meet the window");
  return static_cast<double>(std::abs(2 * ones - sites)) / static_cast<double>(sites);
}

CoarseGrainResult classify(const SpinField& f, const CoarseGrainParams& p) {
  p.validate();
  CoarseGrainResult r;
  r.grid = coarse_grid(f, p.side, &r.partial_cubes);
  r.side = p.side;
  r.cube_side = static_cast<double>(p.side) * f.eps();
  r.delta = p.delta;
  r.warnings = p.warnings();
  if (r.partial_cubes > 0) {
    r.warnings.push_back(std::to_string(r.partial_cubes) + " window-edge partial cubes excluded");
  }
  const std::int64_t n = r.grid.cell_count();
  r.labels.assign(static_cast<std::size_t>(n), CubeLabel::Mixed);
  r.majority.assign(static_cast<std::size_t>(n), 0.0);
  const int d = r.grid.dim;
  const double threshold = 1.0 - p.delta;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Site local = r.grid.local_from_linear(static_cast<std::int64_t>(i));
      Site k{0, 0, 0};
      for (int a = 0; a < d; ++a) k[a] = r.grid.origin[a] + local[a];
      const auto [ones, sites] = cube_counts(f, k, p.side);
      const double D = static_cast<double>(std::abs(2 * ones - sites)) / static_cast<double>(sites);
      r.majority[i] = D;
      if (D < threshold) {
        r.labels[i] = CubeLabel::Mixed;
      } else {
        r.labels[i] = 2 * ones > sites ? CubeLabel::Phase1 : CubeLabel::Phase0;
      }
    }
  });
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    switch (r.labels[i]) {
      case CubeLabel::Phase1:
        ++r.phase1;
        break;
      case CubeLabel::Phase0:
        ++r.phase0;
        break;
      case CubeLabel::Mixed:
        ++r.mixed;
        break;
    }
    const auto bin = std::min<std::size_t>(31, static_cast<std::size_t>(r.majority[i] * 32.0));
    ++r.histogram[bin];
  }
  for (std::int64_t i = 0; i < n; ++i) {
    if (r.labels[static_cast<std::size_t>(i)] != CubeLabel::Phase1) continue;
    const Site local = r.grid.local_from_linear(i);
    bool touches = false;
    for (int a = 0; a < d && !touches; ++a) {
      for (const int dir : {1, -1}) {
        Site nb;
        if (r.grid.neighbour(local, a, dir, nb) &&
            r.labels[static_cast<std::size_t>(r.grid.linear(nb))] == CubeLabel::Phase0) {
          touches = true;
          break;
        }
      }
    }
    if (touches) ++r.interface_cubes;
  }
  std::vector<std::uint8_t> mixed_set(r.labels.size());
  for (std::size_t i = 0; i < r.labels.size(); ++i) mixed_set[i] = r.labels[i] == CubeLabel::Mixed;
  r.mixed_measure = static_cast<double>(r.mixed) * std::pow(r.cube_side, d);
  r.mixed_boundary = boundary_measure(r.grid, mixed_set, r.cube_side);
  const KSets ks = k_sets(r);
  r.k1_perimeter = boundary_measure(r.grid, ks.k1, r.cube_side);
  r.k0_perimeter = boundary_measure(r.grid, ks.k0, r.cube_side);
  return r;
}

KSets k_sets(const CoarseGrainResult& r) {
  KSets out;
  out.k1.resize(r.labels.size());
  out.k0.resize(r.labels.size());
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    out.k1[i] = r.labels[i] == CubeLabel::Phase1;
    out.k0[i] = r.labels[i] == CubeLabel::Phase0;
  }
  return out;
}

double boundary_measure(const CoarseGrid& grid, const std::vector<std::uint8_t>& set, double cube_side) {
  if (static_cast<std::int64_t>(set.size()) != grid.cell_count()) {
    throw std::invalid_argument("coarse set does not match the grid size");
  }
  std::int64_t faces = 0;
  for (std::int64_t i = 0; i < grid.cell_count(); ++i) {
    if (!set[static_cast<std::size_t>(i)]) continue;
    const Site local = grid.local_from_linear(i);
    for (int a = 0; a < grid.dim; ++a) {
      for (const int dir : {1, -1}) {
        Site nb;
        if (!grid.neighbour(local, a, dir, nb) || !set[static_cast<std::size_t>(grid.linear(nb))]) ++faces;
      }
    }
  }
  return static_cast<double>(faces) * std::pow(cube_side, grid.dim - 1);
}

std::string to_json(const CoarseGrainResult& r) {
  using nlohmann::json;
  const int d = r.grid.dim;
  json j;
  j["dimension"] = d;
  j["extents"] = std::vector<std::int64_t>(r.grid.extent.begin(), r.grid.extent.begin() + d);
  j["origin"] = std::vector<std::int64_t>(r.grid.origin.begin(), r.grid.origin.begin() + d);
  std::vector<bool> periodic(r.grid.periodic.begin(), r.grid.periodic.begin() + d);
  j["periodic"] = periodic;
  j["cube_side_cells"] = r.side;
  j["cube_side"] = r.cube_side;
  j["delta"] = r.delta;
  // Runs of [label, length] in row-major cube order, label one of "0", "1", "M".
  json runs = json::array();
  for (std::size_t i = 0; i < r.labels.size();) {
    std::size_t e = i;
    while (e < r.labels.size() && r.labels[e] == r.labels[i]) ++e;
    const char* tag = r.labels[i] == CubeLabel::Phase1 ? "1" : (r.labels[i] == CubeLabel::Phase0 ? "0" : "M");
    runs.push_back(json::array({tag, e - i}));
    i = e;
  }
  j["labels_rle"] = runs;
  j["d_histogram"] = r.histogram;
  j["counts"] = {{"phase1", r.phase1}, {"phase0", r.phase0}, {"mixed", r.mixed},
                 {"partial_excluded", r.partial_cubes}, {"phase1_touching_phase0", r.interface_cubes}};
  j["mixed_measure"] = r.mixed_measure;
  j["mixed_boundary"] = r.mixed_boundary;
  j["k1_perimeter"] = r.k1_perimeter;
  j["k0_perimeter"] = r.k0_perimeter;
  j["warnings"] = r.warnings;
  return j.dump(2);
}

}  // namespace latgamma
