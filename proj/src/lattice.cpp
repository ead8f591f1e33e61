#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "latgamma/field.hpp"

namespace latgamma {

PeriodicLattice::PeriodicLattice(int dim, std::vector<Point> offsets) : dim_(dim), offsets_(std::move(offsets)) {
  check_dimension(dim_);
  if (offsets_.empty()) throw std::invalid_argument("a periodic lattice needs at least one offset");
  for (std::size_t a = 0; a < offsets_.size(); ++a) {
    for (int k = 0; k < kMaxDim; ++k) {
      const double c = offsets_[a][k];
      if (k >= dim_) {
        if (c != 0.0) throw std::invalid_argument("offset has components beyond the lattice dimension");
        continue;
      }
      if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("lattice offsets must lie in the unit cell [0,1)^d");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (offsets_[a] == offsets_[b]) throw std::invalid_argument("lattice offsets must be pairwise distinct");
    }
  }
}

PeriodicLattice PeriodicLattice::cubic(int dim) { return PeriodicLattice(dim, {Point{}}); }

bool PeriodicLattice::is_cubic() const { return offsets_.size() == 1 && offsets_[0] == Point{}; }

std::string to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "restricted"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::Periodic;
  if (s == "restricted") return Boundary::Restricted;
  throw std::invalid_argument("unknown boundary '" + s + "' (expected periodic or restricted)");
}

Window Window::make(int dim, const Site& origin, const Site& extent, Boundary b) {
  Window w;
  w.dim = dim;
  for (int k = 0; k < dim; ++k) {
    w.origin[k] = origin[k];
    w.extent[k] = extent[k];
    w.boundary[k] = b;
  }
  w.validate();
  return w;
}

bool Window::all_restricted() const {
  for (int k = 0; k < dim; ++k) {
    if (periodic(k)) return false;
  }
  return true;
}

Site Window::local_from_linear(std::int64_t idx) const {
  Site s{};
  s[2] = idx % extent[2];
  idx /= extent[2];
  s[1] = idx % extent[1];
  s[0] = idx / extent[1];
  return s;
}

std::optional<Site> Window::locate(const Site& global) const {
  Site local{0, 0, 0};
  for (int k = 0; k < dim; ++k) {
    std::int64_t x = global[k] - origin[k];
    if (x < 0 || x >= extent[k]) {
      if (!periodic(k)) return std::nullopt;
      x %= extent[k];
      if (x < 0) x += extent[k];
    }
    local[k] = x;
  }
  return local;
}

void Window::validate() const {
  check_dimension(dim);
  for (int k = 0; k < kMaxDim; ++k) {
    if (k < dim && extent[k] < 1) throw std::invalid_argument("window extents must be >= 1");
    if (k >= dim && (extent[k] != 1 || origin[k] != 0)) {
      throw std::invalid_argument("window has extents beyond its dimension");
    }
  }
}

std::pair<Site, std::size_t> nearest_site(const PeriodicLattice& lattice, const Point& y) {
  const int d = lattice.dimension();
  Site base{0, 0, 0};
  Site span{1, 1, 1};
  for (int k = 0; k < d; ++k) {
    base[k] = static_cast<std::int64_t>(std::floor(y[k])) - 2;
    span[k] = 5;
  }
  double best = std::numeric_limits<double>::infinity();
  Site best_cell{};
  std::size_t best_offset = 0;
  // Candidates are visited in lexicographic (cell, offset) order, so keeping
  // the first strict minimum implements the tie-break.
  for (std::int64_t i0 = 0; i0 < span[0]; ++i0) {
    for (std::int64_t i1 = 0; i1 < span[1]; ++i1) {
      for (std::int64_t i2 = 0; i2 < span[2]; ++i2) {
        const Site cell{base[0] + i0, base[1] + i1, base[2] + i2};
        for (std::size_t a = 0; a < lattice.offset_count(); ++a) {
          double dist = 0.0;
          for (int k = 0; k < d; ++k) {
            const double diff = y[k] - (static_cast<double>(cell[k]) + lattice.offset(a)[k]);
            dist += diff * diff;
          }
          if (dist < best) {
            best = dist;
            best_cell = cell;
            best_offset = a;
          }
        }
      }
    }
  }
  for (int k = d; k < kMaxDim; ++k) best_cell[k] = 0;
  return {best_cell, best_offset};
}

VoronoiEstimate voronoi_volume_estimate(const PeriodicLattice& lattice, std::size_t a, std::int64_t samples,
                                        std::uint64_t seed) {
  if (samples < 10000) throw std::invalid_argument("voronoi_volume_estimate needs at least 10^4 samples");
  if (a >= lattice.offset_count()) throw std::out_of_range("offset index out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const int d = lattice.dimension();
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < samples; ++s) {
    Point y{};
    for (int k = 0; k < d; ++k) y[k] = uniform(rng);
    if (nearest_site(lattice, y).second == a) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

}  // namespace latgamma
