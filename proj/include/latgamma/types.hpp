#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace latgamma {

// Geometry is carried in fixed three-component arrays; components past the
// active dimension are zero (points) or zero/one (indices/extents).
inline constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;
using Site = std::array<std::int64_t, kMaxDim>;

/// Raised when a numerical result cannot be trusted (e.g. FFT rounding residue).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on file-system or format problems while reading/writing artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a run configuration cannot be parsed or is inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check_dimension(int d) {
  if (d < 1 || d > kMaxDim) {
    throw std::invalid_argument("dimension must be 1, 2 or 3, got " + std::to_string(d));
  }
}

inline double dot(const Point& a, const Point& b, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

inline double norm(const Point& a, int d) { return std::sqrt(dot(a, a, d)); }

/// Builds a Point from the first `d` entries of `v`; throws on size mismatch.
Point to_point(const std::vector<double>& v, int d);

/// Unit vector in direction `v`; throws if `v` is (numerically) zero.
Point normalized(const Point& v, int d);

/// Half-open axis-aligned box [lo, hi) in physical coordinates.
struct Box {
  Point lo{};
  Point hi{};
};

/// Half-open box [lo, hi) of lattice cell indices.
struct CellBox {
  Site lo{0, 0, 0};
  Site hi{1, 1, 1};

  bool contains(const Site& c, int d) const {
    for (int k = 0; k < d; ++k) {
      if (c[k] < lo[k] || c[k] >= hi[k]) return false;
    }
    return true;
  }
};

/// Formats a real with 17 significant digits ('.' decimal), round-trip safe.
std::string format_real(double x);

}  // namespace latgamma
