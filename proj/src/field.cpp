#include <algorithm>
#include <cmath>

#include "latgamma/field.hpp"
#include "latgamma/parallel.hpp"

namespace latgamma {

SpinField::SpinField(PeriodicLattice lattice, double eps, Window window, std::vector<std::uint8_t> values)
    : lattice_(std::move(lattice)), eps_(eps), window_(window), values_(std::move(values)) {
  window_.validate();
  if (window_.dim != lattice_.dimension()) throw std::invalid_argument("window and lattice dimensions differ");
  if (!(eps_ > 0.0) || !std::isfinite(eps_)) throw std::invalid_argument("eps must be positive");
  const auto expected = static_cast<std::size_t>(window_.cell_count()) * lattice_.offset_count();
  if (values_.size() != expected) {
    throw std::invalid_argument("spin field has " + std::to_string(values_.size()) + " values, expected " +
                                std::to_string(expected));
  }
  for (const auto v : values_) {
    if (v > 1) throw std::invalid_argument("spin values must be 0 or 1");
  }
}

SpinField SpinField::sample(const TargetSet& set, const PeriodicLattice& lattice, double eps, const Window& window) {
  window.validate();
  if (set.dimension() != lattice.dimension()) throw std::invalid_argument("target set and lattice dimensions differ");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const std::size_t m = lattice.offset_count();
  std::vector<std::uint8_t> values(static_cast<std::size_t>(window.cell_count()) * m);
  const int d = lattice.dimension();
  parallel_for(static_cast<std::size_t>(window.cell_count()), [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      const Site local = window.local_from_linear(static_cast<std::int64_t>(c));
      for (std::size_t a = 0; a < m; ++a) {
        Point y{};
        for (int k = 0; k < d; ++k) {
          y[k] = static_cast<double>(window.origin[k] + local[k]) + lattice.offset(a)[k];
        }
        values[c * m + a] = set.contains_site(y, eps) ? 1 : 0;
      }
    }
  });
  return SpinField(lattice, eps, window, std::move(values));
}

Point SpinField::lattice_coord(const Site& local, std::size_t offset) const {
  Point y{};
  for (int k = 0; k < window_.dim; ++k) {
    y[k] = static_cast<double>(window_.origin[k] + local[k]) + lattice_.offset(offset)[k];
  }
  return y;
}

Point SpinField::position(const Site& local, std::size_t offset) const {
  Point y = lattice_coord(local, offset);
  for (int k = 0; k < window_.dim; ++k) y[k] *= eps_;
  return y;
}

std::int64_t SpinField::ones() const { return std::count(values_.begin(), values_.end(), std::uint8_t{1}); }

SpinField SpinField::flipped() const {
  std::vector<std::uint8_t> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), [](std::uint8_t x) { return std::uint8_t(1 - x); });
  return SpinField(lattice_, eps_, window_, std::move(v));
}

SpinField SpinField::with_toggled(const Site& local, std::size_t offset) const {
  std::vector<std::uint8_t> v = values_;
  auto& x = v.at(static_cast<std::size_t>(window_.linear(local)) * offset_count() + offset);
  x = std::uint8_t(1 - x);
  return SpinField(lattice_, eps_, window_, std::move(v));
}

std::uint8_t interpolate(const SpinField& f, const Point& x) {
  const int d = f.dimension();
  const Window& w = f.window();
  Point y{};
  for (int k = 0; k < d; ++k) {
    if (!std::isfinite(x[k])) throw std::invalid_argument("interpolate needs a finite point");
    y[k] = x[k] / f.eps();
    if (w.periodic(k)) {
      // Bring the point into the window's period so the nearest site is found locally.
      const double period = static_cast<double>(w.extent[k]);
      const double lo = static_cast<double>(w.origin[k]);
      y[k] = lo + std::fmod(std::fmod(y[k] - lo, period) + period, period);
    }
  }
  const auto [cell, offset] = nearest_site(f.lattice(), y);
  const auto local = w.locate(cell);
  if (!local) throw std::invalid_argument("interpolation point lies outside the restricted window");
  return f.at_local(*local, offset);
}

namespace {

template <class F>
void for_sites_in(const SpinField& f, const Box& region, F&& visit) {
  const int d = f.dimension();
  const Window& w = f.window();
  for (std::int64_t c = 0; c < w.cell_count(); ++c) {
    const Site local = w.local_from_linear(c);
    for (std::size_t a = 0; a < f.offset_count(); ++a) {
      const Point x = f.position(local, a);
      bool inside = true;
      for (int k = 0; k < d && inside; ++k) inside = x[k] >= region.lo[k] && x[k] < region.hi[k];
      if (inside) visit(local, a, x);
    }
  }
}

}  // namespace

double window_average(const SpinField& f, const Box& region) {
  std::int64_t total = 0;
  std::int64_t ones = 0;
  for_sites_in(f, region, [&](const Site& local, std::size_t a, const Point&) {
    ++total;
    ones += f.at_local(local, a);
  });
  if (total == 0) throw std::invalid_argument("averaging region contains no site of the window");
  return static_cast<double>(ones) / static_cast<double>(total);
}

double l1_distance(const SpinField& f, const TargetSet& set, const Box& region) {
  std::int64_t diff = 0;
  for_sites_in(f, region, [&](const Site& local, std::size_t a, const Point&) {
    const bool inside = set.contains_site(f.lattice_coord(local, a), f.eps());
    if (static_cast<bool>(f.at_local(local, a)) != inside) ++diff;
  });
  return std::pow(f.eps(), f.dimension()) * static_cast<double>(diff);
}

}  // namespace latgamma
