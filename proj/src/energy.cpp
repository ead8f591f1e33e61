#include <algorithm>
#include <cmath>

#include "latgamma/energy.hpp"
#include "latgamma/parallel.hpp"

namespace latgamma {

CoefficientMask CoefficientMask::perforation(int n) {
  if (n < 2) throw std::invalid_argument("perforation mask needs N >= 2");
  CoefficientMask m;
  m.kind_ = Kind::Perforation;
  m.n_ = n;
  m.name_ = "perforation:" + std::to_string(n);
  return m;
}

CoefficientMask CoefficientMask::custom(Predicate masked, std::string name) {
  if (!masked) throw std::invalid_argument("custom mask needs a predicate");
  CoefficientMask m;
  m.kind_ = Kind::Custom;
  m.pred_ = std::move(masked);
  m.name_ = std::move(name);
  return m;
}

bool CoefficientMask::site_masked(const Point& y, int d) const {
  if (kind_ != Kind::Perforation) return false;
  for (int k = 0; k < d; ++k) {
    if (std::fmod(y[k], static_cast<double>(n_)) != 0.0) return false;
  }
  return true;
}

bool CoefficientMask::masked(const Point& yi, const Point& yj, int d) const {
  switch (kind_) {
    case Kind::Full:
      return false;
    case Kind::Perforation:
      return site_masked(yi, d) || site_masked(yj, d);
    case Kind::Custom:
      return pred_(yi, yj);
  }
  return false;
}

std::string CoefficientMask::describe() const { return name_; }

double snap_ratio(double r) {
  const double nearest = std::round(r);
  if (nearest >= 1.0 && std::abs(r - nearest) <= 1e-9 * nearest) return nearest;
  return r;
}

double EnergyParams::range_ratio() const { return snap_ratio(eta / eps); }

double EnergyParams::prefactor() const {
  const int d = kernel.dimension();
  return std::pow(eps, d - 1) / std::pow(range_ratio(), d + 1);
}

void EnergyParams::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive and finite");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive and finite");
  if (localization) {
    for (int k = 0; k < kernel.dimension(); ++k) {
      if (localization->hi[k] < localization->lo[k]) throw std::invalid_argument("localization box is inverted");
    }
  }
}

std::vector<std::string> EnergyParams::warnings() const {
  std::vector<std::string> out;
  if (!(eps < eta)) out.push_back("eps >= eta: interaction range is below one lattice spacing");
  if (!(eta < 1.0)) out.push_back("eta >= 1");
  if (range_ratio() < 4.0) out.push_back("eta/eps < 4: coarse-graining cubes are sub-site");
  return out;
}

double shift_weight(const Kernel& k, const Point& disp, double range_ratio) {
  const int d = k.dimension();
  if (const auto* b = std::get_if<BallProfile>(&k.profile())) {
    const double rr = b->radius * range_ratio;
    return dot(disp, disp, d) < rr * rr ? k.scale() : 0.0;
  }
  Point x{};
  for (int i = 0; i < d; ++i) x[i] = disp[i] / range_ratio;
  return k.eval(x);
}

std::vector<Shift> enumerate_shifts(const PeriodicLattice& lattice, const Kernel& k, double range_ratio) {
  const int d = lattice.dimension();
  if (k.dimension() != d) throw std::invalid_argument("kernel and lattice dimensions differ");
  if (!(range_ratio > 0.0)) throw std::invalid_argument("range ratio must be positive");
  const double reach = k.support_radius() * range_ratio;
  const auto span = static_cast<std::int64_t>(std::floor(reach)) + 1;
  Site lo{0, 0, 0};
  Site hi{0, 0, 0};
  for (int i = 0; i < d; ++i) {
    lo[i] = -span;
    hi[i] = span;
  }
  const std::size_t m = lattice.offset_count();
  std::vector<Shift> out;
  for (std::int64_t x0 = lo[0]; x0 <= hi[0]; ++x0) {
    for (std::int64_t x1 = lo[1]; x1 <= hi[1]; ++x1) {
      for (std::int64_t x2 = lo[2]; x2 <= hi[2]; ++x2) {
        const Site cell{x0, x1, x2};
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t b = 0; b < m; ++b) {
            Shift s;
            s.cell = cell;
            s.from = a;
            s.to = b;
            for (int i = 0; i < d; ++i) {
              s.disp[i] = static_cast<double>(cell[i]) + lattice.offset(b)[i] - lattice.offset(a)[i];
            }
            const double r2 = dot(s.disp, s.disp, d);
            if (r2 == 0.0 || !(r2 < reach * reach)) continue;
            s.weight = shift_weight(k, s.disp, range_ratio);
            out.push_back(s);
          }
        }
      }
    }
  }
  return out;
}

std::vector<Shift> enumerate_shifts(const PeriodicLattice& lattice, const EnergyParams& p) {
  p.validate();
  return enumerate_shifts(lattice, p.kernel, p.range_ratio());
}

namespace {

void check_compatible(const SpinField& f, const EnergyParams& p) {
  p.validate();
  if (p.kernel.dimension() != f.dimension()) throw std::invalid_argument("kernel and field dimensions differ");
}

// Local target cell of `local + xi`, wrapping periodic axes.
bool shifted(const Window& w, const Site& local, const Site& xi, Site& out) {
  out = {0, 0, 0};
  for (int k = 0; k < w.dim; ++k) {
    std::int64_t x = local[k] + xi[k];
    if (x < 0 || x >= w.extent[k]) {
      if (!w.periodic(k)) return false;
      x %= w.extent[k];
      if (x < 0) x += w.extent[k];
    }
    out[k] = x;
  }
  return true;
}

std::int64_t count_shift(const SpinField& f, const Shift& s, const CoefficientMask& mask,
                         const std::optional<CellBox>& loc) {
  const Window& w = f.window();
  const int d = w.dim;
  std::int64_t n = 0;
  Site t;
  for (std::int64_t c = 0; c < w.cell_count(); ++c) {
    const Site local = w.local_from_linear(c);
    if (loc) {
      Site global{0, 0, 0};
      for (int k = 0; k < d; ++k) global[k] = w.origin[k] + local[k];
      if (!loc->contains(global, d)) continue;
    }
    if (!shifted(w, local, s.cell, t)) continue;
    if (mask.kind() != CoefficientMask::Kind::Full &&
        mask.masked(f.lattice_coord(local, s.from), f.lattice_coord(t, s.to), d)) {
      continue;
    }
    if (f.at(c, s.from) != f.at_local(t, s.to)) ++n;
  }
  return n;
}

}  // namespace

std::int64_t pair_difference_count(const SpinField& f, const Site& xi) {
  if (f.offset_count() != 1) throw std::invalid_argument("integer shifts need a single-offset lattice");
  Shift s;
  s.cell = xi;
  return count_shift(f, s, CoefficientMask::full(), std::nullopt);
}

std::int64_t pair_difference_count(const SpinField& f, const Shift& s, const EnergyParams& p) {
  check_compatible(f, p);
  if (s.from >= f.offset_count() || s.to >= f.offset_count()) throw std::out_of_range("shift offset out of range");
  return count_shift(f, s, p.mask, p.localization);
}

std::vector<std::int64_t> pair_counts_direct(const SpinField& f, const std::vector<Shift>& shifts,
                                             const EnergyParams& p) {
  check_compatible(f, p);
  std::vector<std::int64_t> counts(shifts.size(), 0);
  parallel_for(shifts.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) counts[i] = count_shift(f, shifts[i], p.mask, p.localization);
  });
  return counts;
}

double weighted_energy(const std::vector<Shift>& shifts, const std::vector<std::int64_t>& counts,
                       const EnergyParams& p, int d) {
  if (shifts.size() != counts.size()) throw std::invalid_argument("shift and count lists differ in length");
  std::vector<double> terms(shifts.size());
  for (std::size_t i = 0; i < shifts.size(); ++i) terms[i] = shifts[i].weight * static_cast<double>(counts[i]);
  const double sum = pairwise_sum(terms);
  return sum * std::pow(p.eps, d - 1) / std::pow(p.range_ratio(), d + 1);
}

double energy_direct(const SpinField& f, const EnergyParams& p) {
  check_compatible(f, p);
  auto shifts = enumerate_shifts(f.lattice(), p);
  std::erase_if(shifts, [](const Shift& s) { return s.weight == 0.0; });
  return weighted_energy(shifts, pair_counts_direct(f, shifts, p), p, f.dimension());
}

double energy_fft(const SpinField& f, const EnergyParams& p) {
  check_compatible(f, p);
  auto shifts = enumerate_shifts(f.lattice(), p);
  std::erase_if(shifts, [](const Shift& s) { return s.weight == 0.0; });
  return weighted_energy(shifts, pair_counts_fft(f, shifts, p), p, f.dimension());
}

std::vector<std::string> energy_warnings(const SpinField& f, const EnergyParams& p) {
  check_compatible(f, p);
  auto out = p.warnings();
  const double reach = p.kernel.support_radius() * p.range_ratio();
  const Window& w = f.window();
  for (int k = 0; k < w.dim; ++k) {
    if (!w.periodic(k) && static_cast<double>(w.extent[k]) < reach) {
      out.push_back("restricted axis " + std::to_string(k) + " is shorter than the interaction range; only pairs inside the window are counted");
    }
  }
  return out;
}

}  // namespace latgamma
