#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "latgamma/gammalab.hpp"
#include "latgamma/parallel.hpp"

namespace latgamma {

Schedule Schedule::sqrt_halving(double eps0, int count) {
  if (!(eps0 > 0.0 && eps0 < 1.0)) throw std::invalid_argument("initial eps must lie in (0, 1)");
  if (count < 1) throw std::invalid_argument("schedule needs at least one step");
  Schedule s;
  s.rule = "eta=sqrt(eps),eps-halving";
  double eps = eps0;
  for (int i = 0; i < count; ++i, eps /= 2.0) s.steps.push_back({eps, std::sqrt(eps)});
  s.validate();
  return s;
}

Schedule Schedule::sqrt_ratios(const std::vector<double>& ratios) {
  if (ratios.empty()) throw std::invalid_argument("schedule needs at least one step");
  Schedule s;
  s.rule = "eta=sqrt(eps),integer-ratio";
  for (const double r : ratios) {
    if (!(r > 1.0)) throw std::invalid_argument("eta/eps ratios must exceed 1");
    s.steps.push_back({1.0 / (r * r), 1.0 / r});
  }
  s.validate();
  return s;
}

Schedule Schedule::explicit_steps(std::vector<ScheduleStep> steps) {
  Schedule s;
  s.steps = std::move(steps);
  s.rule = "explicit";
  s.validate();
  return s;
}

void Schedule::validate() const {
  if (steps.empty()) throw std::invalid_argument("schedule is empty");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& st = steps[i];
    if (!(st.eps > 0.0) || !(st.eta > 0.0) || !std::isfinite(st.eps) || !std::isfinite(st.eta)) {
      throw std::invalid_argument("schedule step " + std::to_string(i) + " has a non-positive scale");
    }
    if (i == 0) continue;
    const auto& prev = steps[i - 1];
    if (!(st.eps < prev.eps)) throw std::invalid_argument("schedule eps must be strictly decreasing");
    if (st.eta > prev.eta) throw std::invalid_argument("schedule eta must not increase");
    if (st.eps / st.eta > prev.eps / prev.eta) throw std::invalid_argument("schedule eps/eta must not increase");
  }
}

double riemann_phi(const Kernel& k, const Point& nu, double h) {
  const int d = k.dimension();
  if (!(h > 0.0) || h > k.support_radius()) throw std::invalid_argument("riemann_phi needs 0 < h <= support radius");
  if (std::abs(norm(nu, d) - 1.0) > 1e-12) throw std::invalid_argument("riemann_phi needs a unit direction");
  const double R = snap_ratio(1.0 / h);
  const auto shifts = enumerate_shifts(PeriodicLattice::cubic(d), k, R);
  std::vector<double> terms(shifts.size());
  for (std::size_t i = 0; i < shifts.size(); ++i) terms[i] = shifts[i].weight * std::abs(dot(shifts[i].disp, nu, d));
  return pairwise_sum(terms) / std::pow(R, d + 1);
}

Target phi_target(const Kernel& k, const Point& nu) {
  if (const auto c = closed_form_phi(k)) return {*c, "closed-form"};
  return {phi(k, nu), "quadrature"};
}

Site rational_direction(const Point& nu, int d, int bound) {
  check_dimension(d);
  if (bound < 1) throw std::invalid_argument("direction bound must be positive");
  const Point u = normalized(nu, d);
  double amax = 0.0;
  for (int i = 0; i < d; ++i) amax = std::max(amax, std::abs(u[i]));
  Site best{0, 0, 0};
  double best_err = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= bound; ++m) {
    Site n{0, 0, 0};
    std::int64_t g = 0;
    for (int i = 0; i < d; ++i) {
      n[i] = std::llround(u[i] / amax * m);
      g = std::gcd(g, std::abs(n[i]));
    }
    Point v{};
    for (int i = 0; i < d; ++i) {
      n[i] /= g;
      v[i] = static_cast<double>(n[i]);
    }
    const double err = 1.0 - dot(normalized(v, d), u, d);
    if (err < best_err - 1e-15) {
      best_err = err;
      best = n;
    }
    if (best_err < 1e-13) break;
  }
  return best;
}

namespace {

std::int64_t round_up(std::int64_t x, std::int64_t m) { return (x + m - 1) / m * m; }

std::int64_t cells_for(double length_in_eta, double R) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(length_in_eta * R - 1e-9)));
}

Point to_unit(const Site& n, int d) {
  Point v{};
  for (int i = 0; i < d; ++i) v[i] = static_cast<double>(n[i]);
  return normalized(v, d);
}

double relative_error(double value, const Target& t) {
  if (t.value == 0.0) return std::abs(value);
  return (value - t.value) / t.value;
}

void attach_coarse(StepRecord& rec, const SpinField& f, const EnergyParams& p, double delta) {
  const auto cg = classify(f, CoarseGrainParams::from(p, delta));
  rec.cube_side = cg.side;
  rec.mixed_count = cg.mixed;
  rec.phase1_count = cg.phase1;
  rec.phase0_count = cg.phase0;
  rec.interface_cubes = cg.interface_cubes;
  rec.mixed_measure = cg.mixed_measure;
  rec.mixed_boundary = cg.mixed_boundary;
  rec.k1_perimeter = cg.k1_perimeter;
  rec.warnings.insert(rec.warnings.end(), cg.warnings.begin(), cg.warnings.end());
}

double evaluate(const SpinField& f, const EnergyParams& p, EnergyMethod m) {
  return m == EnergyMethod::Fft ? energy_fft(f, p) : energy_direct(f, p);
}

void finish(ConvergenceReport& r) {
  std::size_t usable = 0;
  for (const auto& rec : r.records) usable += std::abs(rec.rel_error) > 0.0 && std::isfinite(rec.rel_error);
  if (usable >= 3) {
    try {
      r.rate = fit_rate(r);
    } catch (const std::invalid_argument&) {
      r.rate.reset();
    }
  }
}

}  // namespace

ConvergenceReport halfspace_experiment(const Kernel& k, const Point& nu, const Schedule& s,
                                       const HalfspaceOptions& opt) {
  s.validate();
  const int d = k.dimension();
  if (std::abs(norm(nu, d) - 1.0) > 1e-12) throw std::invalid_argument("half-space normal must be a unit vector");
  if (opt.substitute && opt.substitute->dimension() != d) {
    throw std::invalid_argument("substitute set has the wrong dimension");
  }
  const Site n = rational_direction(nu, d);
  const Point nu_sim = to_unit(n, d);
  int nonzero = 0;
  int axis = 0;
  for (int i = 0; i < d; ++i) {
    if (n[i] != 0) ++nonzero;
    if (std::abs(n[i]) > std::abs(n[axis])) axis = i;
  }
  const bool aligned = nonzero == 1;
  const std::int64_t nk = std::abs(n[axis]);
  double nnorm = 0.0;
  for (int i = 0; i < d; ++i) nnorm += static_cast<double>(n[i] * n[i]);
  nnorm = std::sqrt(nnorm);

  ConvergenceReport r;
  r.experiment = "halfspace";
  r.kernel = k.describe();
  r.dimension = d;
  r.direction.assign(nu_sim.begin(), nu_sim.begin() + d);
  r.schedule_rule = s.rule;
  r.target = phi_target(k, nu_sim);
  if (1.0 - dot(nu_sim, nu, d) > 1e-12) {
    r.notes.push_back("direction replaced by the nearest rational direction");
  }
  if (opt.substitute) r.notes.push_back("sampled set: " + opt.substitute->describe());

  for (const auto& st : s.steps) {
    EnergyParams p(st.eps, st.eta, k);
    const double R = p.range_ratio();
    const std::int64_t side = std::max<std::int64_t>(1, std::llround(R / 4.0));
    const std::int64_t half = side / 2;
    const auto reach = static_cast<std::int64_t>(std::ceil(k.support_radius() * R));
    const std::int64_t normal_cells = cells_for(opt.normal_side_eta, R);
    const std::int64_t tangential_cells =
        opt.tangential_side > 0.0 ? cells_for(opt.tangential_side / st.eta, R) : normal_cells;

    Window w;
    w.dim = d;
    double measure = 1.0;
    if (aligned) {
      // Cube-aligned window: restricted along the normal, periodic across it.
      const std::int64_t H = round_up(std::max((normal_cells + 1) / 2, reach + 1), side);
      for (int i = 0; i < d; ++i) {
        if (i == axis) {
          w.origin[i] = -H - half;
          w.extent[i] = 2 * H;
          w.boundary[i] = Boundary::Restricted;
        } else {
          const std::int64_t T = round_up(tangential_cells, side);
          w.origin[i] = -half;
          w.extent[i] = T;
          w.boundary[i] = Boundary::Periodic;
          measure *= static_cast<double>(T) * st.eps;
        }
      }
    } else {
      // Oblique: restricted box, energy localized to a band U whose tangential
      // sides are multiples of |n_axis| so every residue class is hit equally.
      CellBox U;
      double cmin = 0.0;
      double cmax = 0.0;
      for (int i = 0; i < d; ++i) {
        if (i == axis) continue;
        const std::int64_t Ht = round_up(tangential_cells, nk);
        w.origin[i] = -reach;
        w.extent[i] = Ht + 2 * reach;
        w.boundary[i] = Boundary::Restricted;
        U.lo[i] = 0;
        U.hi[i] = Ht;
        measure *= static_cast<double>(Ht) * st.eps;
        const double a = -static_cast<double>(n[i]) / static_cast<double>(n[axis]);
        const double lo = a * static_cast<double>(w.origin[i]);
        const double hi = a * static_cast<double>(w.origin[i] + w.extent[i]);
        cmin += std::min(lo, hi);
        cmax += std::max(lo, hi);
      }
      measure *= nnorm / static_cast<double>(nk);
      const auto margin = static_cast<std::int64_t>(std::ceil(static_cast<double>(reach) * nnorm / static_cast<double>(nk))) + 1;
      std::int64_t lo = static_cast<std::int64_t>(std::floor(cmin)) - margin;
      std::int64_t hi = static_cast<std::int64_t>(std::ceil(cmax)) + margin + 1;
      if (hi - lo < normal_cells) {
        const std::int64_t grow = (normal_cells - (hi - lo) + 1) / 2;
        lo -= grow;
        hi += grow;
      }
      w.origin[axis] = lo;
      w.extent[axis] = hi - lo;
      w.boundary[axis] = Boundary::Restricted;
      U.lo[axis] = lo;
      U.hi[axis] = hi;
      p.localization = U;
    }
    w.validate();

    const PeriodicLattice lattice = PeriodicLattice::cubic(d);
    std::optional<SpinField> field;
    if (opt.substitute) {
      field.emplace(SpinField::sample(*opt.substitute, lattice, st.eps, w));
    } else {
      // Integer normal keeps sites on the hyperplane exactly outside the set.
      std::vector<std::uint8_t> values(static_cast<std::size_t>(w.cell_count()));
      for (std::int64_t c = 0; c < w.cell_count(); ++c) {
        const Site local = w.local_from_linear(c);
        std::int64_t proj = 0;
        for (int i = 0; i < d; ++i) proj += n[i] * (w.origin[i] + local[i]);
        values[static_cast<std::size_t>(c)] = proj < 0 ? 1 : 0;
      }
      field.emplace(lattice, st.eps, w, std::move(values));
    }
    const SpinField& f = *field;

    StepRecord rec;
    rec.eps = st.eps;
    rec.eta = st.eta;
    rec.range_ratio = R;
    rec.window_extent = w.extent;
    rec.interface_measure = measure;
    rec.warnings = energy_warnings(f, p);
    rec.energy = evaluate(f, p, opt.method);
    rec.normalized = rec.energy / measure;
    rec.rel_error = relative_error(rec.normalized, r.target);
    if (opt.line_bound) rec.line_bound = line_jump_lower_bound(f, p);
    attach_coarse(rec, f, p, opt.delta);
    r.records.push_back(std::move(rec));
  }
  r.absolute_error = r.target.value == 0.0;
  finish(r);
  return r;
}

ConvergenceReport polytope_experiment(const Kernel& k, const TargetSet& A, const Schedule& s,
                                      const PolytopeOptions& opt) {
  s.validate();
  const int d = k.dimension();
  if (A.dimension() != d) throw std::invalid_argument("polytope and kernel dimensions differ");
  if (!A.is_polytope()) throw std::invalid_argument("polytope_experiment needs a polytope target");
  const double min_margin = 1.0 + k.support_radius();
  const double margin_eta = opt.margin_eta > 0.0 ? opt.margin_eta : min_margin;
  if (margin_eta < min_margin) {
    throw std::invalid_argument("polytope margin " + format_real(margin_eta) + " eta is below 1 + support = " +
                                format_real(min_margin));
  }

  ConvergenceReport r;
  r.experiment = "polytope";
  r.kernel = k.describe();
  r.dimension = d;
  r.schedule_rule = s.rule;
  const auto faces = A.faces();
  if (const auto sigma = closed_form_phi(k)) {
    double perimeter = 0.0;
    for (const auto& fc : faces) perimeter += fc.measure;
    r.target = {*sigma * perimeter, "closed-form"};
  } else {
    std::vector<double> parts;
    for (const auto& fc : faces) parts.push_back(fc.measure * phi(k, fc.normal));
    r.target = {pairwise_sum(parts), "quadrature"};
  }
  r.absolute_error = r.target.value == 0.0;
  r.notes.push_back("target set: " + A.describe());
  const Box bb = A.bounding_box();

  for (const auto& st : s.steps) {
    const EnergyParams p(st.eps, st.eta, k);
    const double margin = margin_eta * st.eta;
    Site lo{0, 0, 0};
    Site ext{1, 1, 1};
    for (int i = 0; i < d; ++i) {
      lo[i] = static_cast<std::int64_t>(std::floor((bb.lo[i] - margin) / st.eps));
      const auto hi = static_cast<std::int64_t>(std::ceil((bb.hi[i] + margin) / st.eps)) + 1;
      ext[i] = hi - lo[i];
    }
    const Window w = Window::make(d, lo, ext, Boundary::Restricted);
    const SpinField f = SpinField::sample(A, PeriodicLattice::cubic(d), st.eps, w);

    StepRecord rec;
    rec.eps = st.eps;
    rec.eta = st.eta;
    rec.range_ratio = p.range_ratio();
    rec.window_extent = w.extent;
    rec.interface_measure = r.target.value;
    rec.warnings = energy_warnings(f, p);
    rec.energy = evaluate(f, p, opt.method);
    rec.normalized = rec.energy;
    rec.rel_error = relative_error(rec.energy, r.target);
    attach_coarse(rec, f, p, opt.delta);
    r.records.push_back(std::move(rec));
  }
  finish(r);
  return r;
}

ConvergenceReport perforation_counterexample(int n, int d, const Kernel& k, const Schedule& s,
                                             const CounterexampleOptions& opt) {
  s.validate();
  check_dimension(d);
  if (n < 2) throw std::invalid_argument("perforation period N must be at least 2");
  if (k.dimension() != d) throw std::invalid_argument("kernel dimension differs from the requested dimension");

  ConvergenceReport r;
  r.experiment = "counterexample";
  r.kernel = k.describe();
  r.dimension = d;
  r.schedule_rule = s.rule;
  r.target = {0.0, "closed-form"};
  r.absolute_error = true;
  std::int64_t nd = 1;
  for (int i = 0; i < d; ++i) nd *= n;
  const double expected = static_cast<double>(nd - 1) / static_cast<double>(nd);
  r.notes.push_back("expected box average " + format_real(expected));
  r.notes.push_back("masked coefficients: perforation:" + std::to_string(n));

  const TargetSet set = TargetSet::perforated(d, n);
  for (const auto& st : s.steps) {
    EnergyParams p(st.eps, st.eta, k);
    const double R = p.range_ratio();
    const std::int64_t side = std::max<std::int64_t>(1, std::llround(R / 4.0));
    // Period: a multiple of 2N (so the window halves are whole periods) and of the cube side.
    const std::int64_t base = std::lcm<std::int64_t>(2 * n, side);
    const std::int64_t E = base * std::max<std::int64_t>(1, (cells_for(opt.window_side_eta, R) + base - 1) / base);
    const Window w = Window::make(d, {0, 0, 0}, {E, E, E}, Boundary::Periodic);
    const SpinField f = SpinField::sample(set, PeriodicLattice::cubic(d), st.eps, w);

    StepRecord rec;
    rec.eps = st.eps;
    rec.eta = st.eta;
    rec.range_ratio = R;
    rec.window_extent = w.extent;
    rec.unmasked_energy = energy_fft(f, p);
    EnergyParams masked = p;
    masked.mask = CoefficientMask::perforation(n);
    rec.energy = energy_fft(f, masked);
    rec.normalized = rec.energy;
    rec.rel_error = std::abs(rec.energy);
    rec.warnings = energy_warnings(f, p);
    const std::int64_t half = E / 2;
    const std::int64_t boxes = std::int64_t{1} << d;
    for (std::int64_t b = 0; b < boxes; ++b) {
      Box box;
      for (int i = 0; i < d; ++i) {
        const std::int64_t j = (b >> (d - 1 - i)) & 1;
        box.lo[i] = static_cast<double>(j * half) * st.eps;
        box.hi[i] = static_cast<double>((j + 1) * half) * st.eps;
      }
      rec.box_averages.push_back(window_average(f, box));
    }
    attach_coarse(rec, f, p, opt.delta);
    r.records.push_back(std::move(rec));
  }
  return r;
}

double fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit needs paired samples");
  if (x.size() < 3) throw std::invalid_argument("fit needs at least 3 points");
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("log-log fit needs positive samples");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = pairwise_sum(lx) / static_cast<double>(lx.size());
  const double my = pairwise_sum(ly) / static_cast<double>(ly.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("log-log fit needs distinct abscissae");
  return sxy / sxx;
}

double fit_rate(const ConvergenceReport& r) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& rec : r.records) {
    const double e = std::abs(rec.rel_error);
    if (!(e > 0.0) || !std::isfinite(e)) continue;
    x.push_back(1.0 / rec.range_ratio);
    y.push_back(e);
  }
  if (x.size() < 3) throw std::invalid_argument("fit_rate needs at least 3 steps with positive error");
  return fit_loglog(x, y);
}

}  // namespace latgamma
