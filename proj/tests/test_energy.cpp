#include <doctest.h>

#include <functional>
#include <optional>
#include <random>
#include <set>

#include "latgamma/energy.hpp"
#include "oracle.hpp"

using namespace latgamma;

namespace {

Window win1(std::int64_t origin, std::int64_t extent, Boundary b = Boundary::Restricted) {
  return Window::make(1, {origin, 0, 0}, {extent, 1, 1}, b);
}

SpinField half_line(double eps, std::int64_t origin, std::int64_t extent) {
  return SpinField::sample(TargetSet::half_space(1, Point{1, 0, 0}, 0.0), PeriodicLattice::cubic(1), eps,
                           win1(origin, extent));
}

// Energy straight from the pair oracle: prefactor * sum a(disp/R) * count.
double oracle_energy(const SpinField& f, const EnergyParams& p,
                     const std::function<bool(const Point&, const Point&)>& masked = nullptr) {
  const int d = f.dimension();
  const double R = p.range_ratio();
  const auto counts = oracle::pair_counts(f, p.kernel.support_radius() * R, masked, p.localization);
  double s = 0.0;
  for (const auto& [key, n] : counts) {
    const auto [x0, x1, x2, a, b] = key;
    Point x{};
    const std::int64_t xs[3] = {x0, x1, x2};
    for (int k = 0; k < d; ++k) {
      x[k] = (static_cast<double>(xs[k]) + f.lattice().offset(b)[k] - f.lattice().offset(a)[k]) / R;
    }
    s += p.kernel.eval(x) * static_cast<double>(n);
  }
  return s * std::pow(p.eps, d - 1) / std::pow(R, d + 1);
}

void check_counts_match(const SpinField& f, const EnergyParams& p) {
  const auto shifts = enumerate_shifts(f.lattice(), p);
  const auto fft = pair_counts_fft(f, shifts, p);
  const auto direct = pair_counts_direct(f, shifts, p);
  std::function<bool(const Point&, const Point&)> masked;
  if (p.mask.kind() != CoefficientMask::Kind::Full) {
    masked = [&](const Point& a, const Point& b) { return p.mask.masked(a, b, f.dimension()); };
  }
  const auto ref = oracle::pair_counts(f, p.kernel.support_radius() * p.range_ratio(), masked, p.localization);
  std::set<oracle::Key> seen;
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    const auto& s = shifts[i];
    const oracle::Key key{s.cell[0], s.cell[1], s.cell[2], s.from, s.to};
    seen.insert(key);
    const auto it = ref.find(key);
    const std::int64_t expect = it == ref.end() ? 0 : it->second;
    CHECK(fft[i] == expect);
    CHECK(direct[i] == expect);
  }
  for (const auto& [key, n] : ref) {
    if (n > 0) CHECK(seen.count(key) == 1);
  }
}

}  // namespace

TEST_CASE("prefactor and range ratio") {
  const EnergyParams p(1e-3, 0.1, Kernel::ball(2));
  CHECK(p.range_ratio() == 100.0);
  CHECK(p.prefactor() == doctest::Approx(std::pow(1e-3, 4) / std::pow(0.1, 3)).epsilon(1e-12));
  const EnergyParams q(0.3, 1.0, Kernel::ball(2));
  CHECK(q.range_ratio() == doctest::Approx(1.0 / 0.3));
  CHECK_FALSE(q.warnings().empty());
  CHECK(EnergyParams(1.0 / 4096, 1.0 / 64, Kernel::ball(2)).warnings().empty());
  CHECK_THROWS_AS(EnergyParams(0.0, 0.1, Kernel::ball(2)).validate(), std::invalid_argument);
}

TEST_CASE("shift enumeration uses the open ball") {
  const auto s = enumerate_shifts(PeriodicLattice::cubic(1), Kernel::ball(1), 4.0);
  CHECK(s.size() == 6);  // -3..3 without 0
  const auto s2 = enumerate_shifts(PeriodicLattice::cubic(2), Kernel::ball(2), 2.0);
  // |xi|^2 < 4: (0,+-1), (+-1,0), (+-1,+-1)
  CHECK(s2.size() == 8);
  const PeriodicLattice two(2, {Point{0, 0, 0}, Point{0.5, 0.5, 0}});
  for (const auto& sh : enumerate_shifts(two, Kernel::ball(2), 1.0)) {
    CHECK(dot(sh.disp, sh.disp, 2) < 1.0);
    CHECK(dot(sh.disp, sh.disp, 2) > 0.0);
  }
}

TEST_CASE("pair difference counts") {
  const SpinField ones(PeriodicLattice::cubic(1), 0.1, win1(0, 10), std::vector<std::uint8_t>(10, 1));
  CHECK(pair_difference_count(ones, Site{3, 0, 0}) == 0);
  const auto h = half_line(0.1, -10, 20);
  CHECK(pair_difference_count(h, Site{3, 0, 0}) == 3);
  CHECK(pair_difference_count(h, Site{-3, 0, 0}) == 3);
  std::vector<std::uint8_t> cb(12);
  for (std::size_t i = 0; i < cb.size(); ++i) cb[i] = i % 2;
  const SpinField checker(PeriodicLattice::cubic(1), 0.1, win1(0, 12, Boundary::Periodic), cb);
  CHECK(pair_difference_count(checker, Site{1, 0, 0}) == 12);
  CHECK(pair_difference_count(checker, Site{2, 0, 0}) == 0);
}

TEST_CASE("one-dimensional closed form") {
  for (const int R : {3, 7, 100}) {
    const double eps = 1e-4;
    const EnergyParams p(eps, eps * R, Kernel::ball(1));
    const auto f = half_line(eps, -3 * R, 6 * R);
    const int M = R - 1;
    const double closed = static_cast<double>(M) * (M + 1) / (static_cast<double>(R) * R);
    CHECK(energy_direct(f, p) == doctest::Approx(closed).epsilon(1e-14));
    CHECK(energy_fft(f, p) == energy_direct(f, p));
    if (R < 10) CHECK(oracle_energy(f, p) == doctest::Approx(closed).epsilon(1e-14));
  }
  const EnergyParams p(1e-4, 1e-2, Kernel::ball(1));
  CHECK(energy_direct(half_line(1e-4, -300, 600), p) == 0.99);
}

TEST_CASE("FFT counts equal brute-force pair counts") {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = trial % 3 == 2 ? 3 : 2;
    const std::int64_t n = d == 2 ? 5 + trial : 4 + trial / 3;
    Window w = Window::make(d, {-2, 1, 0}, {n, n + 1, d == 3 ? n - 1 : 1}, Boundary::Restricted);
    for (int k = 0; k < d; ++k) w.boundary[k] = (trial >> k) & 1 ? Boundary::Periodic : Boundary::Restricted;
    const auto f = oracle::random_field(rng, PeriodicLattice::cubic(d), 0.01, w, 0.3 + 0.05 * trial);
    const EnergyParams p(0.01, 0.01 * (1.5 + 0.4 * trial), Kernel::ball(d));
    check_counts_match(f, p);
  }
}

TEST_CASE("FFT counts with offsets, masks and localization") {
  std::mt19937_64 rng(99);
  const PeriodicLattice two(2, {Point{0, 0, 0}, Point{0.5, 0.5, 0}});
  Window w = Window::make(2, {0, 0, 0}, {8, 6, 1}, Boundary::Restricted);
  w.boundary[0] = Boundary::Periodic;
  const auto f = oracle::random_field(rng, two, 0.1, w);
  EnergyParams p(0.1, 0.25, Kernel::ball(2));
  check_counts_match(f, p);
  p.localization = CellBox{Site{2, 1, 0}, Site{6, 4, 1}};
  check_counts_match(f, p);

  const auto g = oracle::random_field(rng, PeriodicLattice::cubic(2), 0.1,
                                      Window::make(2, {0, 0, 0}, {12, 9, 1}, Boundary::Periodic));
  EnergyParams q(0.1, 0.3, Kernel::ball(2));
  q.mask = CoefficientMask::perforation(3);
  check_counts_match(g, q);
  CHECK(energy_fft(g, q) == doctest::Approx(oracle_energy(g, q, [&](const Point& a, const Point& b) {
                                                return q.mask.masked(a, b, 2);
                                              })).epsilon(1e-12));
}

TEST_CASE("custom masks run on the direct path only") {
  std::mt19937_64 rng(5);
  const auto f = oracle::random_field(rng, PeriodicLattice::cubic(2), 0.1,
                                      Window::make(2, {0, 0, 0}, {7, 7, 1}, Boundary::Restricted));
  EnergyParams p(0.1, 0.3, Kernel::ball(2));
  const auto pred = [](const Point& a, const Point& b) { return a[0] + b[1] > 6.0; };
  p.mask = CoefficientMask::custom(pred, "diag");
  CHECK_THROWS_AS(energy_fft(f, p), std::invalid_argument);
  CHECK(energy_direct(f, p) == doctest::Approx(oracle_energy(f, p, pred)).epsilon(1e-12));
}

TEST_CASE("single occupied site") {
  const auto w = Window::make(2, {0, 0, 0}, {16, 16, 1}, Boundary::Periodic);
  std::vector<std::uint8_t> v(256, 0);
  v[5 * 16 + 7] = 1;
  const SpinField f(PeriodicLattice::cubic(2), 0.01, w, v);
  const EnergyParams p(0.01, 0.05, Kernel::ball(2));
  const auto shifts = enumerate_shifts(f.lattice(), p);
  const auto counts = pair_counts_fft(f, shifts, p);
  double wsum = 0.0;
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    CHECK(counts[i] == 2);
    wsum += shifts[i].weight;
  }
  CHECK(energy_fft(f, p) == doctest::Approx(p.prefactor() * 2.0 * wsum).epsilon(1e-14));
}

TEST_CASE("perforation coefficients") {
  const auto w = Window::make(2, {0, 0, 0}, {12, 12, 1}, Boundary::Periodic);
  const auto f = SpinField::sample(TargetSet::perforated(2, 2), PeriodicLattice::cubic(2), 0.05, w);
  EnergyParams p(0.05, 0.2, Kernel::ball(2));
  const double full = energy_fft(f, p);
  CHECK(full > 0.0);
  CHECK(energy_direct(f, p) == full);
  p.mask = CoefficientMask::perforation(2);
  CHECK(energy_fft(f, p) == 0.0);
  CHECK(energy_direct(f, p) == 0.0);
  const SpinField ones(PeriodicLattice::cubic(2), 0.05, w, std::vector<std::uint8_t>(144, 1));
  CHECK(energy_fft(ones, p) == 0.0);
  CHECK_THROWS_AS(CoefficientMask::perforation(1), std::invalid_argument);
}

TEST_CASE("energy symmetries") {
  std::mt19937_64 rng(17);
  const auto w = Window::make(2, {-8, -8, 0}, {20, 16, 1}, Boundary::Restricted);
  const auto f = oracle::random_field(rng, PeriodicLattice::cubic(2), 0.02, w);
  const EnergyParams p(0.02, 0.08, Kernel::exponential(2, 1.0, 1.0));
  const double e = energy_fft(f, p);
  CHECK(energy_fft(f.flipped(), p) == e);
  CHECK(energy_direct(f, p) == e);

  EnergyParams left = p;
  EnergyParams right = p;
  EnergyParams both = p;
  left.localization = CellBox{Site{-8, -8, 0}, Site{0, 8, 1}};
  right.localization = CellBox{Site{0, -8, 0}, Site{12, 8, 1}};
  both.localization = CellBox{Site{-8, -8, 0}, Site{12, 8, 1}};
  CHECK(energy_direct(f, left) + energy_direct(f, right) == doctest::Approx(energy_direct(f, both)).epsilon(1e-13));
  CHECK(energy_direct(f, both) == doctest::Approx(e).epsilon(1e-13));

  const EnergyParams ball(0.02, 0.08, Kernel::ball(2));
  for (const double t : {2.0, 0.5, 4.0}) {
    EnergyParams scaled(0.02, 0.08, Kernel::ball(2).scaled(t));
    CHECK(energy_fft(f, scaled) == t * energy_fft(f, ball));
  }
}

TEST_CASE("line jumps") {
  const auto h = half_line(0.1, -10, 20);
  CHECK(count_line_jumps(h, Site{1, 0, 0}, Site{4, 0, 0}) == 1);
  CHECK(count_line_jumps(h, Site{3, 0, 0}, Site{2, 0, 0}) == 1);
  const SpinField ones(PeriodicLattice::cubic(1), 0.1, win1(0, 9), std::vector<std::uint8_t>(9, 1));
  CHECK(count_line_jumps(ones, Site{1, 0, 0}, Site{0, 0, 0}) == 0);
  std::vector<std::uint8_t> cb(9);
  for (std::size_t i = 0; i < cb.size(); ++i) cb[i] = i % 2;
  const SpinField checker(PeriodicLattice::cubic(1), 0.1, win1(0, 9), cb);
  CHECK(count_line_jumps(checker, Site{1, 0, 0}, Site{4, 0, 0}) == 8);
  CHECK_THROWS_AS(count_line_jumps(checker, Site{0, 0, 0}, Site{4, 0, 0}), std::invalid_argument);
}

TEST_CASE("line-jump lower bound") {
  for (const int R : {4, 9, 30}) {
    const double eps = 0.001;
    const EnergyParams p(eps, eps * R, Kernel::ball(1));
    const auto f = half_line(eps, -2 * R, 4 * R);
    double closed = 0.0;
    for (int x = 1; x < R; ++x) closed += 2.0 * x;
    closed /= static_cast<double>(R) * R;
    CHECK(line_jump_lower_bound(f, p) <= energy_direct(f, p));
    CHECK(line_jump_lower_bound(f, p) == doctest::Approx(closed).epsilon(1e-14));
  }
  std::mt19937_64 rng(8);
  for (int t = 0; t < 4; ++t) {
    Window w = Window::make(2, {0, 0, 0}, {14, 11, 1}, Boundary::Restricted);
    if (t % 2) w.boundary[1] = Boundary::Periodic;
    const auto f = oracle::random_field(rng, PeriodicLattice::cubic(2), 0.05, w);
    EnergyParams p(0.05, 0.2, Kernel::ball(2));
    if (t >= 2) p.localization = CellBox{Site{2, 2, 0}, Site{9, 8, 1}};
    CHECK(line_jump_lower_bound(f, p) <= energy_direct(f, p));
  }
}

// Lines of direction xi as union-find classes; a class counts when one of its
// cells c (inside `box` if given) differs from c + xi.
std::int64_t oracle_lines(const SpinField& f, const Site& xi, const std::optional<CellBox>& box) {
  const Window& w = f.window();
  const auto n = static_cast<std::size_t>(w.cell_count());
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  const std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = find(parent[i]);
  };
  std::vector<std::optional<std::size_t>> succ(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Site c = w.local_from_linear(static_cast<std::int64_t>(i));
    Site g{0, 0, 0};
    for (int k = 0; k < w.dim; ++k) g[k] = w.origin[k] + c[k] + xi[k];
    if (const auto loc = w.locate(g)) {
      succ[i] = static_cast<std::size_t>(w.linear(*loc));
      parent[find(i)] = find(*succ[i]);
    }
  }
  std::set<std::size_t> jumped;
  for (std::size_t i = 0; i < n; ++i) {
    if (!succ[i]) continue;
    const Site c = w.local_from_linear(static_cast<std::int64_t>(i));
    Site g{0, 0, 0};
    for (int k = 0; k < w.dim; ++k) g[k] = w.origin[k] + c[k];
    if (box && !box->contains(g, w.dim)) continue;
    if (f.values()[i] != f.values()[*succ[i]]) jumped.insert(find(i));
  }
  return static_cast<std::int64_t>(jumped.size());
}

TEST_CASE("line-jump bound against union-find line classes") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 12; ++t) {
    const int d = t % 3 == 2 ? 3 : 2;
    Window w = Window::make(d, {-2, 3, 1}, {9 + t % 4, 7 + t % 3, d == 3 ? 6 : 1}, Boundary::Restricted);
    for (int k = 0; k < d; ++k) {
      if ((t >> k) & 1) w.boundary[static_cast<std::size_t>(k)] = Boundary::Periodic;
    }
    const auto f = oracle::random_field(rng, PeriodicLattice::cubic(d), 0.1, w, 0.15 + 0.05 * t);
    const int R = 3;
    EnergyParams p(0.1, 0.1 * R, Kernel::ball(d));
    if (t % 2) p.localization = CellBox{Site{-1, 4, 2}, Site{5, 8, 4}};
    std::int64_t total = 0;
    for (std::int64_t a = -R; a <= R; ++a) {
      for (std::int64_t b = -R; b <= R; ++b) {
        for (std::int64_t c = d == 3 ? -R : 0; c <= (d == 3 ? R : 0); ++c) {
          const std::int64_t r2 = a * a + b * b + c * c;
          if (r2 == 0 || r2 >= R * R) continue;
          total += oracle_lines(f, Site{a, b, c}, p.localization);
        }
      }
    }
    const double expected = static_cast<double>(total) * std::pow(0.1, d - 1) / std::pow(R, d + 1);
    CHECK(line_jump_lower_bound(f, p) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("energy warnings") {
  const auto f = half_line(0.01, -5, 10);
  const EnergyParams p(0.01, 0.5, Kernel::ball(1));
  bool found = false;
  for (const auto& w : energy_warnings(f, p)) found = found || w.find("shorter") != std::string::npos;
  CHECK(found);
}
