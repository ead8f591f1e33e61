#include <doctest.h>

#include <random>
#include <sstream>

#include "latgamma/field.hpp"
#include "oracle.hpp"

using namespace latgamma;

namespace {

Window win1(std::int64_t origin, std::int64_t extent, Boundary b = Boundary::Restricted) {
  return Window::make(1, {origin, 0, 0}, {extent, 1, 1}, b);
}

std::vector<int> as_ints(const SpinField& f) { return {f.values().begin(), f.values().end()}; }

}  // namespace

TEST_CASE("sampling a half-line") {
  const auto f = SpinField::sample(TargetSet::half_space(1, Point{1, 0, 0}, 0.0), PeriodicLattice::cubic(1), 0.5,
                                   win1(-2, 4));
  // sites -1, -0.5, 0, 0.5 lie in {x < 0} only for the first two
  CHECK(as_ints(f) == std::vector<int>{1, 1, 0, 0});
  const auto g = SpinField::sample(TargetSet::half_space(1, Point{1, 0, 0}, 0.0).complement(),
                                   PeriodicLattice::cubic(1), 0.5, win1(-2, 4));
  CHECK(as_ints(g) == std::vector<int>{0, 0, 1, 1});
  const auto h = SpinField::sample(TargetSet::half_space(1, Point{-1, 0, 0}, 0.0), PeriodicLattice::cubic(1), 0.5,
                                   win1(-2, 4));
  CHECK(as_ints(h) == std::vector<int>{0, 0, 0, 1});
}

TEST_CASE("perforated sampling") {
  const auto w = Window::make(2, {0, 0, 0}, {4, 4, 1}, Boundary::Periodic);
  const auto f = SpinField::sample(TargetSet::perforated(2, 2), PeriodicLattice::cubic(2), 1.0, w);
  CHECK(f.ones() == 12);
  for (std::int64_t i = 0; i < 4; ++i) {
    for (std::int64_t j = 0; j < 4; ++j) CHECK(f.at_local({i, j, 0}) == ((i % 2 == 0 && j % 2 == 0) ? 0 : 1));
  }
  CHECK_THROWS_AS(TargetSet::perforated(2, 1), std::invalid_argument);
  const auto all = SpinField::sample(TargetSet::whole(2), PeriodicLattice::cubic(2), 0.1, w);
  CHECK(all.ones() == 16);
}

TEST_CASE("interpolation") {
  const SpinField f(PeriodicLattice::cubic(1), 1.0, win1(0, 2), {0, 1});
  CHECK(interpolate(f, Point{0.0, 0, 0}) == 0);
  CHECK(interpolate(f, Point{1.0, 0, 0}) == 1);
  CHECK(interpolate(f, Point{0.49, 0, 0}) == 0);
  CHECK(interpolate(f, Point{0.5, 0, 0}) == 0);
  CHECK(interpolate(f, Point{0.51, 0, 0}) == 1);
  CHECK_THROWS_AS(interpolate(f, Point{5.0, 0, 0}), std::invalid_argument);
  const SpinField p(PeriodicLattice::cubic(1), 1.0, win1(0, 2, Boundary::Periodic), {0, 1});
  CHECK(interpolate(p, Point{3.0, 0, 0}) == 1);
  CHECK(interpolate(p, Point{-2.0, 0, 0}) == 0);
}

TEST_CASE("sample then interpolate reproduces the sites") {
  const auto lat = PeriodicLattice(2, {Point{0, 0, 0}, Point{0.5, 0.5, 0}});
  const auto w = Window::make(2, {-5, -4, 0}, {10, 9, 1}, Boundary::Restricted);
  const auto f = SpinField::sample(TargetSet::ball(2, Point{0.01, 0.02, 0}, 0.2), lat, 0.05, w);
  for (std::int64_t c = 0; c < w.cell_count(); ++c) {
    const Site l = w.local_from_linear(c);
    for (std::size_t a = 0; a < 2; ++a) CHECK(interpolate(f, f.position(l, a)) == f.at(c, a));
  }
}

TEST_CASE("window averages") {
  const auto w = Window::make(2, {0, 0, 0}, {4, 4, 1}, Boundary::Periodic);
  const auto ones = SpinField::sample(TargetSet::whole(2), PeriodicLattice::cubic(2), 1.0, w);
  const Box all{Point{0, 0, 0}, Point{4, 4, 0}};
  CHECK(window_average(ones, all) == 1.0);
  const auto perf = SpinField::sample(TargetSet::perforated(2, 2), PeriodicLattice::cubic(2), 1.0, w);
  CHECK(window_average(perf, all) == 0.75);
  const auto f3 = SpinField::sample(TargetSet::perforated(1, 3), PeriodicLattice::cubic(1), 1.0, win1(0, 12));
  CHECK(window_average(f3, Box{Point{0, 0, 0}, Point{12, 0, 0}}) == 2.0 / 3.0);
  CHECK_THROWS_AS(window_average(ones, Box{Point{10, 10, 0}, Point{11, 11, 0}}), std::invalid_argument);
}

TEST_CASE("half-space averages approach the volume fraction") {
  const TargetSet h = TargetSet::half_space(2, normalized(Point{1, 1, 0}, 2), 0.1);
  const Box region{Point{-0.5, -0.5, 0}, Point{0.5, 0.5, 0}};
  // fraction of the unit square centred at 0 below x + y < 0.1 sqrt(2)
  const double c = 0.1 * std::sqrt(2.0);
  const double exact = 1.0 - 0.5 * (1.0 - c) * (1.0 - c);
  for (const std::int64_t n : {16, 64, 256}) {
    const double eps = 1.0 / static_cast<double>(n);
    const auto w = Window::make(2, {-n / 2, -n / 2, 0}, {n, n, 1}, Boundary::Restricted);
    const auto f = SpinField::sample(h, PeriodicLattice::cubic(2), eps, w);
    CHECK(std::abs(window_average(f, region) - exact) <= 2.0 / static_cast<double>(n));
  }
}

TEST_CASE("discrete L1 distance") {
  const TargetSet A = TargetSet::half_space(2, Point{1, 0, 0}, 0.0);
  const double eps = 0.125;
  const auto w = Window::make(2, {-8, -8, 0}, {16, 16, 1}, Boundary::Restricted);
  const auto f = SpinField::sample(A, PeriodicLattice::cubic(2), eps, w);
  const Box region{Point{-1, -1, 0}, Point{1, 1, 0}};
  CHECK(l1_distance(f, A, region) == 0.0);
  const auto g = SpinField::sample(A.complement(), PeriodicLattice::cubic(2), eps, w);
  CHECK(l1_distance(g, A, region) == doctest::Approx(eps * eps * 256));
  CHECK(l1_distance(f.with_toggled({3, 3, 0}), A, region) == doctest::Approx(eps * eps));
}

TEST_CASE("Voronoi volume estimates") {
  const auto z2 = voronoi_volume_estimate(PeriodicLattice::cubic(2), 0, 20000, 7);
  CHECK(z2.volume == 1.0);
  const PeriodicLattice two(2, {Point{0, 0, 0}, Point{0.5, 0.5, 0}});
  const auto a = voronoi_volume_estimate(two, 0, 40000, 11);
  const auto b = voronoi_volume_estimate(two, 1, 40000, 11);
  CHECK(std::abs(a.volume - 0.5) <= 4.0 * a.standard_error + 1e-12);
  CHECK(std::abs(b.volume - 0.5) <= 4.0 * b.standard_error + 1e-12);
  CHECK(a.volume + b.volume == doctest::Approx(1.0));
  CHECK(a.volume > 0.0);
  CHECK(a.volume < 1.0);
  CHECK_THROWS_AS(voronoi_volume_estimate(two, 0, 100, 1), std::invalid_argument);
}

TEST_CASE("lattice and window validation") {
  CHECK_THROWS_AS(PeriodicLattice(2, {}), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicLattice(2, {Point{1.0, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicLattice(2, {Point{0.2, 0, 0}, Point{0.2, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Window::make(2, {0, 0, 0}, {0, 3, 1}, Boundary::Periodic), std::invalid_argument);
  CHECK_THROWS_AS(SpinField(PeriodicLattice::cubic(1), 1.0, win1(0, 2), {0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(SpinField(PeriodicLattice::cubic(1), 1.0, win1(0, 2), {0}), std::invalid_argument);
  CHECK_THROWS_AS(boundary_from_string("open"), std::invalid_argument);
}

TEST_CASE("SPIN1 round trip is bit exact") {
  std::mt19937_64 rng(3);
  const PeriodicLattice lat(2, {Point{0, 0, 0}, Point{0.25, 0.75, 0}});
  Window w = Window::make(2, {-3, 2, 0}, {5, 7, 1}, Boundary::Restricted);
  w.boundary[1] = Boundary::Periodic;
  const auto f = oracle::random_field(rng, lat, 0.1, w);
  std::stringstream first;
  write_spin(first, f);
  const std::string text = first.str();
  std::istringstream in(text);
  const SpinField g = read_spin(in);
  std::stringstream second;
  write_spin(second, g);
  CHECK(second.str() == text);
  CHECK(g.eps() == f.eps());
  CHECK(g.window().boundary[1] == Boundary::Periodic);
  CHECK(std::equal(f.values().begin(), f.values().end(), g.values().begin()));
  CHECK(text.rfind("SPIN1\ndim 2\nextents 5 7\n", 0) == 0);
}

TEST_CASE("SPIN1 rejects malformed input") {
  const std::string good = "SPIN1\ndim 1\nextents 3\norigin 0\neps 0.5\nboundary restricted\noffsets 1\n0\n011\n";
  {
    std::istringstream in(good);
    CHECK(read_spin(in).ones() == 2);
  }
  for (const std::string bad : {
           std::string("SPIN2\n") + good.substr(6),
           std::string("SPIN1\ndim 4\n"),
           std::string("SPIN1\ndim 1\nextents 3\norigin 0\neps x\nboundary restricted\noffsets 1\n0\n011\n"),
           std::string("SPIN1\ndim 1\nextents 3\norigin 0\neps 0.5\nboundary open\noffsets 1\n0\n011\n"),
           std::string("SPIN1\ndim 1\nextents 3\norigin 0\neps 0.5\nboundary restricted\noffsets 1\n0\n01\n"),
           std::string("SPIN1\ndim 1\nextents 3\norigin 0\neps 0.5\nboundary restricted\noffsets 1\n0\n012\n"),
           good + "111\n",
           std::string("SPIN1\ndim 1\nextents 3\norigin 0\neps 0.5\nboundary restricted\noffsets 1\n0\n"),
       }) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(read_spin(in), IoError);
  }
  CHECK_THROWS_AS(read_spin(std::filesystem::path("/nonexistent/field.spin1")), IoError);
}
