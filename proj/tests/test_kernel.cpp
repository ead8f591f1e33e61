#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "latgamma/kernel.hpp"

using namespace latgamma;

namespace {

Point p2(double x, double y) { return Point{x, y, 0.0}; }

// int_0^1 int_0^2pi r^(1+extra) |cos t| dt dr by a fine midpoint rule.
double polar_disc(int extra_r_power, bool abs_cos) {
  const int nr = 4000;
  const int nt = 4000;
  double s = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) / nr;
    for (int j = 0; j < nt; ++j) {
      const double t = 2.0 * std::numbers::pi * (j + 0.5) / nt;
      s += std::pow(r, 1 + extra_r_power) * (abs_cos ? std::abs(std::cos(t)) : 1.0);
    }
  }
  return s * (1.0 / nr) * (2.0 * std::numbers::pi / nt);
}

// 2 * int_0^1 x * pi (1 - x^2) dx, Simpson.
double sphere_slab_integral() {
  const int n = 2000;
  const double h = 1.0 / n;
  auto g = [](double x) { return x * std::numbers::pi * (1.0 - x * x); };
  double s = g(0.0) + g(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(i * h);
  return 2.0 * s * h / 3.0;
}

}  // namespace

TEST_CASE("ball kernel evaluation") {
  const Kernel k2 = Kernel::ball(2);
  CHECK(k2.eval(p2(0.5, 0.0)) == 1.0);
  CHECK(k2.eval(p2(2.0, 0.0)) == 0.0);
  const Kernel k1 = Kernel::ball(1);
  CHECK(k1.eval(Point{1.0, 0, 0}) == 0.0);
  CHECK(k1.eval(Point{0.999, 0, 0}) == 1.0);
  const std::vector<double> wrong{0.1, 0.1, 0.1};
  CHECK_THROWS_AS(k2.eval(std::span<const double>(wrong)), std::invalid_argument);
  const std::vector<double> bad{NAN, 0.0};
  CHECK_THROWS_AS(k2.eval(std::span<const double>(bad)), std::invalid_argument);
  const std::vector<double> ok{0.1, 0.2};
  CHECK(k2.eval(std::span<const double>(ok)) == 1.0);
}

TEST_CASE("exponential and tabulated profiles") {
  const Kernel e = Kernel::exponential(2, 2.0, 1.0);
  CHECK(e.eval(p2(0.5, 0.0)) == doctest::Approx(std::exp(-1.0)));
  CHECK(e.eval(p2(0.0, 1.0)) == 0.0);
  CHECK(e.support_radius() == 1.0);
  const Kernel t = Kernel::tabulated(2, {0.0, 0.5, 1.0}, {2.0, 1.0, 0.5});
  CHECK(t.eval_radial(0.25) == doctest::Approx(1.5));
  CHECK(t.eval_radial(0.75) == doctest::Approx(0.75));
  CHECK(t.eval_radial(1.5) == 0.0);
  CHECK(t.eval(p2(0.3, 0.4)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(Kernel::tabulated(2, {0.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Kernel::tabulated(2, {0.0}, {-1.0}), std::invalid_argument);
}

TEST_CASE("kernel tables load from disk") {
  const auto dir = std::filesystem::temp_directory_path() / "latgamma_kernel_table";
  std::filesystem::create_directories(dir);
  const auto good = dir / "good.txt";
  {
    std::ofstream out(good);
    out << "# radius value\n0 1\n0.5 1  # flat\n1 0\n";
  }
  const Kernel k = Kernel::load_table(2, good);
  CHECK(k.eval_radial(0.25) == 1.0);
  CHECK(k.eval_radial(0.75) == doctest::Approx(0.5));
  const auto bad = dir / "bad.txt";
  {
    std::ofstream out(bad);
    out << "0 1\n0.5\n";
  }
  CHECK_THROWS_AS(Kernel::load_table(2, bad), IoError);
  CHECK_THROWS_AS(Kernel::load_table(2, dir / "missing.txt"), IoError);
}

TEST_CASE("phi of the unit ball") {
  Point e1{1.0, 0.0, 0.0};
  CHECK(phi(Kernel::ball(1), e1) == doctest::Approx(1.0).epsilon(1e-3));
  const double disc = polar_disc(1, true);
  CHECK(disc == doctest::Approx(4.0 / 3.0).epsilon(1e-5));
  const Point diag = normalized(p2(1.0, 1.0), 2);
  CHECK(phi(Kernel::ball(2), e1) == doctest::Approx(disc).epsilon(1e-3));
  CHECK(phi(Kernel::ball(2), diag) == doctest::Approx(disc).epsilon(1e-3));
  const double slab = sphere_slab_integral();
  CHECK(slab == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-9));
  CHECK(phi(Kernel::ball(3), e1) == doctest::Approx(slab).epsilon(1e-2));
  CHECK(*closed_form_phi(Kernel::ball(2)) == doctest::Approx(disc).epsilon(1e-5));
  CHECK(*closed_form_phi(Kernel::ball(3)) == doctest::Approx(slab).epsilon(1e-9));
  CHECK(*closed_form_phi(Kernel::ball(2, 2.0)) == doctest::Approx(8.0 * 4.0 / 3.0));
  CHECK_FALSE(closed_form_phi(Kernel::exponential(2, 1.0, 1.0)).has_value());
}

TEST_CASE("phi argument checks") {
  const Kernel k = Kernel::ball(2);
  CHECK_THROWS_AS(phi(k, p2(1.0, 1.0)), std::invalid_argument);
  QuadratureSpec q;
  q.cells = 64;
  q.half_width = 0.5;
  CHECK_THROWS_AS(phi(k, p2(1.0, 0.0), q), std::invalid_argument);
}

TEST_CASE("sigma_radial") {
  CHECK(sigma_radial(Kernel::ball(2)) == doctest::Approx(4.0 / 3.0).epsilon(1e-3));
  CHECK(sigma_radial(Kernel::ball(1)) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(sigma_radial(Kernel::tabulated(2, {0.0, 1.0}, {0.0, 0.0})) == 0.0);
  CustomProfile skew;
  skew.fn = [](const Point& x) { return x[0] > 0 ? 1.0 : 0.0; };
  skew.support = 1.0;
  CHECK_THROWS_AS(sigma_radial(Kernel::custom(2, skew)), std::invalid_argument);
}

TEST_CASE("first moment") {
  CHECK(first_moment(Kernel::ball(1)) == doctest::Approx(1.0).epsilon(1e-3));
  const double oracle = polar_disc(1, false);
  CHECK(oracle == doctest::Approx(2.0 * std::numbers::pi / 3.0).epsilon(1e-6));
  CHECK(first_moment(Kernel::ball(2)) == doctest::Approx(oracle).epsilon(1e-3));
  CHECK(first_moment(Kernel::tabulated(2, {0.0, 1.0}, {0.0, 0.0})) == 0.0);
}

TEST_CASE("phi is isotropic for radial kernels") {
  const Kernel k = Kernel::ball(2);
  const double ref = phi(k, p2(1.0, 0.0));
  double worst = 0.0;
  for (int j = 0; j < 16; ++j) {
    const double t = 2.0 * std::numbers::pi * j / 16.0 + 0.1;
    worst = std::max(worst, std::abs(phi(k, p2(std::cos(t), std::sin(t))) - ref) / ref);
  }
  CHECK(worst <= 0.01);
  const Kernel e = Kernel::exponential(2, 1.5, 1.0);
  const double eref = phi(e, p2(1.0, 0.0));
  CHECK(phi(e, normalized(p2(2.0, 1.0), 2)) == doctest::Approx(eref).epsilon(0.01));
}

TEST_CASE("phi is even in the direction") {
  const Kernel k = Kernel::exponential(2, 1.0, 1.0);
  for (const Point nu : {normalized(p2(1.0, 0.3), 2), normalized(p2(-0.2, 1.0), 2)}) {
    const Point neg{-nu[0], -nu[1], 0.0};
    CHECK(phi(k, nu) == phi(k, neg));
  }
}

TEST_CASE("phi is linear in the profile") {
  const Kernel k = Kernel::ball(2);
  const Point nu = normalized(p2(3.0, 1.0), 2);
  for (const double t : {0.5, 2.0, 7.25}) {
    CHECK(phi(k.scaled(t), nu) == doctest::Approx(t * phi(k, nu)).epsilon(1e-12));
  }
}

TEST_CASE("midpoint refinement is first order for the indicator") {
  const Kernel k = Kernel::ball(1);
  const Point e1{1.0, 0.0, 0.0};
  std::vector<double> err;
  for (const std::int64_t n : {16, 32, 64, 128}) {
    QuadratureSpec q;
    q.cells = n;
    q.half_width = 1.5;
    err.push_back(std::abs(phi(k, e1, q) - 1.0));
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double ratio = err[i - 1] / err[i];
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 3.0);
  }
}

TEST_CASE("hypothesis checks") {
  const auto h = check_hypotheses(Kernel::ball(2));
  CHECK(h.nonnegative);
  CHECK(h.lower_bound);
  CHECK(h.first_moment_finite);
  CHECK(h.first_moment == doctest::Approx(2.0 * std::numbers::pi / 3.0).epsilon(1e-3));
  const auto cert = Kernel::ball(2).certificate();
  REQUIRE(cert.has_value());
  CHECK(cert->c0 == 1.0);
  CHECK(cert->r0 == 0.5);
  CHECK_FALSE(Kernel::tabulated(2, {0.0, 1.0}, {0.0, 1.0}).certificate().has_value());
  const auto z = check_hypotheses(Kernel::tabulated(2, {0.0, 1.0}, {0.0, 0.0}));
  CHECK_FALSE(z.lower_bound);
}

TEST_CASE("descriptors and scaling") {
  CHECK(Kernel::ball(2).describe() == "ball:1");
  CHECK(Kernel::ball(2).scaled(2.0).eval(p2(0.1, 0.1)) == 2.0);
  CHECK_THROWS_AS(Kernel::ball(2).scaled(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Kernel::ball(4), std::invalid_argument);
  const auto q = Kernel::ball(2).default_quadrature();
  CHECK(q.spacing() == doctest::Approx(1.0 / 256.0));
}
