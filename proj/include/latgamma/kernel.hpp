#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "latgamma/types.hpp"

namespace latgamma {

/// Indicator of the open ball of the given radius.
struct BallProfile {
  double radius = 1.0;
};

/// exp(-rate |xi|) on the open ball of radius `cutoff`, zero outside.
struct ExponentialProfile {
  double rate = 1.0;
  double cutoff = 1.0;
};

/// Radial samples (r_k, v_k) joined linearly; constant below r_0, zero past the last sample.
struct TabulatedProfile {
  std::vector<double> radii;
  std::vector<double> values;
};

/// Arbitrary in-process profile; not necessarily radial.
struct CustomProfile {
  std::function<double(const Point&)> fn;
  double support = 1.0;
  bool radial = false;
  std::string name = "custom";
};

using Profile = std::variant<BallProfile, ExponentialProfile, TabulatedProfile, CustomProfile>;

/// Certificate (c0, r0) for the lower bound a(xi) >= c0 on |xi| <= r0.
struct LowerBoundCertificate {
  double c0 = 0.0;
  double r0 = 0.0;
};

/// Midpoint-rule grid on [-half_width, half_width]^d with `cells` cells per axis.
struct QuadratureSpec {
  std::int64_t cells = 512;
  double half_width = 1.0;

  double spacing() const { return 2.0 * half_width / static_cast<double>(cells); }

  /// Grid with spacing at most `h` over [-half_width, half_width]^d.
  static QuadratureSpec with_spacing(double h, double half_width);
};

/// The interaction profile a : R^d -> [0, inf) with bounded support.
///
/// Kernels are immutable; every member function is safe to call concurrently.
class Kernel {
 public:
  static Kernel ball(int dim, double radius = 1.0);
  static Kernel exponential(int dim, double rate, double cutoff);
  static Kernel tabulated(int dim, std::vector<double> radii, std::vector<double> values);
  /// Reads a two-column text table (radius value), '#' starts a comment.
  static Kernel load_table(int dim, const std::filesystem::path& path);
  static Kernel custom(int dim, CustomProfile profile);

  int dimension() const { return dim_; }
  double support_radius() const;
  bool is_radial() const;
  const Profile& profile() const { return profile_; }
  double scale() const { return scale_; }

  /// Same profile multiplied by t > 0.
  Kernel scaled(double t) const;

  /// Value at xi; `xi.size()` must equal the dimension.
  double eval(std::span<const double> xi) const;
  /// Value at a point whose components past the dimension are ignored.
  double eval(const Point& xi) const;
  /// Value of a radial profile at distance r >= 0.
  double eval_radial(double r) const;

  /// (c0, r0) when the profile satisfies a positive lower bound near the origin.
  std::optional<LowerBoundCertificate> certificate() const;

  /// Short descriptor, e.g. "ball:1" or "exp:2:1".
  std::string describe() const;

  /// Default grid: h = support/256 for d <= 2, support/64 for d = 3.
  QuadratureSpec default_quadrature() const;

 private:
  Kernel(int dim, Profile profile) : dim_(dim), profile_(std::move(profile)) {}

  int dim_ = 1;
  Profile profile_;
  double scale_ = 1.0;
};

/// Midpoint approximation of the surface tension  int a(xi) |<xi, nu>| dxi.
double phi(const Kernel& k, const Point& nu, const QuadratureSpec& q);
double phi(const Kernel& k, const Point& nu);

/// Radial constant sigma = phi(k, e_1); throws for non-radial kernels.
double sigma_radial(const Kernel& k, const QuadratureSpec& q);
double sigma_radial(const Kernel& k);

/// Midpoint approximation of  int a(xi) |xi| dxi.
double first_moment(const Kernel& k, const QuadratureSpec& q);
double first_moment(const Kernel& k);

/// Exact phi for ball kernels (radial, so independent of the direction).
std::optional<double> closed_form_phi(const Kernel& k);

/// Result of checking the standing hypotheses on a kernel.
struct HypothesisCheck {
  bool nonnegative = true;
  bool lower_bound = false;
  double first_moment = 0.0;
  bool first_moment_finite = false;
};

/// Samples the kernel on the default grid and checks nonnegativity, the
/// lower-bound certificate and finiteness of the first moment.
HypothesisCheck check_hypotheses(const Kernel& k);

}  // namespace latgamma
