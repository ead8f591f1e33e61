#include "latgamma/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "latgamma/parallel.hpp"

namespace latgamma {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double tabulated_value(const TabulatedProfile& t, double r) {
  const auto& rs = t.radii;
  if (r <= rs.front()) return t.values.front();
  if (r > rs.back()) return 0.0;
  const auto it = std::upper_bound(rs.begin(), rs.end(), r);
  const std::size_t hi = static_cast<std::size_t>(it - rs.begin());
  if (hi >= rs.size()) return t.values.back();
  const std::size_t lo = hi - 1;
  const double w = (r - rs[lo]) / (rs[hi] - rs[lo]);
  return (1.0 - w) * t.values[lo] + w * t.values[hi];
}

// Sums f(center) * h^d over the midpoint grid. Rows along the last axis are
// reduced first, then the row sums with a fixed tree.
template <class F>
double midpoint_sum(int d, const QuadratureSpec& q, F&& f) {
  const std::int64_t n = q.cells;
  const double h = q.spacing();
  const double half = static_cast<double>(n) / 2.0;
  auto center = [&](std::int64_t i) { return (static_cast<double>(i) + 0.5 - half) * h; };

  const std::int64_t rows = d == 1 ? 1 : (d == 2 ? n : n * n);
  std::vector<double> row_sums(static_cast<std::size_t>(rows), 0.0);
  parallel_for(row_sums.size(), [&](std::size_t b, std::size_t e) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (std::size_t r = b; r < e; ++r) {
      Point x{};
      const auto ri = static_cast<std::int64_t>(r);
      if (d == 2) x[0] = center(ri);
      if (d == 3) {
        x[0] = center(ri / n);
        x[1] = center(ri % n);
      }
      for (std::int64_t i = 0; i < n; ++i) {
        x[d - 1] = center(i);
        row[static_cast<std::size_t>(i)] = f(x);
      }
      row_sums[r] = pairwise_sum(row);
    }
  });
  return pairwise_sum(row_sums) * std::pow(h, d);
}

void check_quadrature(const Kernel& k, const QuadratureSpec& q) {
  if (q.cells < 1) throw std::invalid_argument("quadrature needs at least one cell per axis");
  if (q.half_width < k.support_radius()) {
    throw std::invalid_argument("quadrature box half-width " + format_real(q.half_width) +
                                " is smaller than the kernel support radius " +
                                format_real(k.support_radius()));
  }
}

}  // namespace

QuadratureSpec QuadratureSpec::with_spacing(double h, double half_width) {
  if (!(h > 0.0) || !(half_width > 0.0)) throw std::invalid_argument("quadrature spacing and box must be positive");
  QuadratureSpec q;
  q.half_width = half_width;
  q.cells = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2.0 * half_width / h - 1e-9)));
  return q;
}

Kernel Kernel::ball(int dim, double radius) {
  check_dimension(dim);
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  return Kernel(dim, BallProfile{radius});
}

Kernel Kernel::exponential(int dim, double rate, double cutoff) {
  check_dimension(dim);
  if (!(rate >= 0.0) || !(cutoff > 0.0)) throw std::invalid_argument("exponential profile needs rate >= 0 and cutoff > 0");
  return Kernel(dim, ExponentialProfile{rate, cutoff});
}

Kernel Kernel::tabulated(int dim, std::vector<double> radii, std::vector<double> values) {
  check_dimension(dim);
  if (radii.empty() || radii.size() != values.size()) {
    throw std::invalid_argument("tabulated profile needs equally many radii and values (at least one)");
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] >= 0.0) || !std::isfinite(radii[i])) throw std::invalid_argument("tabulated radii must be finite and >= 0");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw std::invalid_argument("tabulated radii must be strictly increasing");
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) throw std::invalid_argument("tabulated values must be finite and >= 0");
  }
  return Kernel(dim, TabulatedProfile{std::move(radii), std::move(values)});
}

Kernel Kernel::load_table(int dim, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel table " + path.string());
  std::vector<double> radii;
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double r = 0.0;
    double v = 0.0;
    if (!(ls >> r)) continue;
    if (!(ls >> v)) throw IoError("kernel table " + path.string() + ": expected two columns in '" + line + "'");
    radii.push_back(r);
    values.push_back(v);
  }
  return tabulated(dim, std::move(radii), std::move(values));
}

Kernel Kernel::custom(int dim, CustomProfile profile) {
  check_dimension(dim);
  if (!profile.fn) throw std::invalid_argument("custom profile needs a callable");
  if (!(profile.support > 0.0)) throw std::invalid_argument("custom profile needs a positive support radius");
  return Kernel(dim, std::move(profile));
}

double Kernel::support_radius() const {
  return std::visit(Overloaded{
                        [](const BallProfile& p) { return p.radius; },
                        [](const ExponentialProfile& p) { return p.cutoff; },
                        [](const TabulatedProfile& p) { return p.radii.back(); },
                        [](const CustomProfile& p) { return p.support; },
                    },
                    profile_);
}

bool Kernel::is_radial() const {
  if (const auto* c = std::get_if<CustomProfile>(&profile_)) return c->radial;
  return true;
}

Kernel Kernel::scaled(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("kernel scale must be positive");
  Kernel out = *this;
  out.scale_ *= t;
  return out;
}

double Kernel::eval_radial(double r) const {
  const double v = std::visit(Overloaded{
                                  [r](const BallProfile& p) { return r < p.radius ? 1.0 : 0.0; },
                                  [r](const ExponentialProfile& p) { return r < p.cutoff ? std::exp(-p.rate * r) : 0.0; },
                                  [r](const TabulatedProfile& p) { return tabulated_value(p, r); },
                                  [r](const CustomProfile& p) {
                                    if (!p.radial) throw std::invalid_argument("eval_radial called on a non-radial profile");
                                    Point x{};
                                    x[0] = r;
                                    return r > p.support ? 0.0 : p.fn(x);
                                  },
                              },
                              profile_);
  return scale_ * v;
}

double Kernel::eval(const Point& xi) const {
  if (const auto* c = std::get_if<CustomProfile>(&profile_)) {
    if (norm(xi, dim_) > c->support) return 0.0;
    return scale_ * c->fn(xi);
  }
  // Squared-radius comparison keeps the open-ball test exact on lattice points.
  if (const auto* b = std::get_if<BallProfile>(&profile_)) {
    return dot(xi, xi, dim_) < b->radius * b->radius ? scale_ : 0.0;
  }
  return eval_radial(norm(xi, dim_));
}

double Kernel::eval(std::span<const double> xi) const {
  if (static_cast<int>(xi.size()) != dim_) {
    throw std::invalid_argument("kernel of dimension " + std::to_string(dim_) + " evaluated at a " +
                                std::to_string(xi.size()) + "-vector");
  }
  Point p{};
  for (int k = 0; k < dim_; ++k) {
    if (!std::isfinite(xi[k])) throw std::invalid_argument("kernel evaluated at a non-finite point");
    p[k] = xi[k];
  }
  return eval(p);
}

std::optional<LowerBoundCertificate> Kernel::certificate() const {
  return std::visit(
      Overloaded{
          [this](const BallProfile& p) -> std::optional<LowerBoundCertificate> {
            return LowerBoundCertificate{scale_, p.radius / 2.0};
          },
          [this](const ExponentialProfile& p) -> std::optional<LowerBoundCertificate> {
            const double r0 = p.cutoff / 2.0;
            return LowerBoundCertificate{scale_ * std::exp(-p.rate * r0), r0};
          },
          [this](const TabulatedProfile& p) -> std::optional<LowerBoundCertificate> {
            const double v0 = p.values.front();
            if (!(v0 > 0.0)) return std::nullopt;
            const double c = v0 / 2.0;
            double r0 = p.radii.back();
            for (std::size_t i = 1; i < p.radii.size(); ++i) {
              if (p.values[i] < c) {
                const double w = (p.values[i - 1] - c) / (p.values[i - 1] - p.values[i]);
                r0 = p.radii[i - 1] + w * (p.radii[i] - p.radii[i - 1]);
                break;
              }
            }
            if (!(r0 > 0.0)) return std::nullopt;
            return LowerBoundCertificate{scale_ * c, r0};
          },
          [](const CustomProfile&) -> std::optional<LowerBoundCertificate> { return std::nullopt; },
      },
      profile_);
}

std::string Kernel::describe() const {
  std::string s = std::visit(Overloaded{
                                 [](const BallProfile& p) { return "ball:" + format_real(p.radius); },
                                 [](const ExponentialProfile& p) {
                                   return "exp:" + format_real(p.rate) + ":" + format_real(p.cutoff);
                                 },
                                 [](const TabulatedProfile& p) {
                                   return "table:" + std::to_string(p.radii.size()) + "-samples";
                                 },
                                 [](const CustomProfile& p) { return "custom:" + p.name; },
                             },
                             profile_);
  if (scale_ != 1.0) s += "*" + format_real(scale_);
  return s;
}

QuadratureSpec Kernel::default_quadrature() const {
  const double support = support_radius();
  const double divisions = dim_ <= 2 ? 256.0 : 64.0;
  return QuadratureSpec::with_spacing(support / divisions, support);
}

double phi(const Kernel& k, const Point& nu, const QuadratureSpec& q) {
  const int d = k.dimension();
  if (std::abs(norm(nu, d) - 1.0) > 1e-12) throw std::invalid_argument("phi needs a unit direction");
  check_quadrature(k, q);
  return midpoint_sum(d, q, [&](const Point& x) { return k.eval(x) * std::abs(dot(x, nu, d)); });
}

double phi(const Kernel& k, const Point& nu) { return phi(k, nu, k.default_quadrature()); }

double sigma_radial(const Kernel& k, const QuadratureSpec& q) {
  if (!k.is_radial()) throw std::invalid_argument("sigma_radial needs a radially symmetric kernel");
  Point e1{};
  e1[0] = 1.0;
  return phi(k, e1, q);
}

double sigma_radial(const Kernel& k) { return sigma_radial(k, k.default_quadrature()); }

double first_moment(const Kernel& k, const QuadratureSpec& q) {
  check_quadrature(k, q);
  const int d = k.dimension();
  return midpoint_sum(d, q, [&](const Point& x) { return k.eval(x) * norm(x, d); });
}

double first_moment(const Kernel& k) { return first_moment(k, k.default_quadrature()); }

std::optional<double> closed_form_phi(const Kernel& k) {
  const auto* b = std::get_if<BallProfile>(&k.profile());
  if (b == nullptr) return std::nullopt;
  // int_{B_1} |xi_1| dxi in d = 1, 2, 3.
  static constexpr std::array<double, 3> kUnitBall{1.0, 4.0 / 3.0, std::numbers::pi / 2.0};
  const int d = k.dimension();
  return k.scale() * kUnitBall[static_cast<std::size_t>(d - 1)] * std::pow(b->radius, d + 1);
}

HypothesisCheck check_hypotheses(const Kernel& k) {
  HypothesisCheck out;
  const auto q = k.default_quadrature();
  const auto cert = k.certificate();
  const int d = k.dimension();
  bool lower_ok = cert.has_value();
  double min_value = 0.0;
  const std::int64_t n = q.cells;
  const double h = q.spacing();
  std::int64_t total = 1;
  for (int a = 0; a < d; ++a) total *= n;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    Point x{};
    std::int64_t rest = idx;
    for (int a = d - 1; a >= 0; --a) {
      x[a] = (static_cast<double>(rest % n) + 0.5 - static_cast<double>(n) / 2.0) * h;
      rest /= n;
    }
    const double v = k.eval(x);
    min_value = std::min(min_value, v);
    if (cert && norm(x, d) <= cert->r0 && v < cert->c0) lower_ok = false;
  }
  out.nonnegative = min_value >= 0.0;
  out.lower_bound = lower_ok;
  out.first_moment = first_moment(k, q);
  out.first_moment_finite = std::isfinite(out.first_moment);
  return out;
}

}  // namespace latgamma
