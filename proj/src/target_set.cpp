#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "latgamma/field.hpp"

namespace latgamma {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

HalfSpace unit_half_space(const Point& n, double offset, int d) {
  const double len = norm(n, d);
  if (!(len > 0.0)) throw std::invalid_argument("half-space normal must be nonzero");
  HalfSpace h;
  for (int k = 0; k < d; ++k) h.normal[k] = n[k] / len;
  h.offset = offset / len;
  return h;
}

// Vertices of one face, clipped by every other constraint. Only the first
// (d-1) coordinates of each vertex are meaningful in the face's own frame;
// physical vertices are returned alongside.
struct FaceGeometry {
  double measure = 0.0;
  std::vector<Point> vertices;
};

constexpr double kTol = 1e-12;

FaceGeometry clip_face(const Polytope& p, std::size_t j, int d, double extent) {
  const HalfSpace& f = p.constraints[j];
  Point base{};
  for (int k = 0; k < d; ++k) base[k] = f.normal[k] * f.offset;
  FaceGeometry out;

  if (d == 1) {
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
      if (i == j) continue;
      if (p.constraints[i].normal[0] * base[0] > p.constraints[i].offset + kTol) return out;
    }
    out.measure = 1.0;
    out.vertices.push_back(base);
    return out;
  }

  // Orthonormal tangent frame of the face plane.
  std::array<Point, 2> tangent{};
  if (d == 2) {
    tangent[0] = Point{-f.normal[1], f.normal[0], 0.0};
  } else {
    Point helper{1.0, 0.0, 0.0};
    if (std::abs(f.normal[0]) > 0.9) helper = Point{0.0, 1.0, 0.0};
    Point t0{f.normal[1] * helper[2] - f.normal[2] * helper[1], f.normal[2] * helper[0] - f.normal[0] * helper[2],
             f.normal[0] * helper[1] - f.normal[1] * helper[0]};
    t0 = normalized(t0, 3);
    tangent[0] = t0;
    tangent[1] = Point{f.normal[1] * t0[2] - f.normal[2] * t0[1], f.normal[2] * t0[0] - f.normal[0] * t0[2],
                       f.normal[0] * t0[1] - f.normal[1] * t0[0]};
  }

  // Polygon (or segment) in face coordinates, clipped by alpha.s <= gamma.
  using P2 = std::array<double, 2>;
  std::vector<P2> poly;
  if (d == 2) {
    poly = {P2{-extent, 0.0}, P2{extent, 0.0}};
  } else {
    poly = {P2{-extent, -extent}, P2{extent, -extent}, P2{extent, extent}, P2{-extent, extent}};
  }
  for (std::size_t i = 0; i < p.constraints.size() && !poly.empty(); ++i) {
    if (i == j) continue;
    const HalfSpace& c = p.constraints[i];
    const double a0 = dot(tangent[0], c.normal, d);
    const double a1 = d == 3 ? dot(tangent[1], c.normal, d) : 0.0;
    const double g = c.offset - dot(base, c.normal, d);
    auto value = [&](const P2& s) { return a0 * s[0] + a1 * s[1] - g; };
    if (d == 2) {
      const double v0 = value(poly[0]);
      const double v1 = value(poly[1]);
      if (v0 > kTol && v1 > kTol) {
        poly.clear();
      } else if (v0 > kTol || v1 > kTol) {
        const double t = v0 / (v0 - v1);
        const P2 cut{poly[0][0] + t * (poly[1][0] - poly[0][0]), 0.0};
        (v0 > kTol ? poly[0] : poly[1]) = cut;
      }
      continue;
    }
    std::vector<P2> next;
    for (std::size_t a = 0; a < poly.size(); ++a) {
      const P2& cur = poly[a];
      const P2& nxt = poly[(a + 1) % poly.size()];
      const double vc = value(cur);
      const double vn = value(nxt);
      if (vc <= kTol) next.push_back(cur);
      if ((vc <= kTol) != (vn <= kTol)) {
        const double t = vc / (vc - vn);
        next.push_back(P2{cur[0] + t * (nxt[0] - cur[0]), cur[1] + t * (nxt[1] - cur[1])});
      }
    }
    poly = std::move(next);
  }
  if (poly.empty()) return out;

  for (const auto& s : poly) {
    if (std::abs(s[0]) >= extent * (1 - 1e-9) || std::abs(s[1]) >= extent * (1 - 1e-9)) {
      throw std::invalid_argument("polytope is unbounded");
    }
    Point v = base;
    for (int k = 0; k < d; ++k) v[k] += s[0] * tangent[0][k] + s[1] * tangent[1][k];
    out.vertices.push_back(v);
  }
  if (d == 2) {
    out.measure = std::abs(poly[1][0] - poly[0][0]);
  } else {
    double area = 0.0;
    for (std::size_t a = 0; a < poly.size(); ++a) {
      const P2& cur = poly[a];
      const P2& nxt = poly[(a + 1) % poly.size()];
      area += cur[0] * nxt[1] - nxt[0] * cur[1];
    }
    out.measure = std::abs(area) / 2.0;
  }
  return out;
}

double clip_extent(const Polytope& p) {
  double m = 1.0;
  for (const auto& c : p.constraints) m = std::max(m, std::abs(c.offset));
  return 1e4 * m;
}

std::vector<FaceGeometry> all_faces(const Polytope& p, int d) {
  std::vector<FaceGeometry> faces;
  const double extent = clip_extent(p);
  for (std::size_t j = 0; j < p.constraints.size(); ++j) faces.push_back(clip_face(p, j, d, extent));
  return faces;
}

double polytope_volume(const Polytope& p, int d) {
  const auto faces = all_faces(p, d);
  // Pyramid decomposition from the origin (unit normals): V = (1/d) sum b_f |F_f|.
  double v = 0.0;
  for (std::size_t j = 0; j < faces.size(); ++j) v += p.constraints[j].offset * faces[j].measure;
  return v / d;
}

}  // namespace

TargetSet TargetSet::half_space(int dim, const Point& nu, double offset) {
  check_dimension(dim);
  return TargetSet(dim, unit_half_space(nu, offset, dim));
}

TargetSet TargetSet::polytope(int dim, std::vector<HalfSpace> constraints) {
  check_dimension(dim);
  if (constraints.empty()) throw std::invalid_argument("a polytope needs at least one constraint");
  Polytope p;
  for (const auto& c : constraints) p.constraints.push_back(unit_half_space(c.normal, c.offset, dim));
  return TargetSet(dim, std::move(p));
}

TargetSet TargetSet::box(int dim, const Point& lo, const Point& hi) {
  check_dimension(dim);
  std::vector<HalfSpace> cs;
  for (int k = 0; k < dim; ++k) {
    if (!(hi[k] > lo[k])) throw std::invalid_argument("box needs lo < hi on every axis");
    Point e{};
    e[k] = 1.0;
    cs.push_back({e, hi[k]});
    e[k] = -1.0;
    cs.push_back({e, -lo[k]});
  }
  return polytope(dim, std::move(cs));
}

TargetSet TargetSet::ball(int dim, const Point& center, double radius) {
  check_dimension(dim);
  if (!(radius >= 0.0)) throw std::invalid_argument("ball radius must be >= 0");
  return TargetSet(dim, BallSet{center, radius});
}

TargetSet TargetSet::perforated(int dim, int n) {
  check_dimension(dim);
  if (n < 2) throw std::invalid_argument("perforation period N must be >= 2");
  return TargetSet(dim, PerforatedConstant{n});
}

TargetSet TargetSet::whole(int dim) {
  check_dimension(dim);
  return TargetSet(dim, WholeSpace{});
}

TargetSet TargetSet::complement() const {
  return TargetSet(dim_, Complement{std::make_shared<const TargetSet>(*this)});
}

std::string TargetSet::describe() const {
  const int d = dim_;
  auto vec = [d](const Point& p) {
    std::string s = "(";
    for (int k = 0; k < d; ++k) s += (k ? "," : "") + format_real(p[k]);
    return s + ")";
  };
  return std::visit(Overloaded{
                        [&](const HalfSpace& h) { return "halfspace" + vec(h.normal) + "<" + format_real(h.offset); },
                        [](const Polytope& p) { return "polytope[" + std::to_string(p.constraints.size()) + "]"; },
                        [&](const BallSet& b) { return "ball" + vec(b.center) + "r" + format_real(b.radius); },
                        [](const PerforatedConstant& p) { return "perforated:N=" + std::to_string(p.n); },
                        [](const WholeSpace&) { return std::string("whole"); },
                        [](const Complement& c) { return "complement(" + c.inner->describe() + ")"; },
                    },
                    v_);
}

bool TargetSet::contains_site(const Point& y, double eps) const {
  const int d = dim_;
  return std::visit(Overloaded{
                        [&](const PerforatedConstant& p) {
                          for (int k = 0; k < d; ++k) {
                            const double r = std::fmod(y[k], static_cast<double>(p.n));
                            if (r != 0.0) return true;
                          }
                          return false;
                        },
                        [&](const Complement& c) { return !c.inner->contains_site(y, eps); },
                        [&](const auto&) {
                          Point x{};
                          for (int k = 0; k < d; ++k) x[k] = eps * y[k];
                          return contains(x);
                        },
                    },
                    v_);
}

bool TargetSet::contains(const Point& x) const {
  const int d = dim_;
  return std::visit(Overloaded{
                        [&](const HalfSpace& h) { return dot(x, h.normal, d) < h.offset; },
                        [&](const Polytope& p) {
                          return std::all_of(p.constraints.begin(), p.constraints.end(),
                                             [&](const HalfSpace& h) { return dot(x, h.normal, d) < h.offset; });
                        },
                        [&](const BallSet& b) {
                          double s = 0.0;
                          for (int k = 0; k < d; ++k) s += (x[k] - b.center[k]) * (x[k] - b.center[k]);
                          return s < b.radius * b.radius;
                        },
                        [](const PerforatedConstant&) -> bool {
                          throw std::invalid_argument("perforated sets are defined on lattice sites only");
                        },
                        [](const WholeSpace&) { return true; },
                        [&](const Complement& c) { return !c.inner->contains(x); },
                    },
                    v_);
}

bool TargetSet::is_polytope() const { return std::holds_alternative<Polytope>(v_); }

const Polytope& TargetSet::as_polytope() const {
  const auto* p = std::get_if<Polytope>(&v_);
  if (p == nullptr) throw std::invalid_argument("target set is not a polytope");
  return *p;
}

double TargetSet::volume() const { return polytope_volume(as_polytope(), dim_); }

std::vector<PolytopeFace> TargetSet::faces() const {
  const Polytope& p = as_polytope();
  std::vector<PolytopeFace> out;
  if (!(polytope_volume(p, dim_) > kTol)) return out;
  const auto geo = all_faces(p, dim_);
  for (std::size_t j = 0; j < geo.size(); ++j) {
    if (geo[j].measure > kTol) out.push_back({p.constraints[j].normal, geo[j].measure});
  }
  return out;
}

Box TargetSet::bounding_box() const {
  Box b;
  if (const auto* ball = std::get_if<BallSet>(&v_)) {
    for (int k = 0; k < dim_; ++k) {
      b.lo[k] = ball->center[k] - ball->radius;
      b.hi[k] = ball->center[k] + ball->radius;
    }
    return b;
  }
  const Polytope& p = as_polytope();
  bool any = false;
  for (int k = 0; k < dim_; ++k) {
    b.lo[k] = std::numeric_limits<double>::infinity();
    b.hi[k] = -std::numeric_limits<double>::infinity();
  }
  for (const auto& f : all_faces(p, dim_)) {
    for (const auto& v : f.vertices) {
      any = true;
      for (int k = 0; k < dim_; ++k) {
        b.lo[k] = std::min(b.lo[k], v[k]);
        b.hi[k] = std::max(b.hi[k], v[k]);
      }
    }
  }
  if (!any) b = Box{};
  return b;
}

}  // namespace latgamma
