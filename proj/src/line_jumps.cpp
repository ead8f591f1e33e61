#include <array>
#include <cmath>
#include <map>

#include "latgamma/energy.hpp"
#include "latgamma/parallel.hpp"

namespace latgamma {

namespace {

// Moves `c` by sign * xi inside the window; false when it leaves a restricted axis.
bool step(const Window& w, Site& c, const Site& xi, int sign) {
  Site next = c;
  for (int k = 0; k < w.dim; ++k) {
    std::int64_t x = c[k] + sign * xi[k];
    if (x < 0 || x >= w.extent[k]) {
      if (!w.periodic(k)) return false;
      x %= w.extent[k];
      if (x < 0) x += w.extent[k];
    }
    next[k] = x;
  }
  c = next;
  return true;
}

bool closed_lines(const Window& w, const Site& xi) {
  for (int k = 0; k < w.dim; ++k) {
    if (xi[k] != 0 && !w.periodic(k)) return false;
  }
  return true;
}

void check_line_field(const SpinField& f, const Site& xi) {
  if (f.offset_count() != 1) throw std::invalid_argument("line slicing needs a single-offset lattice");
  bool zero = true;
  for (int k = 0; k < f.dimension(); ++k) zero = zero && xi[k] == 0;
  if (zero) throw std::invalid_argument("line direction must be nonzero");
}

bool in_box(const Window& w, const std::optional<CellBox>& box, const Site& local) {
  if (!box) return true;
  Site global{0, 0, 0};
  for (int k = 0; k < w.dim; ++k) global[k] = w.origin[k] + local[k];
  return box->contains(global, w.dim);
}

// Lines in direction xi carrying at least one jump whose outer endpoint lies in `box`.
std::int64_t lines_with_jump(const SpinField& f, const Site& xi, const std::optional<CellBox>& box) {
  const Window& w = f.window();
  const std::int64_t cells = w.cell_count();
  std::int64_t lines = 0;
  if (closed_lines(w, xi)) {
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(cells), 0);
    for (std::int64_t c = 0; c < cells; ++c) {
      if (visited[static_cast<std::size_t>(c)]) continue;
      const Site start = w.local_from_linear(c);
      Site cur = start;
      bool jump = false;
      do {
        visited[static_cast<std::size_t>(w.linear(cur))] = 1;
        Site next = cur;
        step(w, next, xi, 1);
        if (!jump && f.at_local(cur) != f.at_local(next) && in_box(w, box, cur)) jump = true;
        cur = next;
      } while (cur != start);
      if (jump) ++lines;
    }
    return lines;
  }
  // Open lines: sweep along a restricted axis that xi advances on, so the
  // predecessor c - xi is settled before c; has[c] marks a jump at or before c.
  const int d = w.dim;
  int lead = 0;
  for (int k = 0; k < d; ++k) {
    if (xi[k] != 0 && !w.periodic(k)) {
      lead = k;
      break;
    }
  }
  std::array<std::vector<std::uint8_t>, kMaxDim> inside;
  for (int k = 0; k < kMaxDim; ++k) {
    inside[k].assign(static_cast<std::size_t>(w.extent[k]), 1);
    if (!box || k >= d) continue;
    for (std::int64_t x = 0; x < w.extent[k]; ++x) {
      const std::int64_t g = w.origin[k] + x;
      inside[k][static_cast<std::size_t>(x)] = g >= box->lo[k] && g < box->hi[k];
    }
  }
  const Site stride{w.extent[1] * w.extent[2], w.extent[2], 1};
  // prev/next coordinate tables per axis; -1 where the step leaves a restricted axis.
  std::array<std::vector<std::int64_t>, kMaxDim> prev;
  std::array<std::vector<std::int64_t>, kMaxDim> next;
  for (int k = 0; k < kMaxDim; ++k) {
    const std::int64_t L = w.extent[k];
    prev[k].resize(static_cast<std::size_t>(L));
    next[k].resize(static_cast<std::size_t>(L));
    for (std::int64_t x = 0; x < L; ++x) {
      for (const int sgn : {-1, 1}) {
        std::int64_t y = x + sgn * xi[k];
        if (y < 0 || y >= L) {
          if (k < d && w.periodic(k)) {
            y %= L;
            if (y < 0) y += L;
          } else {
            y = -1;
          }
        }
        (sgn < 0 ? prev : next)[k][static_cast<std::size_t>(x)] = y < 0 ? -1 : y * stride[k];
      }
    }
  }
  const auto values = f.values();
  std::vector<std::uint8_t> has(static_cast<std::size_t>(cells), 0);
  int other[2] = {0, 0};
  int n_other = 0;
  for (int k = 0; k < kMaxDim; ++k) {
    if (k != lead) other[n_other++] = k;
  }
  if (w.extent[other[0]] > w.extent[other[1]]) std::swap(other[0], other[1]);
  const int inner = other[1];
  const std::int64_t* pin = prev[inner].data();
  const std::int64_t* nin = next[inner].data();
  const std::uint8_t* in_inner = inside[inner].data();
  const std::int64_t len = w.extent[lead];
  const std::int64_t n_inner = w.extent[inner];
  for (std::int64_t t = 0; t < len; ++t) {
    const std::int64_t a = xi[lead] > 0 ? t : len - 1 - t;
    const std::int64_t pa = prev[lead][static_cast<std::size_t>(a)];
    const std::int64_t na = next[lead][static_cast<std::size_t>(a)];
    const bool in_a = inside[lead][static_cast<std::size_t>(a)] != 0;
    for (std::int64_t b = 0; b < w.extent[other[0]]; ++b) {
      const std::int64_t pb = prev[other[0]][static_cast<std::size_t>(b)];
      const std::int64_t nb = next[other[0]][static_cast<std::size_t>(b)];
      const bool in_ab = in_a && inside[other[0]][static_cast<std::size_t>(b)] != 0;
      const std::int64_t base = a * stride[lead] + b * stride[other[0]];
      const bool p_ok = pa >= 0 && pb >= 0;
      const bool n_ok = na >= 0 && nb >= 0;
      for (std::int64_t c = 0; c < n_inner; ++c) {
        const std::int64_t idx = base + c * stride[inner];
        std::uint8_t h = 0;
        if (p_ok && pin[c] >= 0) h = has[static_cast<std::size_t>(pa + pb + pin[c])];
        const bool next_ok = n_ok && nin[c] >= 0;
        if (!h && next_ok && in_ab && in_inner[c]) {
          h = values[static_cast<std::size_t>(idx)] != values[static_cast<std::size_t>(na + nb + nin[c])];
        }
        has[static_cast<std::size_t>(idx)] = h;
        lines += !next_ok && h;
      }
    }
  }
  return lines;
}

}  // namespace

std::int64_t count_line_jumps(const SpinField& f, const Site& xi, const Site& base) {
  check_line_field(f, xi);
  const Window& w = f.window();
  Site local{0, 0, 0};
  for (int k = 0; k < w.dim; ++k) {
    if (base[k] < 0 || base[k] >= w.extent[k]) throw std::out_of_range("line base lies outside the window");
    local[k] = base[k];
  }
  std::int64_t jumps = 0;
  if (closed_lines(w, xi)) {
    Site cur = local;
    do {
      Site next = cur;
      step(w, next, xi, 1);
      if (f.at_local(cur) != f.at_local(next)) ++jumps;
      cur = next;
    } while (cur != local);
    return jumps;
  }
  Site cur = local;
  for (Site prev = cur; step(w, prev, xi, -1);) cur = prev;
  for (Site next = cur; step(w, next, xi, 1); cur = next) {
    if (f.at_local(cur) != f.at_local(next)) ++jumps;
  }
  return jumps;
}

double line_jump_lower_bound(const SpinField& f, const EnergyParams& p) {
  p.validate();
  if (p.kernel.dimension() != f.dimension()) throw std::invalid_argument("kernel and field dimensions differ");
  if (f.offset_count() != 1) throw std::invalid_argument("line slicing needs a single-offset lattice");
  if (p.mask.kind() != CoefficientMask::Kind::Full) throw std::invalid_argument("line slicing needs the full mask");
  const int d = f.dimension();
  auto shifts = enumerate_shifts(f.lattice(), p);

  // Without localization a line carries the same jumps in both orientations,
  // so xi and -xi are visited once with the summed weight.
  std::vector<Site> dirs;
  std::vector<double> weights;
  if (p.localization) {
    for (const auto& s : shifts) {
      if (s.weight == 0.0) continue;
      dirs.push_back(s.cell);
      weights.push_back(s.weight);
    }
  } else {
    std::map<Site, double> weight_of;
    for (const auto& s : shifts) weight_of[s.cell] = s.weight;
    for (const auto& s : shifts) {
      int sign = 0;
      for (int k = 0; k < d && sign == 0; ++k) sign = s.cell[k] > 0 ? 1 : (s.cell[k] < 0 ? -1 : 0);
      if (sign < 0) continue;
      Site neg{-s.cell[0], -s.cell[1], -s.cell[2]};
      const auto it = weight_of.find(neg);
      const double wsum = s.weight + (it == weight_of.end() ? 0.0 : it->second);
      if (wsum == 0.0) continue;
      dirs.push_back(s.cell);
      weights.push_back(wsum);
    }
  }

  std::vector<std::int64_t> lines(dirs.size(), 0);
  parallel_for(dirs.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) lines[i] = lines_with_jump(f, dirs[i], p.localization);
  });
  std::vector<double> terms(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) terms[i] = weights[i] * static_cast<double>(lines[i]);
  return pairwise_sum(terms) * std::pow(p.eps, d - 1) / std::pow(p.range_ratio(), d + 1);
}

}  // namespace latgamma
