#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>

#include "latgamma/energy.hpp"

namespace latgamma {

namespace {

// Only fftw_execute* is reentrant; planning goes through this lock.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double[], FftwFree>;
using ComplexBuf = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuf real_buf(std::size_t n) {
  auto* p = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  if (!p) throw std::bad_alloc();
  return RealBuf(p);
}

ComplexBuf complex_buf(std::size_t n) {
  auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!p) throw std::bad_alloc();
  return ComplexBuf(p);
}

std::int64_t next_smooth(std::int64_t n) {
  for (;; ++n) {
    std::int64_t r = n;
    for (const std::int64_t q : {2, 3, 5, 7}) {
      while (r % q == 0) r /= q;
    }
    if (r == 1) return n;
  }
}

class Plans {
 public:
  Plans(int rank, const int* n, double* r, fftw_complex* c) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c(rank, n, r, c, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r(rank, n, c, r, FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw NumericalFailure("FFTW could not create a plan");
  }
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;

  void forward(double* r, fftw_complex* c) const { fftw_execute_dft_r2c(fwd_, r, c); }
  void inverse(fftw_complex* c, double* r) const { fftw_execute_dft_c2r(inv_, c, r); }

 private:
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

}  // namespace

std::vector<std::int64_t> pair_counts_fft(const SpinField& f, const std::vector<Shift>& shifts,
                                          const EnergyParams& p) {
  p.validate();
  if (p.kernel.dimension() != f.dimension()) throw std::invalid_argument("kernel and field dimensions differ");
  if (p.mask.kind() == CoefficientMask::Kind::Custom) {
    throw std::invalid_argument("custom coefficient masks are only supported by the direct path");
  }
  std::vector<std::int64_t> counts(shifts.size(), 0);
  if (shifts.empty()) return counts;

  const Window& w = f.window();
  const int d = w.dim;
  const std::size_t m = f.offset_count();

  // Periodic axes correlate circularly on the window itself; restricted axes
  // are zero-padded so that no shift in range wraps back into the data.
  Site P{1, 1, 1};
  for (int k = 0; k < d; ++k) {
    if (w.periodic(k)) {
      P[k] = w.extent[k];
      continue;
    }
    std::int64_t reach = 0;
    for (const auto& s : shifts) reach = std::max(reach, std::abs(s.cell[k]));
    reach = std::min(reach, w.extent[k]);
    P[k] = next_smooth(w.extent[k] + reach);
  }
  const std::size_t total = static_cast<std::size_t>(P[0] * P[1] * P[2]);
  const std::int64_t half_last = P[d - 1] / 2 + 1;
  std::size_t spectral = static_cast<std::size_t>(half_last);
  for (int k = 0; k < d - 1; ++k) spectral *= static_cast<std::size_t>(P[k]);
  int dims[kMaxDim];
  for (int k = 0; k < d; ++k) dims[k] = static_cast<int>(P[k]);

  auto scratch_r = real_buf(total);
  auto scratch_c = complex_buf(spectral);
  const Plans plans(d, dims, scratch_r.get(), scratch_c.get());

  // Per offset: F(O u), F(O), F(I), F(I u) with I = in-window and unmasked,
  // O = I restricted to the localization box.
  std::vector<std::array<ComplexBuf, 4>> spectra(m);
  std::vector<std::array<RealBuf, 4>> planes(m);
  for (std::size_t a = 0; a < m; ++a) {
    for (auto& r : planes[a]) {
      r = real_buf(total);
      std::fill(r.get(), r.get() + total, 0.0);
    }
  }
  for (std::int64_t c = 0; c < w.cell_count(); ++c) {
    const Site local = w.local_from_linear(c);
    bool in_u = true;
    if (p.localization) {
      Site global{0, 0, 0};
      for (int k = 0; k < d; ++k) global[k] = w.origin[k] + local[k];
      in_u = p.localization->contains(global, d);
    }
    const std::size_t idx = static_cast<std::size_t>((local[0] * P[1] + local[1]) * P[2] + local[2]);
    for (std::size_t a = 0; a < m; ++a) {
      const double site = p.mask.site_masked(f.lattice_coord(local, a), d) ? 0.0 : 1.0;
      const double u = f.at(c, a);
      const double o = in_u ? site : 0.0;
      planes[a][0][idx] = o * u;
      planes[a][1][idx] = o;
      planes[a][2][idx] = site;
      planes[a][3][idx] = site * u;
    }
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (int j = 0; j < 4; ++j) {
      spectra[a][j] = complex_buf(spectral);
      plans.forward(planes[a][j].get(), spectra[a][j].get());
      planes[a][j].reset();
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    if (shifts[i].from >= m || shifts[i].to >= m) throw std::out_of_range("shift offset out of range");
    groups[{shifts[i].from, shifts[i].to}].push_back(i);
  }

  const double tolerance = 1e-6 * static_cast<double>(f.site_count());
  for (const auto& [pair, members] : groups) {
    const auto& A = spectra[pair.first];
    const auto& B = spectra[pair.second];
    // N = corr(Ou, I) + corr(O, Iu) - 2 corr(Ou, Iu), corr(f, g) = IFFT(conj(Ff) Fg).
    for (std::size_t q = 0; q < spectral; ++q) {
      const std::complex<double> ou(A[0][q][0], -A[0][q][1]);
      const std::complex<double> o(A[1][q][0], -A[1][q][1]);
      const std::complex<double> in(B[2][q][0], B[2][q][1]);
      const std::complex<double> inu(B[3][q][0], B[3][q][1]);
      const std::complex<double> s = ou * in + o * inu - 2.0 * ou * inu;
      scratch_c[q][0] = s.real();
      scratch_c[q][1] = s.imag();
    }
    plans.inverse(scratch_c.get(), scratch_r.get());
    for (const std::size_t i : members) {
      const Site& xi = shifts[i].cell;
      bool reachable = true;
      Site pos{0, 0, 0};
      for (int k = 0; k < d; ++k) {
        if (!w.periodic(k) && std::abs(xi[k]) >= w.extent[k]) reachable = false;
        pos[k] = ((xi[k] % P[k]) + P[k]) % P[k];
      }
      if (!reachable) continue;
      const std::size_t idx = static_cast<std::size_t>((pos[0] * P[1] + pos[1]) * P[2] + pos[2]);
      const double v = scratch_r[idx] / static_cast<double>(total);
      const double r = std::round(v);
      if (std::abs(v - r) > tolerance || r < 0.0) {
        throw NumericalFailure("FFT pair count residue " + format_real(std::abs(v - r)) + " exceeds tolerance");
      }
      counts[i] = static_cast<std::int64_t>(r);
    }
  }
  return counts;
}

}  // namespace latgamma
