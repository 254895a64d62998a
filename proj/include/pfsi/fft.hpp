#pragma once

// Thin FFTW wrapper for real 3D periodic grids plus spectral resampling.
//
// Layout follows Grid3: dimensions (nt, nz, nx), row-major, x fastest. Spectra
// are the r2c half-spectra normalised so that entries are the Fourier
// coefficients c_k of f(y) = sum_k c_k exp(i k . y).

#include <fftw3.h>

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "pfsi/errors.hpp"

namespace pfsi {

using cplx = std::complex<double>;

struct Dims3 {
  int nx = 1, nz = 1, nt = 1;
  Eigen::Index real_size() const { return Eigen::Index(nx) * nz * nt; }
  int hx() const { return nx / 2 + 1; }
  Eigen::Index spec_size() const { return Eigen::Index(hx()) * nz * nt; }
  bool operator==(const Dims3&) const = default;
  auto key() const { return std::make_tuple(nt, nz, nx); }
};

/// Signed wavenumber of FFT index i on an n-point grid.
inline int signed_index(int i, int n) { return (2 * i <= n) ? i : i - n; }
/// Mode k is carried by an n-point grid without ambiguity (strictly below Nyquist).
inline bool retained(int k, int n) { return 2 * std::abs(k) < n; }

namespace detail {

class FftPlan {
 public:
  explicit FftPlan(Dims3 d) : d_(d) {
    real_ = fftw_alloc_real(static_cast<size_t>(d.real_size()));
    spec_ = fftw_alloc_complex(static_cast<size_t>(d.spec_size()));
    fwd_ = fftw_plan_dft_r2c_3d(d.nt, d.nz, d.nx, real_, spec_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_3d(d.nt, d.nz, d.nx, spec_, real_, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw InternalError("FFTW plan creation failed");
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  void forward(const double* in, cplx* out) {
    std::lock_guard<std::mutex> lk(mu_);
    std::copy(in, in + d_.real_size(), real_);
    fftw_execute(fwd_);
    const double s = 1.0 / static_cast<double>(d_.real_size());
    auto* c = reinterpret_cast<cplx*>(spec_);
    for (Eigen::Index i = 0; i < d_.spec_size(); ++i) out[i] = c[i] * s;
  }

  void inverse(const cplx* in, double* out) {
    std::lock_guard<std::mutex> lk(mu_);
    std::copy(in, in + d_.spec_size(), reinterpret_cast<cplx*>(spec_));
    fftw_execute(bwd_);
    std::copy(real_, real_ + d_.real_size(), out);
  }

 private:
  Dims3 d_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
  std::mutex mu_;
};

inline FftPlan& plan_for(Dims3 d) {
  // FFTW's planner is not thread-safe; plans are created under this lock and
  // live for the whole process.
  static std::mutex registry_mu;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<FftPlan>> registry;
  std::lock_guard<std::mutex> lk(registry_mu);
  auto& slot = registry[d.key()];
  if (!slot) slot = std::make_unique<FftPlan>(d);
  return *slot;
}

}  // namespace detail

struct Spectrum3 {
  Dims3 dims;
  std::vector<cplx> c;

  explicit Spectrum3(Dims3 d = {}) : dims(d), c(static_cast<size_t>(d.spec_size()), cplx(0.0)) {}

  Eigen::Index at(int ix, int iz, int it) const { return (Eigen::Index(it) * dims.nz + iz) * dims.hx() + ix; }
  cplx& operator()(int ix, int iz, int it) { return c[static_cast<size_t>(at(ix, iz, it))]; }
  const cplx& operator()(int ix, int iz, int it) const { return c[static_cast<size_t>(at(ix, iz, it))]; }

  /// Visit every stored coefficient with its signed wavenumbers (kx, kz, kt).
  template <class F>
  void for_each(F&& f) {
    for (int it = 0; it < dims.nt; ++it)
      for (int iz = 0; iz < dims.nz; ++iz)
        for (int ix = 0; ix < dims.hx(); ++ix)
          f(ix, iz, it, ix, signed_index(iz, dims.nz), signed_index(it, dims.nt), (*this)(ix, iz, it));
  }

  /// True when every wavenumber of the entry is strictly below its Nyquist.
  bool is_retained(int ix, int iz, int it) const {
    return retained(ix, dims.nx) && retained(signed_index(iz, dims.nz), dims.nz) &&
           retained(signed_index(it, dims.nt), dims.nt);
  }
};

inline Spectrum3 fft_forward(const Eigen::ArrayXd& values, Dims3 d) {
  if (values.size() != d.real_size()) throw ConfigError("fft_forward: grid size mismatch");
  Spectrum3 s(d);
  detail::plan_for(d).forward(values.data(), s.c.data());
  return s;
}

inline Eigen::ArrayXd fft_inverse(const Spectrum3& s) {
  Eigen::ArrayXd out(s.dims.real_size());
  detail::plan_for(s.dims).inverse(s.c.data(), out.data());
  return out;
}

/// Copy the modes representable on both grids (Nyquist modes dropped).
inline Spectrum3 resample(const Spectrum3& src, Dims3 to) {
  Spectrum3 dst(to);
  for (int it = 0; it < to.nt; ++it) {
    const int kt = signed_index(it, to.nt);
    if (!retained(kt, to.nt) || !retained(kt, src.dims.nt)) continue;
    const int st = kt >= 0 ? kt : kt + src.dims.nt;
    for (int iz = 0; iz < to.nz; ++iz) {
      const int kz = signed_index(iz, to.nz);
      if (!retained(kz, to.nz) || !retained(kz, src.dims.nz)) continue;
      const int sz = kz >= 0 ? kz : kz + src.dims.nz;
      for (int ix = 0; ix < to.hx(); ++ix) {
        if (!retained(ix, to.nx) || !retained(ix, src.dims.nx)) continue;
        dst(ix, iz, it) = src(ix, sz, st);
      }
    }
  }
  return dst;
}

/// Trigonometric interpolation of grid values onto another grid size.
inline Eigen::ArrayXd interpolate(const Eigen::ArrayXd& values, Dims3 from, Dims3 to) {
  return fft_inverse(resample(fft_forward(values, from), to));
}

/// Pointwise product of two or three band-limited grid functions, formed on a
/// grid with twice the nodes per direction and truncated back to the modes
/// retained by the operand grid.
inline Eigen::ArrayXd dealiased_product(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b, Dims3 d,
                                        const Eigen::ArrayXd* c = nullptr) {
  if (a.size() != d.real_size() || b.size() != d.real_size() || (c && c->size() != d.real_size()))
    throw ConfigError("dealiased_product: operand grids do not conform");
  const Dims3 pad{d.nx > 1 ? 2 * d.nx : 1, d.nz > 1 ? 2 * d.nz : 1, d.nt > 1 ? 2 * d.nt : 1};
  Eigen::ArrayXd prod = interpolate(a, d, pad) * interpolate(b, d, pad);
  if (c) prod *= interpolate(*c, d, pad);
  return fft_inverse(resample(fft_forward(prod, pad), d));
}

}  // namespace pfsi
