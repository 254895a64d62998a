#pragma once

// Time-periodic damped continuity equation
//   d_t rho + div(rho u) - eps lap(rho) + eps rho = eps M
// by space-time Fourier Galerkin on a collocation grid. The unknown is the
// vector of grid values; the operator acts mode-wise with the flux rho u
// formed on the doubly refined grid.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pfsi/basis.hpp"
#include "pfsi/fft.hpp"
#include "pfsi/krylov.hpp"

namespace pfsi {

struct DensitySolveOptions {
  double eps = 0.1;
  double M = 1.0;
  double tol = 1e-10;
  int max_iter = 4000;
  int restart = 80;
  Eigen::Index dense_threshold = 1500;  // unknowns; dense LU at or below
  double negativity_tol = 0.0;

  void validate() const {
    if (!(eps > 0.0)) throw ConfigError("density: eps must be positive");
    if (!(M > 0.0)) throw ConfigError("density: M must be positive");
    if (!(tol > 0.0)) throw ConfigError("density: tol must be positive");
  }
};

struct DensityField {
  Grid3 grid;
  Eigen::ArrayXd values;
  std::vector<double> slice_mass;
  double min_value = 0.0;
  bool negative = false;  // min below -negativity_tol
  int iterations = 0;
  double linear_residual = 0.0;

  Dims3 dims() const { return Dims3{grid.nx(), grid.nz(), grid.nt()}; }
  Spectrum3 spectrum() const { return fft_forward(values, dims()); }

  void refresh_metadata(double negativity_tol = 0.0) {
    const double cell_xz = grid.x.weight() * grid.z.weight();
    const Eigen::Index slab = Eigen::Index(grid.nx()) * grid.nz();
    slice_mass.assign(static_cast<size_t>(grid.nt()), 0.0);
    for (int t = 0; t < grid.nt(); ++t) slice_mass[static_cast<size_t>(t)] = cell_xz * values.segment(slab * t, slab).sum();
    min_value = values.minCoeff();
    negative = min_value < -negativity_tol;
  }

  double max_mass_error(double m0) const {
    double e = 0.0;
    for (double s : slice_mass) e = std::max(e, std::abs(s - m0));
    return e;
  }
};

inline DensityField constant_density(const Grid3& g, double M) {
  DensityField r{g, Eigen::ArrayXd::Constant(g.size(), M)};
  r.refresh_metadata();
  return r;
}

/// Physical wavenumbers of the three grid directions.
inline double angular(const UniformGrid1D& g, int k) { return 2.0 * std::numbers::pi * k / g.period; }

/// Spectral derivative d^(dx,dz,dt) of grid values, returned on another grid
/// (trigonometric interpolation; Nyquist modes dropped).
inline Eigen::ArrayXd spectral_eval(const Eigen::ArrayXd& values, const Grid3& from, const Grid3& to, int dx = 0, int dz = 0,
                                    int dt = 0) {
  const Dims3 df{from.nx(), from.nz(), from.nt()}, dto{to.nx(), to.nz(), to.nt()};
  Spectrum3 s = resample(fft_forward(values, df), dto);
  if (dx || dz || dt) {
    s.for_each([&](int, int, int, int kx, int kz, int kt, cplx& c) {
      const cplx f = std::pow(cplx(0.0, angular(to.x, kx)), dx) * std::pow(cplx(0.0, angular(to.z, kz)), dz) *
                     std::pow(cplx(0.0, angular(to.t, kt)), dt);
      c *= f;
    });
  }
  return fft_inverse(s);
}

namespace detail {

/// Mode-wise action of the damped continuity operator.
class ContinuityOperator {
 public:
  ContinuityOperator(const FluidField& u, const Grid3& g, double eps) : g_(g), eps_(eps) {
    d_ = Dims3{g.nx(), g.nz(), g.nt()};
    pad_ = Dims3{2 * g.nx(), 2 * g.nz(), 2 * g.nt()};
    const Grid3 pg = make_grid_like(g, 2);
    VectorGrid up = evaluate(u, pg);
    ux_ = std::move(up.c[0]);
    uz_ = std::move(up.c[1]);
  }

  static Grid3 make_grid_like(const Grid3& g, int factor) {
    return Grid3{UniformGrid1D{g.x.origin, g.x.period, factor * g.nx()}, UniformGrid1D{g.z.origin, g.z.period, factor * g.nz()},
                 UniformGrid1D{g.t.origin, g.t.period, factor * g.nt()}};
  }

  cplx symbol(int kx, int kz, int kt) const {
    const double wx = angular(g_.x, kx), wz = angular(g_.z, kz), wt = angular(g_.t, kt);
    return cplx(eps_ * (wx * wx + wz * wz + 1.0), wt);
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& rho) const {
    const Eigen::ArrayXd r = rho.array();
    Spectrum3 s = fft_forward(r, d_);
    const Eigen::ArrayXd rp = fft_inverse(resample(s, pad_));
    const Spectrum3 qx = resample(fft_forward(rp * ux_, pad_), d_);
    const Spectrum3 qz = resample(fft_forward(rp * uz_, pad_), d_);
    s.for_each([&](int ix, int iz, int it, int kx, int kz, int kt, cplx& c) {
      if (!s.is_retained(ix, iz, it)) return;  // Nyquist: identity
      c = symbol(kx, kz, kt) * c + cplx(0.0, angular(g_.x, kx)) * qx(ix, iz, it) + cplx(0.0, angular(g_.z, kz)) * qz(ix, iz, it);
    });
    return fft_inverse(s).matrix();
  }

  Eigen::VectorXd precondition(const Eigen::VectorXd& v) const {
    Spectrum3 s = fft_forward(v.array(), d_);
    s.for_each([&](int ix, int iz, int it, int kx, int kz, int kt, cplx& c) {
      if (s.is_retained(ix, iz, it)) c /= symbol(kx, kz, kt);
    });
    return fft_inverse(s).matrix();
  }

  Dims3 dims() const { return d_; }

 private:
  Grid3 g_;
  double eps_;
  Dims3 d_, pad_;
  Eigen::ArrayXd ux_, uz_;
};

}  // namespace detail

/// Solves the damped continuity equation for the given velocity on grid g.
/// `warm` (optional) seeds the Krylov iteration.
inline DensityField solve_density(const FluidField& u, const Grid3& g, const DensitySolveOptions& opts,
                                  const DensityField* warm = nullptr) {
  opts.validate();
  if (g.nx() % 2 || g.nz() % 2 || g.nt() % 2) throw ConfigError("solve_density: collocation grid sizes must be even");
  if (std::abs(g.x.period - u.space->L()) > 1e-14 * u.space->L() || std::abs(g.z.period - 2.0 * u.space->H()) > 1e-14 * u.space->H() ||
      std::abs(g.t.period - u.time->T()) > 1e-14 * u.time->T())
    throw ConfigError("solve_density: grid does not match the field's domain");
  const detail::ContinuityOperator op(u, g, opts.eps);
  const Eigen::Index N = g.size();
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(N, opts.eps * opts.M);

  DensityField out;
  out.grid = g;
  if (N <= opts.dense_threshold) {
    Eigen::MatrixXd A(N, N);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    for (Eigen::Index j = 0; j < N; ++j) {
      e(j) = 1.0;
      A.col(j) = op.apply(e);
      e(j) = 0.0;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    out.values = lu.solve(b).array();
    out.linear_residual = (A * out.values.matrix() - b).norm() / b.norm();
    if (!std::isfinite(out.linear_residual) || out.linear_residual > 1e3 * opts.tol)
      throw SolverError("solve_density: dense solve failed", {out.linear_residual});
  } else {
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(N, opts.M);
    if (warm && warm->grid.conforms(g)) x0 = warm->values.matrix();
    KrylovOptions ko{opts.tol, opts.restart, opts.max_iter};
    KrylovResult kr = gmres([&](const Eigen::VectorXd& v) { return op.apply(v); },
                            [&](const Eigen::VectorXd& v) { return op.precondition(v); }, b, x0, ko);
    out.iterations = kr.iterations;
    out.linear_residual = kr.history.empty() ? 0.0 : kr.history.back();
    if (!kr.converged)
    {
      std::ostringstream msg;
      msg << "solve_density: GMRES did not converge in " << kr.iterations << " iterations (relative residual " << std::scientific
          << out.linear_residual << ")";
      throw SolverError(msg.str(), kr.history);
    }
    out.values = kr.x.array();
  }
  // The spatial-mean modes decouple exactly (the flux has no such component):
  // (i w k_t + eps) rho_hat = eps M delta_{k_t,0}. Set them to their exact values.
  Spectrum3 s = fft_forward(out.values, op.dims());
  for (int it = 0; it < g.nt(); ++it) s(0, 0, it) = it == 0 ? cplx(opts.M, 0.0) : cplx(0.0);
  out.values = fft_inverse(s);
  out.refresh_metadata(opts.negativity_tol);
  return out;
}

struct ContinuityResidual {
  double strong_l2 = 0.0;      // || d_t rho + div(rho u) - eps lap rho + eps (rho - M) ||_{L2(Q_T)}
  double weak_max = 0.0;       // max over retained Fourier modes of the tested residual
  double transport_max = 0.0;  // same for the eps-free part <rho, d_t phi + u . grad phi>
};

/// Residual of the damped continuity equation; eps = 0 gives the plain weak
/// continuity equation.
inline ContinuityResidual continuity_residual(const DensityField& rho, const FluidField& u, double eps, double M) {
  const Grid3& g = rho.grid;
  const Grid3 pg = detail::ContinuityOperator::make_grid_like(g, 2);
  const Dims3 pd{pg.nx(), pg.nz(), pg.nt()};
  const Eigen::ArrayXd r = spectral_eval(rho.values, g, pg);
  const Eigen::ArrayXd rx = spectral_eval(rho.values, g, pg, 1, 0, 0);
  const Eigen::ArrayXd rz = spectral_eval(rho.values, g, pg, 0, 1, 0);
  const Eigen::ArrayXd rt = spectral_eval(rho.values, g, pg, 0, 0, 1);
  const Eigen::ArrayXd lap = spectral_eval(rho.values, g, pg, 2, 0, 0) + spectral_eval(rho.values, g, pg, 0, 2, 0);
  const VectorGrid uv = evaluate(u, pg);
  const Eigen::ArrayXd ux_x = evaluate(u, pg, 0, 1, 0).c[0];
  const Eigen::ArrayXd uz_z = evaluate(u, pg, 0, 0, 1).c[1];
  const Eigen::ArrayXd transport = rt + uv.c[0] * rx + uv.c[1] * rz + r * (ux_x + uz_z);
  const Eigen::ArrayXd full = transport - eps * lap + eps * (r - M);

  ContinuityResidual out;
  out.strong_l2 = std::sqrt(pg.cell() * full.square().sum());
  const double vol = g.x.period * g.z.period * g.t.period;
  const Spectrum3 sf = resample(fft_forward(full, pd), rho.dims());
  const Spectrum3 st = resample(fft_forward(transport, pd), rho.dims());
  for (size_t k = 0; k < sf.c.size(); ++k) {
    out.weak_max = std::max(out.weak_max, vol * std::abs(sf.c[k]));
    out.transport_max = std::max(out.transport_max, vol * std::abs(st.c[k]));
  }
  return out;
}

}  // namespace pfsi
