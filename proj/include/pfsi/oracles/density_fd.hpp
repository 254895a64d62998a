#pragma once

// Damped continuity equation by fourth-order central finite differences on a
// uniform periodic space-time grid (default 64^3), flux form:
//   D_t rho + D_x(rho u1) + D_z(rho u2) - eps (D_xx + D_zz) rho + eps rho = eps M.
// Matrix-free GMRES, preconditioned by the FFT-diagonal constant-coefficient part.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>

#include "pfsi/fft.hpp"
#include "pfsi/krylov.hpp"
#include "pfsi/trig.hpp"

namespace pfsi::oracles {

using Velocity = std::function<void(double t, double x, double z, double& u1, double& u2)>;

struct DensityFdResult {
  Grid3 grid;
  Eigen::ArrayXd rho;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline int wrap(int i, int n) { return (i % n + n) % n; }

}  // namespace detail

inline DensityFdResult density_fd(const Velocity& u, double L, double H, double T, double eps, double M, int n = 64, double tol = 1e-12) {
  using detail::wrap;
  const Grid3 g{UniformGrid1D{0.0, L, n}, UniformGrid1D{-H, 2.0 * H, n}, UniformGrid1D{0.0, T, n}};
  const double hx = g.x.weight(), hz = g.z.weight(), ht = g.t.weight();
  Eigen::ArrayXd u1(g.size()), u2(g.size());
  for (int it = 0; it < n; ++it)
    for (int iz = 0; iz < n; ++iz)
      for (int ix = 0; ix < n; ++ix) u(g.t.node(it), g.x.node(ix), g.z.node(iz), u1(g.at(ix, iz, it)), u2(g.at(ix, iz, it)));

  auto d1 = [&](const Eigen::ArrayXd& f, int ix, int iz, int it, int dir, double h) {
    auto F = [&](int s) {
      if (dir == 0) return f(g.at(wrap(ix + s, n), iz, it));
      if (dir == 1) return f(g.at(ix, wrap(iz + s, n), it));
      return f(g.at(ix, iz, wrap(it + s, n)));
    };
    return (-F(2) + 8.0 * F(1) - 8.0 * F(-1) + F(-2)) / (12.0 * h);
  };
  auto d2 = [&](const Eigen::ArrayXd& f, int ix, int iz, int it, int dir, double h) {
    auto F = [&](int s) { return dir == 0 ? f(g.at(wrap(ix + s, n), iz, it)) : f(g.at(ix, wrap(iz + s, n), it)); };
    return (-F(2) + 16.0 * F(1) - 30.0 * F(0) + 16.0 * F(-1) - F(-2)) / (12.0 * h * h);
  };

  auto apply = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    const Eigen::ArrayXd rho = r.array();
    const Eigen::ArrayXd q1 = rho * u1, q2 = rho * u2;
    Eigen::VectorXd out(g.size());
    for (int it = 0; it < n; ++it)
      for (int iz = 0; iz < n; ++iz)
        for (int ix = 0; ix < n; ++ix) {
          const Eigen::Index k = g.at(ix, iz, it);
          out(k) = d1(rho, ix, iz, it, 2, ht) + d1(q1, ix, iz, it, 0, hx) + d1(q2, ix, iz, it, 1, hz) -
                   eps * (d2(rho, ix, iz, it, 0, hx) + d2(rho, ix, iz, it, 1, hz)) + eps * rho(k);
        }
    return out;
  };

  const Dims3 dims{n, n, n};
  auto first = [n](int k, double h) {
    const double th = 2.0 * std::numbers::pi * k / n;
    return (8.0 * std::sin(th) - std::sin(2.0 * th)) / (6.0 * h);
  };
  auto second = [n](int k, double h) {
    const double th = 2.0 * std::numbers::pi * k / n;
    return (30.0 - 32.0 * std::cos(th) + 2.0 * std::cos(2.0 * th)) / (12.0 * h * h);
  };
  auto precondition = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Spectrum3 s = fft_forward(v.array(), dims);
    s.for_each([&](int, int, int, int kx, int kz, int kt, cplx& c) {
      c /= cplx(eps * (second(kx, hx) + second(kz, hz) + 1.0), first(kt, ht));
    });
    return fft_inverse(s).matrix();
  };

  const Eigen::VectorXd b = Eigen::VectorXd::Constant(g.size(), eps * M);
  const KrylovResult kr = gmres(apply, precondition, b, Eigen::VectorXd::Constant(g.size(), M), KrylovOptions{tol, 60, 2000});
  return DensityFdResult{g, kr.x.array(), kr.iterations, kr.converged};
}

}  // namespace pfsi::oracles
