#pragma once

// Root of the fluid weak residual by Newton iteration with central
// finite-difference Jacobians; the residual is evaluated term by term on
// grids and never touches the assembled solver matrices.

#include <Eigen/Dense>

#include "pfsi/fluid.hpp"

namespace pfsi::oracles {

struct FluidFdResult {
  FluidField u;
  int iterations = 0;
  double residual = 0.0;
};

inline FluidFdResult fluid_fd_root(const FluidInputs& in, const FluidParams& p, double tol = 1e-13, int max_iter = 30, double h = 1e-6) {
  const Discretization& d = *in.disc;
  FluidField u(d.fluid, d.time);
  auto R = [&](const Eigen::VectorXd& c) {
    u.set_vec(c);
    return fluid_residual(u, in, p).total();
  };
  const Eigen::Index N = u.coef.size();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd r = R(c);
  const double scale = std::max(1.0, r.norm());
  FluidFdResult out;
  for (int k = 0; k < max_iter && r.norm() > tol * scale; ++k) {
    Eigen::MatrixXd J(N, N);
    for (Eigen::Index j = 0; j < N; ++j) {
      Eigen::VectorXd cp = c, cm = c;
      cp(j) += h;
      cm(j) -= h;
      J.col(j) = (R(cp) - R(cm)) / (2.0 * h);
    }
    c -= J.fullPivLu().solve(r);
    r = R(c);
    out.iterations = k + 1;
  }
  out.u = FluidField(d.fluid, d.time);
  out.u.set_vec(c);
  out.residual = r.norm();
  return out;
}

}  // namespace pfsi::oracles
