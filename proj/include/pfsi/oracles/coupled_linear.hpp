#pragma once

// Fixed point of the coupled map in the linear probe mode (frozen density,
// no convection or cubic damping, trace on z = 0), where the map is affine.
// The coupled residual
//   (structure residual of eta with v = trace of u, fluid residual of u with u~ = u, eta~ = eta)
// is assembled column by column and solved as one dense linear system.

#include <Eigen/Dense>

#include "pfsi/driver.hpp"

namespace pfsi::oracles {

inline Eigen::VectorXd coupled_residual(const Eigen::VectorXd& x, const CoupledState& tmpl, const DriverConfig& cfg) {
  const Discretization& d = *tmpl.disc;
  BeamState eta = tmpl.eta;
  FluidField u = tmpl.u;
  unpack(x, eta, u);
  const double eps = tmpl.stage.eps;
  const BeamField f = beam_forcing(cfg.forcing, d);
  const FluidField F = fluid_forcing(cfg.forcing, d);
  const PenaltyInput pin = penalty_input(u, eta, f, d, eps, true);
  const Eigen::MatrixXd rs = structure_residual(eta, pin);
  const DensityField rho = constant_density(d.rho_grid, cfg.M());
  FluidInputs in{&d, &rho, &u, &eta, &F};
  const Eigen::VectorXd rf = fluid_residual(u, in, fluid_params(cfg, tmpl.stage)).total();
  Eigen::VectorXd r(x.size());
  r << Eigen::Map<const Eigen::VectorXd>(rs.data(), rs.size()), rf;
  return r;
}

/// Packed (eta, u) of the coupled linear fixed point.
inline Eigen::VectorXd coupled_linear_fixed_point(const CoupledState& tmpl, const DriverConfig& cfg) {
  if (!cfg.freeze_density || !cfg.linear_fluid || !cfg.flat_trace) throw ConfigError("coupled_linear oracle: linear probe mode required");
  const Eigen::Index N = pack(tmpl.eta, tmpl.u).size();
  const Eigen::VectorXd r0 = coupled_residual(Eigen::VectorXd::Zero(N), tmpl, cfg);
  Eigen::MatrixXd A(N, N);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
  for (Eigen::Index j = 0; j < N; ++j) {
    e(j) = 1.0;
    A.col(j) = coupled_residual(e, tmpl, cfg) - r0;
    e(j) = 0.0;
  }
  return A.fullPivLu().solve(-r0);
}

}  // namespace pfsi::oracles
