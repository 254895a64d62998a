#pragma once

// Bases plus the quadrature/collocation grids shared by all solvers.
//
//  rho_grid       collocation grid of the density (N per direction)
//  coupling_grid  2N per direction; every integral containing rho is taken
//                 here (exact for rho * u * u * grad(phi) products)
//  fluid_grid     4K + 2 per direction; exact for quartic velocity products
//  beam_grid      (nt x nx) grid on Gamma_T; all trace integrals

#include <algorithm>
#include <memory>

#include "pfsi/basis.hpp"
#include "pfsi/fft.hpp"
#include "pfsi/geometry.hpp"

namespace pfsi {

struct DiscretizationSpec {
  int m = 2;
  int n_beam = 4;
  int n_fluid = 12;
  // 0 selects the automatic size
  int rho_nx = 0, rho_nz = 0, rho_nt = 0;
  int beam_nx = 0, beam_nt = 0;

  void validate() const {
    if (m < 0) throw ConfigError("discretization: m must be >= 0");
    if (n_beam < 1) throw ConfigError("discretization: n_beam must be >= 1");
    if (n_fluid < 1) throw ConfigError("discretization: n_fluid must be >= 1");
    for (int v : {rho_nx, rho_nz, rho_nt})
      if (v < 0 || v % 2 != 0) throw ConfigError("discretization: density grid sizes must be even (or 0 for auto)");
    if (beam_nx < 0 || beam_nt < 0) throw ConfigError("discretization: beam grid sizes must be >= 0");
  }
};

struct Discretization {
  DomainSpec domain;
  DiscretizationSpec spec;
  std::shared_ptr<const TimeBasis> time;
  std::shared_ptr<const BeamBasis> beam;
  std::shared_ptr<const FluidBasis> fluid;
  Grid3 rho_grid, coupling_grid, fluid_grid;
  Grid2 beam_grid;

  static Dims3 dims(const Grid3& g) { return Dims3{g.nx(), g.nz(), g.nt()}; }
};

inline int auto_density_nodes(int K) {
  int n = std::max(16, 4 * K + 4);
  return n + (n % 2);
}

inline Discretization make_discretization(const DomainSpec& dom, const DiscretizationSpec& s) {
  dom.validate();
  s.validate();
  Discretization d;
  d.domain = dom;
  d.spec = s;
  d.time = make_time_basis(dom.T, s.m);
  d.beam = make_beam_basis(dom.L, s.n_beam);
  d.fluid = make_fluid_basis(dom.L, dom.H, s.n_fluid);
  const int Kx = d.fluid->xfam.K, Kz = d.fluid->zfam.K, Kt = s.m, Kb = d.beam->fam.K;
  const int nx = s.rho_nx ? s.rho_nx : auto_density_nodes(Kx);
  const int nz = s.rho_nz ? s.rho_nz : auto_density_nodes(Kz);
  const int nt = s.rho_nt ? s.rho_nt : auto_density_nodes(Kt);
  d.rho_grid = make_grid(dom, nx, nz, nt);
  d.coupling_grid = make_grid(dom, 2 * nx, 2 * nz, 2 * nt);
  d.fluid_grid = make_grid(dom, 4 * Kx + 2, 4 * Kz + 2, 4 * Kt + 2);
  const int bx = s.beam_nx ? s.beam_nx : std::max(32, 8 * std::max(Kb, Kx) + 2);
  const int bt = s.beam_nt ? s.beam_nt : std::max(32, 8 * Kt + 2);
  d.beam_grid = make_beam_grid(dom, bx, bt);
  return d;
}

}  // namespace pfsi
