#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pfsi/density.hpp"
#include "pfsi/oracles/cases.hpp"
#include "support.hpp"

using namespace pfsi;
constexpr double pi = std::numbers::pi;

TEST(Density, ZeroVelocityGivesConstant) {
  const auto d = fixtures::disc(2, 2, 8);
  DensitySolveOptions o;
  o.eps = 0.05;
  o.M = 1.7;
  const DensityField r = solve_density(FluidField(d.fluid, d.time), d.rho_grid, o);
  EXPECT_LE((r.values - 1.7).abs().maxCoeff(), 1e-14);
}

TEST(Density, MassPreservedPerSlice) {
  DomainSpec dom;
  dom.L = 1.3;
  dom.H = 0.6;
  const auto d = fixtures::disc(2, 2, 12, dom);
  FluidField u(d.fluid, d.time);
  fixtures::randomize(u, 41, 0.3);
  for (double eps : {0.1, 0.01}) {
    DensitySolveOptions o;
    o.eps = eps;
    o.M = 2.0 / dom.area();
    const DensityField r = solve_density(u, d.rho_grid, o);
    EXPECT_LE(r.max_mass_error(2.0), 1e-10 * 2.0) << eps;
  }
}

TEST(Density, ConvergedResidualSmall) {
  const auto d = fixtures::disc(2, 2, 12);
  FluidField u(d.fluid, d.time);
  fixtures::randomize(u, 42, 0.3);
  DensitySolveOptions o;
  o.eps = 0.1;
  const DensityField r = solve_density(u, d.rho_grid, o);
  const ContinuityResidual c = continuity_residual(r, u, o.eps, o.M);
  EXPECT_LE(c.weak_max, 1e-8);
}

TEST(ContinuityResidual, ConstantZeroVelocity) {
  const auto d = fixtures::disc(1, 2, 4);
  const auto c = continuity_residual(constant_density(d.rho_grid, 1.4), FluidField(d.fluid, d.time), 0.3, 1.4);
  EXPECT_LE(c.strong_l2, 1e-13);
  EXPECT_LE(c.weak_max, 1e-13);
}

TEST(ContinuityResidual, ClosedFormNonSolution) {
  const auto d = fixtures::disc(1, 2, 4);
  const double eps = 0.1, M = 1.0;
  DensityField r = constant_density(d.rho_grid, M);
  const Grid3& g = d.rho_grid;
  for (int it = 0; it < g.nt(); ++it)
    for (int iz = 0; iz < g.nz(); ++iz)
      for (int ix = 0; ix < g.nx(); ++ix) r.values(g.at(ix, iz, it)) += 0.1 * std::sin(2 * pi * g.x.node(ix));
  r.refresh_metadata();
  const auto c = continuity_residual(r, FluidField(d.fluid, d.time), eps, M);
  const double want = eps * (4 * pi * pi + 1.0) * 0.1 * std::sqrt(d.domain.area() * d.domain.T / 2.0);
  EXPECT_NEAR(c.strong_l2, want, 1e-12 * want);
}

TEST(Density, MatchesFiniteDifferenceOracle) {
  const auto r = oracles::density_fd_case(64, false);
  EXPECT_LE(r.deviation, 1e-4);
}

TEST(Density, CompressiveMatchesFiniteDifferenceOracle) {
  const auto r = oracles::density_fd_case(64, true);
  EXPECT_LE(r.deviation, 1e-4) << r.detail;
}

TEST(Density, RejectsBadOptions) {
  const auto d = fixtures::disc(1, 2, 4);
  DensitySolveOptions o;
  o.eps = 0.0;
  EXPECT_THROW(solve_density(FluidField(d.fluid, d.time), d.rho_grid, o), ConfigError);
}
