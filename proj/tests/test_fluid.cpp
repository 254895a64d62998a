#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pfsi/fluid.hpp"
#include "pfsi/oracles/cases.hpp"
#include "support.hpp"

using namespace pfsi;
constexpr double pi = std::numbers::pi;

namespace {

int mode_index(const FluidBasis& b, int ix, int iz, int comp) {
  for (int i = 0; i < b.size(); ++i) {
    const auto& m = b.modes[static_cast<size_t>(i)];
    if (m.ix == ix && m.iz == iz && m.comp == comp) return i;
  }
  return -1;
}

struct FluidCase {
  Discretization d;
  DensityField rho;
  FluidField ulag;
  BeamState eta;
  FluidParams p;
  explicit FluidCase(Discretization dd, double M = 1.0)
      : d(std::move(dd)), rho(constant_density(d.rho_grid, M)), ulag(d.fluid, d.time), eta{BeamField(d.beam, d.time)} {
    p.M = M;
  }
  FluidInputs inputs(const FluidField* F = nullptr) const { return FluidInputs{&d, &rho, &ulag, &eta, F}; }
};

}  // namespace

TEST(ViscousForm, ConstantsDecouple) {
  const auto b = make_fluid_basis(1.0, 1.0, 12);
  const auto v = assemble_viscous_form(*b, 1.3, 0.7);
  for (int c : {0, 1}) {
    EXPECT_EQ(v.A.row(c).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(v.A.col(c).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(ViscousForm, ClosedFormShearFreeMode) {
  const double L = 1.4, H = 0.8, mu = 1.3, zeta = 0.6;
  const auto b = make_fluid_basis(L, H, 20);
  const int i = mode_index(*b, TrigFamily::index(1, TrigKind::Sin), 0, 0);
  ASSERT_GE(i, 0);
  const double s = b->modes[static_cast<size_t>(i)].scale;
  const auto v = assemble_viscous_form(*b, mu, zeta);
  const double k = 2 * pi / L, area = 2 * L * H;
  const double want = mu * k * k * area / 2 * (2 - 1) + zeta * k * k * area / 2;
  EXPECT_NEAR(v.A(i, i) / (s * s), want, 1e-12 * want);
}

TEST(ViscousForm, Symmetric) {
  const auto b = make_fluid_basis(1.0, 0.7, 30);
  const auto v = assemble_viscous_form(*b, 2.0, 0.4);
  EXPECT_LE((v.A - v.A.transpose()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(FluidResidual, RestStateVanishes) {
  FluidCase s(fixtures::disc(2, 2, 10), 1.3);
  s.p.gamma = 1.4;
  const FluidResidual R = fluid_residual(FluidField(s.d.fluid, s.d.time), s.inputs(), s.p);
  EXPECT_LE(R.total().cwiseAbs().maxCoeff(), 1e-13);
}

TEST(FluidResidual, PressureSpotCheck) {
  FluidCase s(fixtures::disc(1, 2, 14));  // completes the k^2 = 4 pi^2 shell
  s.p.delta = 0.0;
  s.p.gamma = 2.0;
  const Grid3& g = s.d.rho_grid;
  for (int it = 0; it < g.nt(); ++it)
    for (int iz = 0; iz < g.nz(); ++iz)
      for (int ix = 0; ix < g.nx(); ++ix) s.rho.values(g.at(ix, iz, it)) += 0.1 * std::cos(2 * pi * g.x.node(ix));
  const FluidResidual R = fluid_residual(FluidField(s.d.fluid, s.d.time), s.inputs(), s.p);
  const FluidBasis& b = *s.d.fluid;
  const int n = b.size();
  const int is = mode_index(b, TrigFamily::index(1, TrigKind::Sin), 0, 0);
  const int ic = mode_index(b, TrigFamily::index(1, TrigKind::Cos), 0, 0);
  ASSERT_GE(is, 0);
  ASSERT_GE(ic, 0);
  // int (M + 0.1 cos kx)^2 d_x sin(kx) over Omega x (0, T), M = 1
  const double k = 2 * pi, want = b.modes[static_cast<size_t>(is)].scale * 0.2 * k * s.d.domain.area() / 2 * s.d.domain.T;
  EXPECT_NEAR(R.pressure(is), want, 1e-12 * want);
  for (int j = 0; j < R.pressure.size(); ++j)
    if (j != is) EXPECT_LE(std::abs(R.pressure(j)), 1e-12) << j << " of " << n;
}

TEST(FluidResidual, CubicTermMonotone) {
  FluidCase s(fixtures::disc(1, 2, 8));
  FluidField u(s.d.fluid, s.d.time), w(s.d.fluid, s.d.time);
  for (unsigned seed = 0; seed < 8; ++seed) {
    fixtures::randomize(u, 100 + seed);
    fixtures::randomize(w, 200 + seed);
    const Eigen::VectorXd ru = fluid_residual(u, s.inputs(), s.p).cubic, rw = fluid_residual(w, s.inputs(), s.p).cubic;
    EXPECT_LE((ru - rw).dot(u.vec() - w.vec()), 1e-12);
  }
}

TEST(SolveFluid, ZeroDataZeroSolution) {
  FluidCase s(fixtures::disc(2, 2, 10));
  const auto r = solve_fluid(s.inputs(), s.p);
  EXPECT_LE(r.u.coef.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SolveFluid, OutputSatisfiesResidual) {
  FluidCase s(fixtures::disc(2, 4, 10));
  FluidField F(s.d.fluid, s.d.time);
  fixtures::randomize(F, 61);
  fixtures::randomize(s.ulag, 62, 0.1);
  const auto r = solve_fluid(s.inputs(&F), s.p);
  const Eigen::VectorXd R = fluid_residual(r.u, s.inputs(&F), s.p).total();
  EXPECT_LE(R.cwiseAbs().maxCoeff(), 1e-10);
}

// Penalty only: rho = M, u~ = 0, delta = 0, prescribed eta~_t = sin(2 pi t / T) s_1.
// Testing with u gives visc + (1/eps) int (|v|^2 - eta~_t v_2) = 0, hence
// ||v - eta~_t e2||^2 <= ||eta~_t||^2.
TEST(SolveFluid, PenaltyOnlyEnergyIdentity) {
  FluidCase s(fixtures::disc(2, 4, 12));
  s.p.delta = 0.0;
  s.p.eps = 0.05;
  s.eta.eta.coef(0, 2) = -s.d.domain.T / (2 * pi);
  const FluidField u = solve_fluid(s.inputs(), s.p).u;
  const Grid2& bg = s.d.beam_grid;
  const Eigen::ArrayXd zh = wrapped_heights(s.eta.eta, bg, s.d.domain.H);
  const TraceTable tt = trace_table(*s.d.fluid, *s.d.time, bg, zh);
  const Eigen::ArrayXd v0 = (tt.phi[0] * u.vec()).array(), v1 = (tt.phi[1] * u.vec()).array();
  const Eigen::ArrayXd et = evaluate(s.eta.eta, bg, 1, 0);
  const auto A = assemble_viscous_form(*s.d.fluid, s.p.mu, s.p.zeta).A;
  const double visc = (u.coef.transpose() * A * u.coef * s.d.time->gram().asDiagonal()).trace();
  const double pen = bg.cell() / s.p.eps * (v0.square() + v1.square() - et * v1).sum();
  EXPECT_NEAR(visc + pen, 0.0, 1e-10 * std::max(1.0, visc));
  const double mis = bg.cell() * (v0.square() + (v1 - et).square()).sum(), src = bg.cell() * et.square().sum();
  EXPECT_LE(mis, src);
  EXPECT_GT(visc, 0.0);
}

TEST(SolveFluid, NewtonPicardAndFiniteDifferenceRootAgree) {
  for (auto [n, m] : {std::pair{6, 2}, {8, 1}}) {
    const auto r = oracles::fluid_fd_case(n, m);
    EXPECT_LE(r.deviation, 1e-9) << r.name;
  }
}

TEST(FluidParams, RejectsInvalid) {
  FluidParams p;
  p.gamma = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p.gamma = 2.0;
  p.a = 4.0;
  EXPECT_THROW(p.validate(), ConfigError);
}
