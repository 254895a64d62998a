#pragma once

// Fixed oracle instances shared by the CLI "oracle" subcommand and the test
// suite. Each compares a module result against its brute-force oracle and
// reports the max deviation. Instance sizes are capped; larger requests are
// refused with the cap in the message.

#include <chrono>
#include <random>
#include <string>

#include "pfsi/driver.hpp"
#include "pfsi/oracles/coupled_linear.hpp"
#include "pfsi/oracles/density_fd.hpp"
#include "pfsi/oracles/fluid_fd.hpp"
#include "pfsi/oracles/quadrature.hpp"
#include "pfsi/oracles/structure_dense.hpp"

namespace pfsi::oracles {

struct OracleReport {
  std::string name;
  double deviation = 0.0;
  double limit = 0.0;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

inline constexpr int kCapGramBeam = 16;
inline constexpr int kCapGramFluid = 40;
inline constexpr int kCapGramTime = 8;
inline constexpr int kCapDensityGrid = 96;
inline constexpr int kCapStructureN = 8, kCapStructureM = 4;
inline constexpr int kCapFluidN = 8, kCapFluidM = 2;
inline constexpr int kCapCoupledN = 8, kCapCoupledM = 2;

namespace detail {

inline void cap(const char* what, int v, int limit) {
  if (v > limit) throw ConfigError(std::string("oracle: ") + what + " = " + std::to_string(v) + " exceeds the cap " + std::to_string(limit));
}

template <class F>
OracleReport timed(std::string name, double limit, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  OracleReport r;
  r.name = std::move(name);
  r.limit = limit;
  body(r);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = r.deviation <= limit;
  return r;
}

inline Discretization small_disc(int m, int n_beam, int n_fluid) {
  DiscretizationSpec s;
  s.m = m;
  s.n_beam = n_beam;
  s.n_fluid = n_fluid;
  return make_discretization(DomainSpec{}, s);
}

}  // namespace detail

inline OracleReport gram_beam(int n = 6) {
  detail::cap("n", n, kCapGramBeam);
  return detail::timed("gram-beam n=" + std::to_string(n), 1e-10, [&](OracleReport& r) {
    const auto b = make_beam_basis(1.0, n);
    const Eigen::MatrixXd Q = beam_h2_gram(*b);
    r.deviation = (b->h2_gram() - Q).cwiseAbs().maxCoeff();
    r.deviation = std::max(r.deviation, (Q - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
  });
}

inline OracleReport gram_fluid(int n = 10) {
  detail::cap("n", n, kCapGramFluid);
  return detail::timed("gram-fluid n=" + std::to_string(n), 1e-12, [&](OracleReport& r) {
    const auto b = make_fluid_basis(1.0, 1.0, n);
    const Eigen::MatrixXd Q = fluid_gram(*b);
    const Eigen::MatrixXd G = b->gram().asDiagonal();
    r.deviation = (G - Q).cwiseAbs().maxCoeff();
  });
}

inline OracleReport gram_time(double T = 2.0, int m = 2) {
  detail::cap("m", m, kCapGramTime);
  return detail::timed("gram-time m=" + std::to_string(m), 1e-12, [&](OracleReport& r) {
    const auto tb = make_time_basis(T, m);
    const Eigen::MatrixXd Q = time_gram(*tb);
    const Eigen::MatrixXd G = tb->gram().asDiagonal();
    r.deviation = (G - Q).cwiseAbs().maxCoeff();
  });
}

/// u = (0.1 sin(pi z / H), 0), eps = 0.1, M = 1 on an 8^3 density grid. The
/// compressive variant uses u = (0, 0.1 sin(pi z / H)) on a 16^3 grid, whose
/// density is not constant.
inline OracleReport density_fd_case(int grid = 64, bool compressive = false) {
  detail::cap("grid", grid, kCapDensityGrid);
  const std::string name = std::string(compressive ? "density-fd-compressive" : "density-fd") + " grid=" + std::to_string(grid);
  return detail::timed(name, 1e-4, [&](OracleReport& r) {
    DiscretizationSpec s;
    s.m = 1;
    s.n_beam = 1;
    s.n_fluid = 4;
    s.rho_nx = s.rho_nz = s.rho_nt = compressive ? 16 : 8;
    const DomainSpec dom;
    const Discretization d = make_discretization(dom, s);
    FluidField u(d.fluid, d.time);
    u.coef(compressive ? 3 : 2, 0) = 0.1;  // sin(pi z / H) e1 or e2
    DensitySolveOptions o;
    o.eps = 0.1;
    o.M = 1.0;
    const DensityField rho = solve_density(u, d.rho_grid, o);
    const DensityFdResult fd = density_fd(
        [&](double t, double x, double z, double& u1, double& u2) {
          u1 = evaluate(u, 0, t, x, z);
          u2 = evaluate(u, 1, t, x, z);
        },
        dom.L, dom.H, dom.T, o.eps, o.M, grid);
    const Eigen::ArrayXd fine = interpolate(rho.values, rho.dims(), Dims3{grid, grid, grid});
    r.deviation = (fine - fd.rho).abs().maxCoeff();
    r.detail = "fd iterations " + std::to_string(fd.iterations) + (fd.converged ? "" : " (fd not converged)");
    if (!fd.converged) r.deviation = std::max(r.deviation, 1.0);
  });
}

/// Random band-limited (f, v), eps = 0.1.
inline OracleReport structure_dense_case(int n = 4, int m = 2, unsigned seed = 7) {
  detail::cap("n", n, kCapStructureN);
  detail::cap("m", m, kCapStructureM);
  return detail::timed("structure-dense n=" + std::to_string(n) + " m=" + std::to_string(m), 1e-10, [&](OracleReport& r) {
    const Discretization d = detail::small_disc(m, n, 2);
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    BeamField f(d.beam, d.time), v(d.beam, d.time);
    for (Eigen::Index k = 0; k < f.coef.size(); ++k) {
      f.coef.data()[k] = U(gen);
      v.coef.data()[k] = U(gen);
    }
    const double eps = 0.1;
    const PenaltyInput in{d.beam_grid, evaluate(v, d.beam_grid), evaluate(f, d.beam_grid), eps};
    const BeamState sol = solve_structure(in, d.beam, d.time);
    const Eigen::MatrixXd ref = structure_dense(
        *d.beam, *d.time, eps, [&](double t, double x) { return evaluate(f, t, x); }, [&](double t, double x) { return evaluate(v, t, x); });
    r.deviation = (sol.eta.coef - ref).cwiseAbs().maxCoeff();
  });
}

/// Random small-amplitude fluid inputs: Newton vs damped Picard vs the
/// finite-difference-Jacobian root search.
inline OracleReport fluid_fd_case(int n = 6, int m = 2, unsigned seed = 11) {
  detail::cap("n", n, kCapFluidN);
  detail::cap("m", m, kCapFluidM);
  return detail::timed("fluid-fd n=" + std::to_string(n) + " m=" + std::to_string(m), 1e-9, [&](OracleReport& r) {
    const Discretization d = detail::small_disc(m, 2, n);
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    FluidField ulag(d.fluid, d.time), F(d.fluid, d.time);
    BeamField e(d.beam, d.time);
    for (Eigen::Index k = 0; k < ulag.coef.size(); ++k) {
      ulag.coef.data()[k] = 0.1 * U(gen);
      F.coef.data()[k] = 0.5 * U(gen);
    }
    for (Eigen::Index k = 0; k < e.coef.size(); ++k) e.coef.data()[k] = 0.05 * U(gen);
    const BeamState eta{e};
    DensityField rho = constant_density(d.rho_grid, 1.0);
    const Grid3& g = d.rho_grid;
    const double a1 = 0.05 * U(gen), a2 = 0.05 * U(gen);
    for (int it = 0; it < g.nt(); ++it)
      for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix)
          rho.values(g.at(ix, iz, it)) += a1 * std::sin(2.0 * std::numbers::pi * g.x.node(ix)) * std::cos(2.0 * std::numbers::pi * g.t.node(it)) +
                                          a2 * std::cos(std::numbers::pi * g.z.node(iz));
    rho.refresh_metadata();
    FluidParams p;
    p.M = 1.0;
    const FluidInputs in{&d, &rho, &ulag, &eta, &F};
    FluidSolveOptions on;
    on.tol = 1e-14;
    FluidSolveOptions op = on;
    op.path = FluidPath::Picard;
    op.max_picard = 2000;
    const FluidField un = solve_fluid(in, p, on).u;
    const FluidField up = solve_fluid(in, p, op).u;
    const FluidFdResult fd = fluid_fd_root(in, p);
    r.deviation = std::max((un.coef - up.coef).cwiseAbs().maxCoeff(), (un.coef - fd.u.coef).cwiseAbs().maxCoeff());
    r.detail = "fd newton iterations " + std::to_string(fd.iterations);
  });
}

/// Linear probe mode: the driver's fixed point vs the monolithic coupled solve.
inline OracleReport coupled_linear_case(int n_fluid = 6, int m = 1) {
  detail::cap("n_fluid", n_fluid, kCapCoupledN);
  detail::cap("m", m, kCapCoupledM);
  return detail::timed("coupled-linear n_fluid=" + std::to_string(n_fluid) + " m=" + std::to_string(m), 1e-9, [&](OracleReport& r) {
    DriverConfig cfg;
    cfg.freeze_density = cfg.linear_fluid = cfg.flat_trace = true;
    cfg.forcing.beam = {{1e-3, 1, 1}};
    cfg.forcing.fluid = {{1e-3, 3, 0}};
    const StageSpec s{m, 2, n_fluid, 0.1, 0.1, 1e-13, 400, "probe"};
    const CoupledState st = run_stage(initial_state(cfg, s), cfg);
    const Eigen::VectorXd ref = coupled_linear_fixed_point(st, cfg);
    r.deviation = (pack(st.eta, st.u) - ref).cwiseAbs().maxCoeff();
    if (!st.converged) r.deviation = std::max(r.deviation, 1.0);
    r.detail = "driver iterations " + std::to_string(st.iterations);
  });
}

}  // namespace pfsi::oracles
