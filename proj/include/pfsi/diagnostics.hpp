#pragma once

// Energies, energy balance, penalty residual, coupled weak residuals and the
// torus Korn identity, all evaluated on a computed state.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pfsi/driver.hpp"

namespace pfsi {

struct DiagnosticParams {
  FluidParams fp;
  double m0 = 2.0;
  BeamField f;   // beam forcing
  FluidField F;  // body force
};

inline DiagnosticParams diagnostic_params(const CoupledState& st, const DriverConfig& cfg) {
  return DiagnosticParams{fluid_params(cfg, st.stage), cfg.phys.m0, beam_forcing(cfg.forcing, *st.disc), fluid_forcing(cfg.forcing, *st.disc)};
}

struct EnergyReport {
  std::vector<double> t, E, E_delta;
  std::vector<double> visc_rate, beam_rate;  // per-slice int_Omega S:grad u and int_Gamma |eta_tx|^2
  double visc_diss = 0, cubic_diss = 0, beam_diss = 0;
  double eps_gamma_grad = 0, eps_gamma_pow = 0, eps_a_grad = 0, eps_a_pow = 0;
  double penalty_residual = 0;  // int |v - eta_t e2|^2 over Gamma_T
  double penalty_term = 0;      // penalty_residual / eps
  double work_f = 0, work_F = 0, source_gamma = 0, source_a = 0;
  double lhs = 0, rhs = 0, balance = 0, scale = 1;
  double phys_lhs = 0, phys_rhs = 0, phys_defect = 0;
  double sup_E = 0, sup_E_delta = 0;
  double mass_error = 0, min_rho = 0;
};

namespace detail {

/// State fields sampled on the coupling grid and the beam grid.
struct Samples {
  Eigen::ArrayXd r, rx, rz;
  VectorGrid u, ux, uz;
  Eigen::ArrayXd et, ex, exx, etx;  // beam grid
  TraceField v;
};

inline Samples sample(const CoupledState& st) {
  const Discretization& d = *st.disc;
  const Grid3& cg = d.coupling_grid;
  Samples s;
  s.r = spectral_eval(st.rho.values, st.rho.grid, cg);
  s.rx = spectral_eval(st.rho.values, st.rho.grid, cg, 1, 0, 0);
  s.rz = spectral_eval(st.rho.values, st.rho.grid, cg, 0, 1, 0);
  s.u = evaluate(st.u, cg);
  s.ux = evaluate(st.u, cg, 0, 1, 0);
  s.uz = evaluate(st.u, cg, 0, 0, 1);
  const Grid2& bg = d.beam_grid;
  s.et = evaluate(st.eta.eta, bg, 1, 0);
  s.ex = evaluate(st.eta.eta, bg, 0, 1);
  s.exx = evaluate(st.eta.eta, bg, 0, 2);
  s.etx = evaluate(st.eta.eta, bg, 1, 1);
  s.v = trace_velocity(st.u, st.eta.eta, bg);
  return s;
}

/// S(grad u) : grad u pointwise.
inline Eigen::ArrayXd viscous_density(const VectorGrid& ux, const VectorGrid& uz, double mu, double zeta) {
  const Eigen::ArrayXd div = ux.c[0] + uz.c[1];
  const Eigen::ArrayXd sym = 2.0 * ux.c[0].square() + 2.0 * uz.c[1].square() + (ux.c[1] + uz.c[0]).square();
  return mu * sym + (zeta - mu) * div.square();
}

/// Per-time-slice sums of a coupling-grid function times the spatial cell.
inline Eigen::ArrayXd slice_integrals(const Eigen::ArrayXd& g, const Grid3& grid) {
  const Eigen::Index slab = Eigen::Index(grid.nx()) * grid.nz();
  Eigen::ArrayXd out(grid.nt());
  for (int t = 0; t < grid.nt(); ++t) out(t) = grid.x.weight() * grid.z.weight() * g.segment(slab * t, slab).sum();
  return out;
}

inline Eigen::ArrayXd beam_slice_integrals(const Eigen::ArrayXd& g, const Grid2& grid) {
  Eigen::ArrayXd out(grid.nt());
  for (int t = 0; t < grid.nt(); ++t) out(t) = grid.x.weight() * g.segment(Eigen::Index(grid.nx()) * t, grid.nx()).sum();
  return out;
}

}  // namespace detail

/// E(t) and E_delta(t) at the coupling-grid time nodes, the dissipation and
/// forcing integrals, and the phi = 1 energy balance.
inline EnergyReport energy(const CoupledState& st, const DiagnosticParams& dp) {
  const Discretization& d = *st.disc;
  const FluidParams& p = dp.fp;
  const Grid3& cg = d.coupling_grid;
  const Grid2& bg = d.beam_grid;
  const detail::Samples s = detail::sample(st);
  EnergyReport rep;

  const Eigen::ArrayXd u2 = s.u.c[0].square() + s.u.c[1].square();
  const Eigen::ArrayXd rg = density_power(s.r, p.gamma), ra = density_power(s.r, p.a);
  const Eigen::ArrayXd fluid_E = 0.5 * s.r * u2 + rg / (p.gamma - 1.0);
  const Eigen::ArrayXd fluid_Ed = fluid_E + 0.5 * p.delta * u2 + p.delta * ra / (p.a - 1.0);
  // beam energy at the coupling time nodes
  const Grid2 bt{bg.x, cg.t};
  const Eigen::ArrayXd bet = evaluate(st.eta.eta, bt, 1, 0), bexx = evaluate(st.eta.eta, bt, 0, 2);
  const Eigen::ArrayXd beam_E = detail::beam_slice_integrals(0.5 * (bet.square() + bexx.square()), bt);
  const Eigen::ArrayXd E = detail::slice_integrals(fluid_E, cg) + beam_E;
  const Eigen::ArrayXd Ed = detail::slice_integrals(fluid_Ed, cg) + beam_E;
  const Eigen::ArrayXd vr = detail::slice_integrals(detail::viscous_density(s.ux, s.uz, p.mu, p.zeta), cg);
  const Eigen::ArrayXd br = detail::beam_slice_integrals(evaluate(st.eta.eta, bt, 1, 1).square(), bt);
  for (int t = 0; t < cg.nt(); ++t) {
    rep.t.push_back(cg.t.node(t));
    rep.E.push_back(E(t));
    rep.E_delta.push_back(Ed(t));
    rep.visc_rate.push_back(vr(t));
    rep.beam_rate.push_back(br(t));
  }
  rep.sup_E = E.maxCoeff();
  rep.sup_E_delta = Ed.maxCoeff();

  const double w = cg.cell();
  const Eigen::ArrayXd grad2 = s.rx.square() + s.rz.square();
  rep.visc_diss = w * detail::viscous_density(s.ux, s.uz, p.mu, p.zeta).sum();
  rep.cubic_diss = p.delta * w * u2.square().sum();
  rep.beam_diss = bg.cell() * s.etx.square().sum();
  rep.eps_gamma_grad = p.eps * p.gamma * w * (density_power(s.r, p.gamma - 2.0) * grad2).sum();
  rep.eps_gamma_pow = p.eps * p.gamma / (p.gamma - 1.0) * w * rg.sum();
  rep.eps_a_grad = p.eps * p.delta * p.a * w * (density_power(s.r, p.a - 2.0) * grad2).sum();
  rep.eps_a_pow = p.eps * p.delta * p.a / (p.a - 1.0) * w * ra.sum();
  const Eigen::ArrayXd mis = s.v.v[0].square() + (s.v.v[1] - s.et).square();
  rep.penalty_residual = bg.cell() * mis.sum();
  rep.penalty_term = rep.penalty_residual / p.eps;

  rep.work_f = bg.cell() * (evaluate(dp.f, bg) * s.et).sum();
  const VectorGrid F = evaluate(dp.F, cg);
  rep.work_F = w * (s.r * (s.u.c[0] * F.c[0] + s.u.c[1] * F.c[1])).sum();
  rep.source_gamma = p.eps * p.M * p.gamma / (p.gamma - 1.0) * w * density_power(s.r, p.gamma - 1.0).sum();
  rep.source_a = p.eps * p.delta * p.M * p.a / (p.a - 1.0) * w * density_power(s.r, p.a - 1.0).sum();

  rep.lhs = rep.visc_diss + rep.cubic_diss + rep.beam_diss + rep.eps_gamma_grad + rep.eps_gamma_pow + rep.eps_a_grad + rep.eps_a_pow +
            rep.penalty_term;
  rep.rhs = rep.work_f + rep.work_F + rep.source_gamma + rep.source_a;
  rep.balance = rep.lhs - rep.rhs;
  rep.scale = std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1.0});
  rep.phys_lhs = rep.visc_diss + rep.beam_diss;
  rep.phys_rhs = rep.work_f + rep.work_F;
  rep.phys_defect = std::max(0.0, rep.phys_lhs - rep.phys_rhs);
  rep.mass_error = st.rho.max_mass_error(dp.m0);
  rep.min_rho = st.rho.min_value;
  return rep;
}

struct BalanceResult {
  double lhs = 0, rhs = 0, residual = 0, scale = 1;
  bool in_span = true;
  std::string warning;
};

/// Energy balance tested with a time weight phi (coefficients over `phi_basis`).
/// The discrete identity is exact for constant phi; other weights are
/// evaluated with a warning.
inline BalanceResult energy_balance(const CoupledState& st, const DiagnosticParams& dp, const TimeBasis& phi_basis,
                                    const Eigen::VectorXd& phi) {
  if (phi.size() != phi_basis.size()) throw ConfigError("energy_balance: phi coefficients do not match their basis");
  if (std::abs(phi_basis.T() - st.disc->time->T()) > 1e-14 * phi_basis.T()) throw ConfigError("energy_balance: phi has a different period");
  const Discretization& d = *st.disc;
  const FluidParams& p = dp.fp;
  const Grid3& cg = d.coupling_grid;
  const Grid2& bg = d.beam_grid;
  const detail::Samples s = detail::sample(st);
  BalanceResult out;
  const bool constant = phi.tail(phi.size() - 1).cwiseAbs().maxCoeff() == 0.0 || phi.size() == 1;
  out.in_span = phi_basis.m() <= d.time->m();
  if (!constant) out.warning = "non-constant phi: the discrete identity is not guaranteed";
  if (!out.in_span) out.warning = "phi outside the configured time span: the discrete identity is not guaranteed";

  auto weight_at = [&](const UniformGrid1D& tg, int dt) {
    Eigen::ArrayXd wv(tg.n);
    for (int k = 0; k < tg.n; ++k) {
      double v = 0.0;
      for (int j = 0; j < phi_basis.size(); ++j) v += phi(j) * phi_basis.value(j, tg.node(k), dt);
      wv(k) = v;
    }
    return wv;
  };
  const Eigen::Index slab = Eigen::Index(cg.nx()) * cg.nz();
  auto expand3 = [&](const Eigen::ArrayXd& wt) {
    Eigen::ArrayXd e(cg.size());
    for (int t = 0; t < cg.nt(); ++t) e.segment(slab * t, slab).setConstant(wt(t));
    return e;
  };
  auto expand2 = [&](const Eigen::ArrayXd& wt) {
    Eigen::ArrayXd e(bg.size());
    for (int t = 0; t < bg.nt(); ++t) e.segment(Eigen::Index(bg.nx()) * t, bg.nx()).setConstant(wt(t));
    return e;
  };
  const Eigen::ArrayXd ph3 = expand3(weight_at(cg.t, 0));
  const Eigen::ArrayXd ph2 = expand2(weight_at(bg.t, 0));

  const EnergyReport rep = energy(st, dp);
  const Eigen::ArrayXd phit = weight_at(cg.t, 1);
  double dE = 0.0;
  for (int t = 0; t < cg.nt(); ++t) dE += cg.t.weight() * phit(t) * rep.E_delta[static_cast<size_t>(t)];

  const double w = cg.cell();
  const Eigen::ArrayXd u2 = s.u.c[0].square() + s.u.c[1].square();
  const Eigen::ArrayXd grad2 = s.rx.square() + s.rz.square();
  const VectorGrid F = evaluate(dp.F, cg);
  const Eigen::ArrayXd mis = s.v.v[0].square() + (s.v.v[1] - s.et).square();
  out.lhs = -dE + w * (ph3 * detail::viscous_density(s.ux, s.uz, p.mu, p.zeta)).sum() + p.delta * w * (ph3 * u2.square()).sum() +
            bg.cell() * (ph2 * s.etx.square()).sum() + p.eps * p.gamma * w * (ph3 * density_power(s.r, p.gamma - 2.0) * grad2).sum() +
            p.eps * p.gamma / (p.gamma - 1.0) * w * (ph3 * density_power(s.r, p.gamma)).sum() +
            p.eps * p.delta * p.a * w * (ph3 * density_power(s.r, p.a - 2.0) * grad2).sum() +
            p.eps * p.delta * p.a / (p.a - 1.0) * w * (ph3 * density_power(s.r, p.a)).sum() + bg.cell() / p.eps * (ph2 * mis).sum();
  out.rhs = bg.cell() * (ph2 * evaluate(dp.f, bg) * s.et).sum() + w * (ph3 * s.r * (s.u.c[0] * F.c[0] + s.u.c[1] * F.c[1])).sum() +
            p.eps * p.M * p.gamma / (p.gamma - 1.0) * w * (ph3 * density_power(s.r, p.gamma - 1.0)).sum() +
            p.eps * p.delta * p.M * p.a / (p.a - 1.0) * w * (ph3 * density_power(s.r, p.a - 1.0)).sum();
  out.residual = out.lhs - out.rhs;
  out.scale = std::max({std::abs(out.lhs), std::abs(out.rhs), 1.0});
  return out;
}

/// int_{Gamma_T} |v - eta_t e2|^2 with v the trace of u on the state's own beam.
inline double penalty_residual(const CoupledState& st) {
  const Grid2& bg = st.disc->beam_grid;
  const TraceField v = trace_velocity(st.u, st.eta.eta, bg);
  const Eigen::ArrayXd et = evaluate(st.eta.eta, bg, 1, 0);
  return bg.cell() * (v.v[0].square() + (v.v[1] - et).square()).sum();
}

// ------------------------------------------------------ weak residuals ----

/// Values and first derivatives of a test pair. phi(t, x, z) fills
/// out[c] = {phi_c, d_t, d_x, d_z}; psi(t, x) fills {psi, d_t, d_x, d_xx}.
struct TestPair {
  std::string name;
  std::function<void(double, double, double, double (*)[4])> phi;
  std::function<void(double, double, double*)> psi;
};

/// chi(s) = exp(cos(pi s / H) - 1): smooth, 2H-periodic, chi(0) = 1.
struct VerticalCutoff {
  double H = 1.0;
  double value(double s) const { return std::exp(std::cos(std::numbers::pi * s / H) - 1.0); }
  double deriv(double s) const { return -std::numbers::pi / H * std::sin(std::numbers::pi * s / H) * value(s); }
};

/// Pair (psi chi(z - eta) e2, psi) for a scalar beam test function psi; the
/// coupling constraint phi(t, x, eta_hat) = psi e2 holds exactly.
inline TestPair lifted_pair(std::string name, std::function<void(double, double, double*)> psi, const BeamField& eta, double H) {
  const VerticalCutoff chi{H};
  auto phi = [psi, eta, chi](double t, double x, double z, double (*out)[4]) {
    double ps[4];
    psi(t, x, ps);
    const double e = evaluate(eta, t, x), et = evaluate(eta, t, x, 1, 0), ex = evaluate(eta, t, x, 0, 1);
    const double c = chi.value(z - e), cp = chi.deriv(z - e);
    for (int k = 0; k < 4; ++k) out[0][k] = 0.0;
    out[1][0] = ps[0] * c;
    out[1][1] = ps[1] * c - ps[0] * cp * et;
    out[1][2] = ps[2] * c - ps[0] * cp * ex;
    out[1][3] = ps[0] * cp;
  };
  return TestPair{std::move(name), phi, std::move(psi)};
}

/// Fixed out-of-span family: smooth non-trigonometric-polynomial psi with psi(t, 0) = 0.
inline std::vector<TestPair> smooth_test_family(const CoupledState& st) {
  const DomainSpec& dom = st.disc->domain;
  const double kx = 2.0 * std::numbers::pi / dom.L, kt = 2.0 * std::numbers::pi / dom.T;
  std::vector<TestPair> fam;
  // (e^{sin kx x} - 1) e^{cos kt t}
  fam.push_back(lifted_pair(
      "exp-sin", [kx, kt](double t, double x, double* o) {
        const double es = std::exp(std::sin(kx * x)), et = std::exp(std::cos(kt * t));
        const double c = std::cos(kx * x), s = std::sin(kx * x);
        o[0] = (es - 1.0) * et;
        o[1] = -(es - 1.0) * et * kt * std::sin(kt * t);
        o[2] = es * kx * c * et;
        o[3] = es * kx * kx * (c * c - s) * et;
      },
      st.eta.eta, dom.H));
  // sin(kx x) e^{cos kx x} sin(kt t + 1) / (2 + cos kt t)
  fam.push_back(lifted_pair(
      "sin-exp-cos", [kx, kt](double t, double x, double* o) {
        const double s = std::sin(kx * x), c = std::cos(kx * x), ec = std::exp(c);
        const double g = s * ec, gx = kx * ec * (c - s * s), gxx = kx * kx * ec * (-3.0 * s * c + s * s * s - s);
        const double a = std::sin(kt * t + 1.0), b = 2.0 + std::cos(kt * t);
        const double h = a / b, ht = kt * (std::cos(kt * t + 1.0) * b + a * std::sin(kt * t)) / (b * b);
        o[0] = g * h;
        o[1] = g * ht;
        o[2] = gx * h;
        o[3] = gxx * h;
      },
      st.eta.eta, dom.H));
  return fam;
}

/// Pairs (s_i tau_j chi(z - eta) e2, s_i tau_j) over the state's beam basis.
inline std::vector<TestPair> beam_mode_family(const CoupledState& st, int max_modes = 4) {
  std::vector<TestPair> fam;
  const auto b = st.disc->beam;
  const auto tb = st.disc->time;
  for (int i = 0; i < std::min(max_modes, b->size()); ++i)
    for (int j = 0; j < tb->size(); ++j) {
      auto psi = [b, tb, i, j](double t, double x, double* o) {
        o[0] = b->value(i, x) * tb->value(j, t);
        o[1] = b->value(i, x) * tb->value(j, t, 1);
        o[2] = b->value(i, x, 1) * tb->value(j, t);
        o[3] = b->value(i, x, 2) * tb->value(j, t);
      };
      fam.push_back(lifted_pair("s" + std::to_string(i + 1) + "t" + std::to_string(j), psi, st.eta.eta, st.disc->domain.H));
    }
  return fam;
}

struct PairResidual {
  std::string name;
  double physical = 0, delta_terms = 0, eps_terms = 0, full = 0;
  double penalty = 0;            // -(1/eps) int (v - eta_t e2).(phi(eta_hat) - psi e2); zero for lifted pairs
  double constraint_defect = 0;  // max |phi(t, x, eta_hat) - psi e2| on the beam grid
};

struct WeakResidualReport {
  std::vector<PairResidual> pairs;
  double physical_norm = 0, full_norm = 0;  // root sum of squares over pairs
  double continuity = 0;                     // weak continuity residual (b = 0), smooth scalar test
};

inline PairResidual pair_residual(const CoupledState& st, const DiagnosticParams& dp, const TestPair& tp, const detail::Samples& s) {
  const Discretization& d = *st.disc;
  const FluidParams& p = dp.fp;
  const Grid3& cg = d.coupling_grid;
  const Grid2& bg = d.beam_grid;
  PairResidual r{tp.name};
  double ph[2][4];

  // fluid terms on the coupling grid
  const VectorGrid F = evaluate(dp.F, cg);
  double phys = 0, dl = 0, ep = 0;
  for (int t = 0; t < cg.nt(); ++t)
    for (int z = 0; z < cg.nz(); ++z)
      for (int x = 0; x < cg.nx(); ++x) {
        const Eigen::Index q = cg.at(x, z, t);
        tp.phi(cg.t.node(t), cg.x.node(x), cg.z.node(z), ph);
        const double u0 = s.u.c[0](q), u1 = s.u.c[1](q), rho = s.r(q);
        const double div_phi = ph[0][2] + ph[1][3];
        // (grad u)_{ab} = d_a u_b
        const double d00 = s.ux.c[0](q), d01 = s.ux.c[1](q), d10 = s.uz.c[0](q), d11 = s.uz.c[1](q);
        const double divu = d00 + d11;
        const double S00 = 2 * p.mu * d00 + (p.zeta - p.mu) * divu, S11 = 2 * p.mu * d11 + (p.zeta - p.mu) * divu;
        const double S01 = p.mu * (d01 + d10);
        // grad phi_{ab} = d_a phi_b: d_x phi_b = ph[b][2], d_z phi_b = ph[b][3]
        const double S_gphi = S00 * ph[0][2] + S01 * ph[1][2] + S01 * ph[0][3] + S11 * ph[1][3];
        const double uu_gphi = u0 * u0 * ph[0][2] + u0 * u1 * ph[1][2] + u1 * u0 * ph[0][3] + u1 * u1 * ph[1][3];
        const double u_dtphi = u0 * ph[0][1] + u1 * ph[1][1];
        const double u_phi = u0 * ph[0][0] + u1 * ph[1][0];
        phys += rho * u_dtphi + rho * uu_gphi + std::pow(rho, p.gamma) * div_phi - S_gphi + rho * (F.c[0](q) * ph[0][0] + F.c[1](q) * ph[1][0]);
        dl += p.delta * u_dtphi + p.delta * std::pow(rho, p.a) * div_phi - p.delta * (u0 * u0 + u1 * u1) * u_phi;
        double grad_term = 0.0;
        for (int b = 0; b < 2; ++b) grad_term += ph[b][0] * (s.rx(q) * (b == 0 ? d00 : d01) + s.rz(q) * (b == 0 ? d10 : d11));
        ep += -p.eps * grad_term + 0.5 * p.eps * (p.M - rho) * u_phi;
      }
  phys *= cg.cell();
  dl *= cg.cell();
  ep *= cg.cell();

  // beam terms on the beam grid
  const Eigen::ArrayXd fv = evaluate(dp.f, bg);
  const Eigen::ArrayXd eh = wrapped_heights(st.eta.eta, bg, d.domain.H);
  double beam = 0, pen = 0;
  double ps[4];
  for (int t = 0; t < bg.nt(); ++t)
    for (int x = 0; x < bg.nx(); ++x) {
      const Eigen::Index q = bg.at(x, t);
      const double tt = bg.t.node(t), xx = bg.x.node(x);
      tp.psi(tt, xx, ps);
      beam += s.et(q) * ps[1] - s.exx(q) * ps[3] - s.etx(q) * ps[2] + fv(q) * ps[0];
      tp.phi(tt, xx, eh(q), ph);
      r.constraint_defect = std::max({r.constraint_defect, std::abs(ph[0][0]), std::abs(ph[1][0] - ps[0])});
      pen -= s.v.v[0](q) * ph[0][0] + (s.v.v[1](q) - s.et(q)) * (ph[1][0] - ps[0]);
    }
  beam *= bg.cell();
  r.physical = phys + beam;
  r.delta_terms = dl;
  r.eps_terms = ep;
  r.penalty = pen * bg.cell() / p.eps;
  r.full = r.physical + dl + ep + r.penalty;
  return r;
}

/// Residual of the coupled momentum equation for each test pair (physical
/// terms, delta and eps terms separately) and of the weak continuity equation.
inline WeakResidualReport coupled_weak_residual(const CoupledState& st, const DiagnosticParams& dp, const std::vector<TestPair>& family) {
  const detail::Samples s = detail::sample(st);
  WeakResidualReport rep;
  for (const auto& tp : family) {
    rep.pairs.push_back(pair_residual(st, dp, tp, s));
    rep.physical_norm += rep.pairs.back().physical * rep.pairs.back().physical;
    rep.full_norm += rep.pairs.back().full * rep.pairs.back().full;
  }
  rep.physical_norm = std::sqrt(rep.physical_norm);
  rep.full_norm = std::sqrt(rep.full_norm);
  // <rho, d_t vphi + u . grad vphi> with vphi = e^{sin kx x} e^{cos kz z} e^{sin kt t}
  const Grid3& cg = st.disc->coupling_grid;
  const double kx = 2 * std::numbers::pi / cg.x.period, kz = 2 * std::numbers::pi / cg.z.period, kt = 2 * std::numbers::pi / cg.t.period;
  double c = 0;
  for (int t = 0; t < cg.nt(); ++t)
    for (int z = 0; z < cg.nz(); ++z)
      for (int x = 0; x < cg.nx(); ++x) {
        const Eigen::Index q = cg.at(x, z, t);
        const double X = cg.x.node(x), Z = cg.z.node(z), Tt = cg.t.node(t);
        const double v = std::exp(std::sin(kx * X) + std::cos(kz * Z) + std::sin(kt * Tt));
        c += s.r(q) * v * (kt * std::cos(kt * Tt) + s.u.c[0](q) * kx * std::cos(kx * X) - s.u.c[1](q) * kz * std::sin(kz * Z));
      }
  rep.continuity = c * cg.cell();
  return rep;
}

// ---------------------------------------------------------------- Korn ----

/// 2 ||D(w)||^2 - ||grad w||^2 - ||div w||^2 on the flat torus (exact quadrature).
inline double korn_defect(const FluidField& w) {
  const FluidBasis& b = *w.space;
  const Grid3 g{UniformGrid1D{0.0, b.L(), 2 * b.xfam.K + 2}, UniformGrid1D{-b.H(), 2 * b.H(), 2 * b.zfam.K + 2},
                UniformGrid1D{0.0, w.time->T(), 2 * w.time->m() + 2}};
  const VectorGrid gx = evaluate(w, g, 0, 1, 0), gz = evaluate(w, g, 0, 0, 1);
  const Eigen::ArrayXd d00 = gx.c[0], d01 = gx.c[1], d10 = gz.c[0], d11 = gz.c[1];
  const Eigen::ArrayXd sym = d00.square() + d11.square() + 0.5 * (d01 + d10).square();
  const Eigen::ArrayXd grad = d00.square() + d01.square() + d10.square() + d11.square();
  const Eigen::ArrayXd div = (d00 + d11).square();
  return g.cell() * (2.0 * sym - grad - div).sum();
}

}  // namespace pfsi
