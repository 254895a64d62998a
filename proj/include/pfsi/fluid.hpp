#pragma once

// Penalised compressible momentum equation for u in the fluid Galerkin space,
// with density, lagged velocity and lagged beam frozen. Written as
//   G(c) = K c + delta C(c) - b = 0,
// K = -delta (time derivative) + viscous form + trace penalty, C the cubic
// damping, b everything that does not depend on u.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pfsi/basis.hpp"
#include "pfsi/density.hpp"
#include "pfsi/discretization.hpp"
#include "pfsi/structure.hpp"
#include "pfsi/trace.hpp"

namespace pfsi {

struct FluidParams {
  double gamma = 2.0;
  double a = 5.0;
  double delta = 0.1;
  double eps = 0.1;
  double mu = 1.0;
  double zeta = 1.0;
  double M = 1.0;
  // test-mode switches; all on for the scheme proper
  bool convection = true;
  bool cubic = true;
  bool flat_trace = false;  // penalise on z = 0 instead of the lagged curve

  void validate() const {
    if (!(gamma > 1.0)) throw ConfigError("fluid: gamma must be > 1");
    if (!(a >= 5.0)) throw ConfigError("fluid: a must be >= 5");
    if (!(delta >= 0.0)) throw ConfigError("fluid: delta must be >= 0");
    if (!(eps > 0.0)) throw ConfigError("fluid: eps must be positive");
    if (!(mu > 0.0) || !(zeta > 0.0)) throw ConfigError("fluid: mu and zeta must be positive");
    if (!(M > 0.0)) throw ConfigError("fluid: M must be positive");
  }
};

enum class FluidPath { Newton, Picard };

struct FluidSolveOptions {
  double tol = 1e-12;  // on |G| relative to max(1, |b|)
  int max_newton = 40;
  int max_picard = 400;
  double picard_damping = 0.7;
  int stagnation_window = 10;
  FluidPath path = FluidPath::Newton;
};

struct FluidSolveResult {
  FluidField u;
  int iterations = 0;
  FluidPath path_used = FluidPath::Newton;
  std::vector<double> history;
};

// --------------------------------------------------------- viscous form ----

struct ViscousStressForm {
  Eigen::MatrixXd A;  // A(k, i) = <S(grad f_i), grad f_k>_{L2(Omega)}
  double mu = 1.0, zeta = 1.0;
};

/// S(grad u) = mu (grad u + grad u^T - div u I) + zeta div u I, so that
/// S : grad phi = mu (grad u + grad u^T) : grad phi + (zeta - mu) div u div phi.
inline ViscousStressForm assemble_viscous_form(const FluidBasis& b, double mu, double zeta) {
  if (!(mu > 0.0) || !(zeta > 0.0)) throw ConfigError("assemble_viscous_form: mu and zeta must be positive");
  const int nx = 2 * b.xfam.K + 2, nz = 2 * b.zfam.K + 2;
  const UniformGrid1D gx{0.0, b.L(), nx}, gz{-b.H(), 2.0 * b.H(), nz};
  const double w = gx.weight() * gz.weight();
  const Eigen::MatrixXd X0 = gx.table(b.xfam), X1 = gx.table(b.xfam, 1);
  const Eigen::MatrixXd Z0 = gz.table(b.zfam), Z1 = gz.table(b.zfam, 1);
  const int n = b.size();
  // d[a] column i: derivative in direction a of the (only) nonzero component of f_i
  Eigen::MatrixXd d[2] = {Eigen::MatrixXd(nx * nz, n), Eigen::MatrixXd(nx * nz, n)};
  for (int i = 0; i < n; ++i) {
    const auto& md = b.modes[static_cast<size_t>(i)];
    for (int z = 0; z < nz; ++z)
      for (int x = 0; x < nx; ++x) {
        d[0](z * nx + x, i) = md.scale * X1(x, md.ix) * Z0(z, md.iz);
        d[1](z * nx + x, i) = md.scale * X0(x, md.ix) * Z1(z, md.iz);
      }
  }
  ViscousStressForm out{Eigen::MatrixXd::Zero(n, n), mu, zeta};
  for (int k = 0; k < n; ++k) {
    const int ck = b.modes[static_cast<size_t>(k)].comp;
    for (int i = 0; i < n; ++i) {
      const int ci = b.modes[static_cast<size_t>(i)].comp;
      double s = 0.0;
      if (ci == ck) s += mu * (d[0].col(i).dot(d[0].col(k)) + d[1].col(i).dot(d[1].col(k)));
      s += mu * d[ck].col(i).dot(d[ci].col(k));
      s += (zeta - mu) * d[ci].col(i).dot(d[ck].col(k));
      out.A(k, i) = w * s;
    }
  }
  return out;
}

// ------------------------------------------------------------- helpers ----

/// rho^p; integer exponents accept negative rho, otherwise rho must be >= 0.
inline Eigen::ArrayXd density_power(const Eigen::ArrayXd& rho, double p) {
  Eigen::ArrayXd out(rho.size());
  const bool integral = p == std::floor(p);
  for (Eigen::Index q = 0; q < rho.size(); ++q) {
    if (!integral && rho(q) < 0.0) throw SolverError("negative density in non-integer power rho^" + std::to_string(p));
    out(q) = std::pow(rho(q), p);
  }
  return out;
}

/// Space-time tables of every fluid basis function on a grid, one per
/// component: Phi_c(q, i + n j) = (f_i)_c(x_q, z_q) tau_j(t_q).
inline std::array<Eigen::MatrixXd, 2> space_time_tables(const FluidBasis& b, const TimeBasis& tb, const Grid3& g) {
  const int n = b.size(), nt = tb.size();
  const Eigen::MatrixXd X = g.x.table(b.xfam), Z = g.z.table(b.zfam), Tt = g.t.table(tb.fam);
  std::array<Eigen::MatrixXd, 2> phi{Eigen::MatrixXd::Zero(g.size(), Eigen::Index(n) * nt),
                                     Eigen::MatrixXd::Zero(g.size(), Eigen::Index(n) * nt)};
  for (int t = 0; t < g.nt(); ++t)
    for (int z = 0; z < g.nz(); ++z)
      for (int x = 0; x < g.nx(); ++x) {
        const Eigen::Index q = g.at(x, z, t);
        for (int i = 0; i < n; ++i) {
          const auto& md = b.modes[static_cast<size_t>(i)];
          const double s = md.scale * X(x, md.ix) * Z(z, md.iz);
          if (s == 0.0) continue;
          for (int j = 0; j < nt; ++j) phi[md.comp](q, i + Eigen::Index(n) * j) = s * Tt(t, j);
        }
      }
  return phi;
}

inline Eigen::VectorXd flatten(const Eigen::MatrixXd& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()); }

// -------------------------------------------------------------- system ----

/// Frozen data of one fluid solve.
struct FluidInputs {
  const Discretization* disc = nullptr;
  const DensityField* rho = nullptr;
  const FluidField* u_lag = nullptr;
  const BeamState* eta_lag = nullptr;
  const FluidField* F = nullptr;  // body force, may be null
};

class FluidSystem {
 public:
  FluidSystem(const FluidInputs& in, const FluidParams& p) : in_(in), p_(p) {
    p.validate();
    if (!in.disc || !in.rho || !in.u_lag || !in.eta_lag) throw ConfigError("fluid: missing input");
    const Discretization& d = *in.disc;
    n_ = d.fluid->size();
    nt_ = d.time->size();
    assemble_linear();
    assemble_rhs();
    if (p_.cubic && p_.delta > 0.0) phi_ = space_time_tables(*d.fluid, *d.time, d.fluid_grid);
  }

  Eigen::Index size() const { return Eigen::Index(n_) * nt_; }
  const Eigen::MatrixXd& K() const { return K_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::MatrixXd& penalty() const { return P_; }

  /// delta * int |u|^2 u . phi_k for all k.
  Eigen::VectorXd cubic(const Eigen::VectorXd& c) const {
    if (phi_[0].size() == 0) return Eigen::VectorXd::Zero(size());
    const double w = in_.disc->fluid_grid.cell();
    const Eigen::ArrayXd u0 = (phi_[0] * c).array(), u1 = (phi_[1] * c).array();
    const Eigen::ArrayXd s = u0.square() + u1.square();
    return p_.delta * w * (phi_[0].transpose() * (s * u0).matrix() + phi_[1].transpose() * (s * u1).matrix());
  }

  Eigen::MatrixXd cubic_jacobian(const Eigen::VectorXd& c) const {
    if (phi_[0].size() == 0) return Eigen::MatrixXd::Zero(size(), size());
    const double w = p_.delta * in_.disc->fluid_grid.cell();
    const Eigen::ArrayXd u[2] = {(phi_[0] * c).array(), (phi_[1] * c).array()};
    const Eigen::ArrayXd s = u[0].square() + u[1].square();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(size(), size());
    for (int a = 0; a < 2; ++a)
      for (int e = 0; e < 2; ++e) {
        Eigen::ArrayXd wq = 2.0 * u[a] * u[e];
        if (a == e) wq += s;
        J.noalias() += phi_[a].transpose() * (w * wq).matrix().asDiagonal() * phi_[e];
      }
    return J;
  }

  /// Lagged-coefficient cubic matrix: delta * int |u_lag|^2 phi_i . phi_k.
  Eigen::MatrixXd cubic_picard(const Eigen::VectorXd& c) const {
    if (phi_[0].size() == 0) return Eigen::MatrixXd::Zero(size(), size());
    const double w = p_.delta * in_.disc->fluid_grid.cell();
    const Eigen::ArrayXd u0 = (phi_[0] * c).array(), u1 = (phi_[1] * c).array();
    const Eigen::VectorXd s = (w * (u0.square() + u1.square())).matrix();
    return phi_[0].transpose() * s.asDiagonal() * phi_[0] + phi_[1].transpose() * s.asDiagonal() * phi_[1];
  }

  Eigen::VectorXd G(const Eigen::VectorXd& c) const { return K_ * c + cubic(c) - b_; }
  Eigen::MatrixXd J(const Eigen::VectorXd& c) const { return K_ + cubic_jacobian(c); }

 private:
  void assemble_linear() {
    const Discretization& d = *in_.disc;
    const Eigen::VectorXd gs = d.fluid->gram();
    const Eigen::VectorXd gt = d.time->gram();
    const Eigen::MatrixXd Dt = gt.asDiagonal() * d.time->fam.derivative_matrix();  // int tau_l tau_j'
    const ViscousStressForm V = assemble_viscous_form(*d.fluid, p_.mu, p_.zeta);
    K_ = Eigen::MatrixXd::Zero(size(), size());
    for (int j = 0; j < nt_; ++j)
      for (int l = 0; l < nt_; ++l) {
        auto blk = K_.block(Eigen::Index(n_) * j, Eigen::Index(n_) * l, n_, n_);
        if (Dt(l, j) != 0.0) blk.diagonal() += -p_.delta * Dt(l, j) * gs;
        if (j == l) blk += gt(j) * V.A;
      }
    // trace penalty on the lagged curve
    const Grid2& bg = d.beam_grid;
    const Eigen::ArrayXd zh = p_.flat_trace ? Eigen::ArrayXd::Zero(bg.size()) : wrapped_heights(in_.eta_lag->eta, bg, d.domain.H);
    trace_ = trace_table(*d.fluid, *d.time, bg, zh);
    const double w = bg.cell() / p_.eps;
    P_ = w * (trace_.phi[0].transpose() * trace_.phi[0] + trace_.phi[1].transpose() * trace_.phi[1]);
    K_ += P_;
  }

  void assemble_rhs() {
    const Discretization& d = *in_.disc;
    const Grid3& cg = d.coupling_grid;
    const FluidBasis& fb = *d.fluid;
    const TimeBasis& tb = *d.time;
    const Eigen::ArrayXd r = spectral_eval(in_.rho->values, in_.rho->grid, cg);
    const Eigen::ArrayXd rx = spectral_eval(in_.rho->values, in_.rho->grid, cg, 1, 0, 0);
    const Eigen::ArrayXd rz = spectral_eval(in_.rho->values, in_.rho->grid, cg, 0, 1, 0);
    const VectorGrid u = evaluate(*in_.u_lag, cg);
    const VectorGrid ux = evaluate(*in_.u_lag, cg, 0, 1, 0);
    const VectorGrid uz = evaluate(*in_.u_lag, cg, 0, 0, 1);
    const Eigen::ArrayXd pres = density_power(r, p_.gamma) + p_.delta * density_power(r, p_.a);

    Eigen::ArrayXd plain[2], gdx[2], gdz[2], gdt[2];
    for (int c = 0; c < 2; ++c) {
      gdt[c] = r * u.c[c];
      gdx[c] = Eigen::ArrayXd::Zero(cg.size());
      gdz[c] = Eigen::ArrayXd::Zero(cg.size());
      if (p_.convection) {
        gdx[c] = r * u.c[0] * u.c[c];
        gdz[c] = r * u.c[1] * u.c[c];
      }
      plain[c] = -p_.eps * (rx * ux.c[c] + rz * uz.c[c]) + 0.5 * p_.eps * (p_.M - r) * u.c[c];
    }
    gdx[0] += pres;
    gdz[1] += pres;
    if (in_.F) {
      const VectorGrid F = evaluate(*in_.F, cg);
      for (int c = 0; c < 2; ++c) plain[c] += r * F.c[c];
    }
    Eigen::MatrixXd B = test_against(fb, tb, cg, &plain[0], &plain[1]) + test_against(fb, tb, cg, &gdx[0], &gdx[1], 0, 1, 0) +
                        test_against(fb, tb, cg, &gdz[0], &gdz[1], 0, 0, 1) + test_against(fb, tb, cg, &gdt[0], &gdt[1], 1, 0, 0);
    b_ = flatten(B);
    // (1/eps) int eta_t e2 . psi
    const Grid2& bg = d.beam_grid;
    const Eigen::ArrayXd et = evaluate(in_.eta_lag->eta, bg, 1, 0);
    b_ += (bg.cell() / p_.eps) * (trace_.phi[1].transpose() * et.matrix());
  }

  FluidInputs in_;
  FluidParams p_;
  int n_ = 0, nt_ = 0;
  Eigen::MatrixXd K_, P_;
  Eigen::VectorXd b_;
  TraceTable trace_;
  std::array<Eigen::MatrixXd, 2> phi_;
};

// --------------------------------------------------------------- solve ----

namespace detail {

inline bool stagnated(const std::vector<double>& h, int window) {
  if (static_cast<int>(h.size()) <= window) return false;
  return h.back() > 0.9 * h[h.size() - 1 - static_cast<size_t>(window)];
}

inline bool picard(const FluidSystem& sys, Eigen::VectorXd& c, double target, const FluidSolveOptions& o, std::vector<double>& hist,
                   int& its) {
  for (int k = 0; k < o.max_picard; ++k) {
    const Eigen::MatrixXd A = sys.K() + sys.cubic_picard(c);
    const Eigen::VectorXd cn = A.partialPivLu().solve(sys.b());
    c = (1.0 - o.picard_damping) * c + o.picard_damping * cn;
    ++its;
    hist.push_back(sys.G(c).norm());
    if (!std::isfinite(hist.back())) return false;
    if (hist.back() <= target) return true;
    if (stagnated(hist, o.stagnation_window)) return false;
  }
  return false;
}

inline bool newton(const FluidSystem& sys, Eigen::VectorXd& c, double target, const FluidSolveOptions& o, std::vector<double>& hist,
                   int& its) {
  Eigen::VectorXd g = sys.G(c);
  double gn = g.norm();
  hist.push_back(gn);
  if (gn <= target) return true;
  const size_t start = hist.size() - 1;
  for (int k = 0; k < o.max_newton; ++k) {
    const Eigen::VectorXd dc = sys.J(c).partialPivLu().solve(-g);
    double step = 1.0;
    Eigen::VectorXd trial;
    double tn = gn;
    for (int ls = 0; ls < 30; ++ls) {
      trial = c + step * dc;
      tn = sys.G(trial).norm();
      if (tn < gn || tn <= target) break;
      step *= 0.5;
    }
    ++its;
    if (!(tn < gn) && !(tn <= target)) return false;  // no descent along the Newton direction
    c = trial;
    g = sys.G(c);
    gn = g.norm();
    hist.push_back(gn);
    if (gn <= target) return true;
    if (hist.size() - start > static_cast<size_t>(o.stagnation_window) && stagnated(hist, o.stagnation_window)) return false;
  }
  return false;
}

}  // namespace detail

inline FluidSolveResult solve_fluid(const FluidInputs& in, const FluidParams& p, const FluidSolveOptions& o = {}) {
  const FluidSystem sys(in, p);
  const Discretization& d = *in.disc;
  FluidSolveResult out{FluidField(d.fluid, d.time), 0, o.path, {}};
  Eigen::VectorXd c = in.u_lag->same_bases(out.u) ? in.u_lag->vec() : Eigen::VectorXd::Zero(sys.size());
  const double target = o.tol * std::max(1.0, sys.b().norm());

  bool ok = false;
  if (o.path == FluidPath::Newton) {
    ok = detail::newton(sys, c, target, o, out.history, out.iterations);
    if (!ok) {
      out.path_used = FluidPath::Picard;
      if (!c.allFinite()) c.setZero();
      ok = detail::picard(sys, c, target, o, out.history, out.iterations);
      // Picard reaches the basin; let Newton finish the quadratic phase
      if (!ok && c.allFinite()) ok = detail::newton(sys, c, target, o, out.history, out.iterations);
    }
  } else {
    ok = detail::picard(sys, c, target, o, out.history, out.iterations);
  }
  if (!ok) throw SolverError("solve_fluid: Newton and damped Picard stagnated", out.history);
  out.u.set_vec(c);
  return out;
}

// ------------------------------------------------------------ residual ----

/// Weak residual of the fluid momentum equation against every phi_k, split
/// by term. Signs as in the equation written "sum of terms = 0".
struct FluidResidual {
  Eigen::VectorXd time_delta, inertia, convection, pressure, viscous, cubic, eps_terms, penalty, forcing;
  Eigen::VectorXd total() const {
    return time_delta + inertia + convection + pressure + viscous + cubic + eps_terms + penalty + forcing;
  }
};

/// Independent of the assembled matrices: every term is evaluated on grids
/// from the fields themselves.
inline FluidResidual fluid_residual(const FluidField& u, const FluidInputs& in, const FluidParams& p) {
  p.validate();
  const Discretization& d = *in.disc;
  const FluidBasis& fb = *d.fluid;
  const TimeBasis& tb = *d.time;
  const Grid3& cg = d.coupling_grid;
  const Grid3& fg = d.fluid_grid;
  auto vec = [](const Eigen::MatrixXd& m) { return flatten(m); };
  FluidResidual R;

  // terms linear or cubic in u: fluid grid
  const VectorGrid uf = evaluate(u, fg);
  R.time_delta = p.delta * vec(test_against(fb, tb, fg, &uf.c[0], &uf.c[1], 1, 0, 0));
  {
    const VectorGrid gx = evaluate(u, fg, 0, 1, 0), gz = evaluate(u, fg, 0, 0, 1);
    // grad u entries (grad u)_{ab} = d_a u_b
    const Eigen::ArrayXd& d00 = gx.c[0];
    const Eigen::ArrayXd& d01 = gx.c[1];
    const Eigen::ArrayXd& d10 = gz.c[0];
    const Eigen::ArrayXd& d11 = gz.c[1];
    const Eigen::ArrayXd div = d00 + d11;
    // S_{ab} = mu (d_a u_b + d_b u_a) + (zeta - mu) div delta_ab; tested against d_a phi_b
    const Eigen::ArrayXd S00 = 2.0 * p.mu * d00 + (p.zeta - p.mu) * div;
    const Eigen::ArrayXd S11 = 2.0 * p.mu * d11 + (p.zeta - p.mu) * div;
    const Eigen::ArrayXd S01 = p.mu * (d01 + d10);
    // a = x row: (S00, S01) against d_x phi; a = z row: (S10, S11) against d_z phi
    R.viscous = -vec(test_against(fb, tb, fg, &S00, &S01, 0, 1, 0) + test_against(fb, tb, fg, &S01, &S11, 0, 0, 1));
  }
  {
    const Eigen::ArrayXd s = uf.c[0].square() + uf.c[1].square();
    const Eigen::ArrayXd c0 = -p.delta * s * uf.c[0], c1 = -p.delta * s * uf.c[1];
    R.cubic = p.cubic ? vec(test_against(fb, tb, fg, &c0, &c1)) : Eigen::VectorXd::Zero(u.coef.size());
  }

  // density-weighted terms: coupling grid
  const Eigen::ArrayXd r = spectral_eval(in.rho->values, in.rho->grid, cg);
  const Eigen::ArrayXd rx = spectral_eval(in.rho->values, in.rho->grid, cg, 1, 0, 0);
  const Eigen::ArrayXd rz = spectral_eval(in.rho->values, in.rho->grid, cg, 0, 1, 0);
  const VectorGrid ul = evaluate(*in.u_lag, cg);
  {
    const Eigen::ArrayXd m0 = r * ul.c[0], m1 = r * ul.c[1];
    R.inertia = vec(test_against(fb, tb, cg, &m0, &m1, 1, 0, 0));
  }
  if (p.convection) {
    const Eigen::ArrayXd a00 = r * ul.c[0] * ul.c[0], a01 = r * ul.c[0] * ul.c[1], a11 = r * ul.c[1] * ul.c[1];
    R.convection = vec(test_against(fb, tb, cg, &a00, &a01, 0, 1, 0) + test_against(fb, tb, cg, &a01, &a11, 0, 0, 1));
  } else {
    R.convection = Eigen::VectorXd::Zero(u.coef.size());
  }
  {
    const Eigen::ArrayXd pr = density_power(r, p.gamma) + p.delta * density_power(r, p.a);
    R.pressure = vec(test_against(fb, tb, cg, &pr, nullptr, 0, 1, 0) + test_against(fb, tb, cg, nullptr, &pr, 0, 0, 1));
  }
  {
    const VectorGrid lx = evaluate(*in.u_lag, cg, 0, 1, 0), lz = evaluate(*in.u_lag, cg, 0, 0, 1);
    Eigen::ArrayXd e[2];
    for (int c = 0; c < 2; ++c) e[c] = -p.eps * (rx * lx.c[c] + rz * lz.c[c]) + 0.5 * p.eps * (p.M - r) * ul.c[c];
    R.eps_terms = vec(test_against(fb, tb, cg, &e[0], &e[1]));
  }
  if (in.F) {
    const VectorGrid F = evaluate(*in.F, cg);
    const Eigen::ArrayXd f0 = r * F.c[0], f1 = r * F.c[1];
    R.forcing = vec(test_against(fb, tb, cg, &f0, &f1));
  } else {
    R.forcing = Eigen::VectorXd::Zero(u.coef.size());
  }

  // trace penalty on the lagged curve
  const Grid2& bg = d.beam_grid;
  const Eigen::ArrayXd zh = p.flat_trace ? Eigen::ArrayXd::Zero(bg.size()) : wrapped_heights(in.eta_lag->eta, bg, d.domain.H);
  const TraceTable tt = trace_table(fb, tb, bg, zh);
  const Eigen::ArrayXd et = evaluate(in.eta_lag->eta, bg, 1, 0);
  const Eigen::VectorXd cu = u.vec();
  const Eigen::VectorXd w0 = tt.phi[0] * cu;
  const Eigen::VectorXd w1 = tt.phi[1] * cu - et.matrix();
  R.penalty = -(bg.cell() / p.eps) * (tt.phi[0].transpose() * w0 + tt.phi[1].transpose() * w1);
  return R;
}

}  // namespace pfsi
