#pragma once

// Space-time bases of the Galerkin scheme and fields expanded in them.
//
//  * TimeBasis: 1, sin(2 pi k t/T), cos(2 pi k t/T), k = 1..m (family ordering
//    of trig.hpp).
//  * BeamBasis: periodic functions on (0,L) with s(0) = 0, stored as linear
//    combinations of an x trigonometric family.
//  * FluidBasis: single tensor modes X(x) Z(z) e_c on the periodic box.
//
// A SpectralField<Space> is the finite sum  sum_ij c(i,j) space_i tau_j.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <tuple>
#include <vector>

#include "pfsi/errors.hpp"
#include "pfsi/geometry.hpp"
#include "pfsi/trig.hpp"

namespace pfsi {

// ---------------------------------------------------------------- time ----

struct TimeBasis {
  TrigFamily fam;

  double T() const { return fam.period; }
  int m() const { return fam.K; }
  int size() const { return fam.size(); }
  double value(int j, double t, int d = 0) const { return fam.value(j, t, d); }
  /// Diagonal Gram matrix: T for tau_0, T/2 otherwise.
  Eigen::VectorXd gram() const { return fam.gram_diagonal(); }
};

inline std::shared_ptr<const TimeBasis> make_time_basis(double T, int m) {
  if (!(T > 0.0)) throw ConfigError("time basis: T must be positive");
  if (m < 0) throw ConfigError("time basis: m must be non-negative");
  return std::make_shared<const TimeBasis>(TimeBasis{TrigFamily{T, m}});
}

// ---------------------------------------------------------------- beam ----

struct BeamBasis {
  TrigFamily fam;       // x family, period L
  Eigen::MatrixXd gen;  // (fam.size() x n): s_i = sum_p gen(p,i) chi_p
  bool orthonormal = true;

  int size() const { return static_cast<int>(gen.cols()); }
  double L() const { return fam.period; }

  double value(int i, double x, int d = 0) const {
    double s = 0.0;
    for (int p = 0; p < fam.size(); ++p)
      if (gen(p, i) != 0.0) s += gen(p, i) * fam.value(p, x, d);
    return s;
  }

  /// Node values of the d-th derivative of every basis function (nodes x n).
  Eigen::MatrixXd table(const UniformGrid1D& g, int d = 0) const { return g.table(fam, d) * gen; }

  /// Gram matrix of the d-th derivatives in L2(0,L): int s_i^(d) s_k^(d).
  Eigen::MatrixXd derivative_gram(int d) const {
    Eigen::VectorXd w = fam.gram_diagonal();
    for (int p = 0; p < fam.size(); ++p) w(p) *= std::pow(fam.wavenumber(p), 2 * d) * (d > 0 && p == 0 ? 0.0 : 1.0);
    return gen.transpose() * w.asDiagonal() * gen;
  }

  /// Gram matrix in the H2 product (u,v) -> int uv + u'v' + u''v''.
  Eigen::MatrixXd h2_gram() const { return derivative_gram(0) + derivative_gram(1) + derivative_gram(2); }
};

/// Generators sin(2 pi k x/L) and cos(2 pi k x/L) - 1 interleaved by wavenumber,
/// orthonormalised in H2 by modified Gram-Schmidt.
inline std::shared_ptr<const BeamBasis> make_beam_basis(double L, int n) {
  if (!(L > 0.0)) throw ConfigError("beam basis: L must be positive");
  if (n < 1) throw ConfigError("beam basis: n must be at least 1");
  const int K = (n + 1) / 2;
  BeamBasis b{TrigFamily{L, K}, Eigen::MatrixXd::Zero(2 * K + 1, n), true};
  for (int i = 0; i < n; ++i) {
    const int k = i / 2 + 1;
    if (i % 2 == 0) {
      b.gen(TrigFamily::index(k, TrigKind::Sin), i) = 1.0;
    } else {
      b.gen(TrigFamily::index(k, TrigKind::Cos), i) = 1.0;
      b.gen(0, i) = -1.0;
    }
  }
  // H2 metric on the family is diagonal.
  Eigen::VectorXd w = b.fam.gram_diagonal();
  for (int p = 0; p < b.fam.size(); ++p) {
    const double k2 = std::pow(b.fam.wavenumber(p), 2);
    w(p) *= 1.0 + k2 + k2 * k2;
  }
  auto dot = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return (u.array() * w.array() * v.array()).sum(); };
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = b.gen.col(i);
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < i; ++j) v -= dot(v, b.gen.col(j)) * b.gen.col(j);
    const double nrm = std::sqrt(dot(v, v));
    if (!(nrm > 0.0)) throw InternalError("beam basis: dependent generators");
    b.gen.col(i) = v / nrm;
  }
  return std::make_shared<const BeamBasis>(std::move(b));
}

// --------------------------------------------------------------- fluid ----

struct FluidMode {
  int ix = 0;     // index into the x family
  int iz = 0;     // index into the z family
  int comp = 0;   // 0 -> e1, 1 -> e2
  double scale = 1.0;
};

struct FluidBasis {
  TrigFamily xfam;  // period L
  TrigFamily zfam;  // period 2H
  std::vector<FluidMode> modes;
  bool orthogonal = true;

  int size() const { return static_cast<int>(modes.size()); }
  double L() const { return xfam.period; }
  double H() const { return 0.5 * zfam.period; }

  double value(int i, double x, double z, int dx = 0, int dz = 0) const {
    const auto& md = modes[static_cast<size_t>(i)];
    return md.scale * xfam.value(md.ix, x, dx) * zfam.value(md.iz, z, dz);
  }

  /// Diagonal of the L2(Omega) Gram matrix (componentwise modes are orthogonal).
  Eigen::VectorXd gram() const {
    const Eigen::VectorXd gx = xfam.gram_diagonal(), gz = zfam.gram_diagonal();
    Eigen::VectorXd g(size());
    for (int i = 0; i < size(); ++i) {
      const auto& md = modes[static_cast<size_t>(i)];
      g(i) = md.scale * md.scale * gx(md.ix) * gz(md.iz);
    }
    return g;
  }

  /// Squared wavenumber |k|^2 of mode i.
  double wavenumber2(int i) const {
    const auto& md = modes[static_cast<size_t>(i)];
    return std::pow(xfam.wavenumber(md.ix), 2) + std::pow(zfam.wavenumber(md.iz), 2);
  }
};

/// Real Fourier modes {1,cos,sin}(2 pi k x/L) {1,cos,sin}(pi l z/H) e_c, sorted by
/// increasing wavenumber; ties broken by (k, l, x kind, z kind, component).
inline std::shared_ptr<const FluidBasis> make_fluid_basis(double L, double H, int n) {
  if (!(L > 0.0) || !(H > 0.0)) throw ConfigError("fluid basis: L and H must be positive");
  if (n < 1) throw ConfigError("fluid basis: n must be at least 1");
  struct Cand {
    double k2;
    int kx, kz, ix, iz, comp;
  };
  const int R = n;  // every shell adds at least two members
  std::vector<Cand> cands;
  const TrigFamily fx{L, R}, fz{2.0 * H, R};
  for (int ix = 0; ix < fx.size(); ++ix)
    for (int iz = 0; iz < fz.size(); ++iz)
      for (int c = 0; c < 2; ++c) {
        const double k2 = std::pow(fx.wavenumber(ix), 2) + std::pow(fz.wavenumber(iz), 2);
        cands.push_back({k2, TrigFamily::harmonic(ix), TrigFamily::harmonic(iz), ix, iz, c});
      }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    const double tol = 1e-12 * std::max({1.0, a.k2, b.k2});
    if (std::abs(a.k2 - b.k2) > tol) return a.k2 < b.k2;
    return std::tie(a.kx, a.kz, a.ix, a.iz, a.comp) < std::tie(b.kx, b.kz, b.ix, b.iz, b.comp);
  });
  cands.resize(static_cast<size_t>(n));
  int Kx = 0, Kz = 0;
  for (const auto& c : cands) {
    Kx = std::max(Kx, c.kx);
    Kz = std::max(Kz, c.kz);
  }
  FluidBasis b{TrigFamily{L, Kx}, TrigFamily{2.0 * H, Kz}, {}, true};
  for (const auto& c : cands) b.modes.push_back({c.ix, c.iz, c.comp, 1.0});
  return std::make_shared<const FluidBasis>(std::move(b));
}

// --------------------------------------------------------------- fields ----

template <class Space>
struct SpectralField {
  std::shared_ptr<const Space> space;
  std::shared_ptr<const TimeBasis> time;
  Eigen::MatrixXd coef;  // (space->size() x time->size())

  SpectralField() = default;
  SpectralField(std::shared_ptr<const Space> s, std::shared_ptr<const TimeBasis> t)
      : space(std::move(s)), time(std::move(t)), coef(Eigen::MatrixXd::Zero(space->size(), time->size())) {}
  SpectralField(std::shared_ptr<const Space> s, std::shared_ptr<const TimeBasis> t, Eigen::MatrixXd c)
      : space(std::move(s)), time(std::move(t)), coef(std::move(c)) {
    if (coef.rows() != space->size() || coef.cols() != time->size())
      throw ConfigError("SpectralField: coefficient tensor does not match basis dimensions");
  }

  Eigen::VectorXd vec() const { return Eigen::Map<const Eigen::VectorXd>(coef.data(), coef.size()); }
  void set_vec(const Eigen::VectorXd& v) { coef = Eigen::Map<const Eigen::MatrixXd>(v.data(), coef.rows(), coef.cols()); }

  bool same_bases(const SpectralField& o) const { return space == o.space && time == o.time; }

  SpectralField& operator+=(const SpectralField& o) {
    require_same(o);
    coef += o.coef;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same(o);
    coef -= o.coef;
    return *this;
  }
  SpectralField& operator*=(double s) {
    coef *= s;
    return *this;
  }
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

 private:
  void require_same(const SpectralField& o) const {
    if (!same_bases(o)) throw ConfigError("SpectralField: basis mismatch");
  }
};

using BeamField = SpectralField<BeamBasis>;
using FluidField = SpectralField<FluidBasis>;

// ----------------------------------------------------------- evaluation ----

/// eta^(dt,dx)(t, x).
inline double evaluate(const BeamField& f, double t, double x, int dt = 0, int dx = 0) {
  double s = 0.0;
  for (int i = 0; i < f.space->size(); ++i) {
    const double si = f.space->value(i, x, dx);
    for (int j = 0; j < f.time->size(); ++j) s += f.coef(i, j) * si * f.time->value(j, t, dt);
  }
  return s;
}

/// Values on a Gamma x (0,T) grid, layout t * nx + x.
inline Eigen::ArrayXd evaluate(const BeamField& f, const Grid2& g, int dt = 0, int dx = 0) {
  const Eigen::MatrixXd X = f.space->table(g.x, dx);          // nx x n
  const Eigen::MatrixXd Tt = g.t.table(f.time->fam, dt);       // nt x nt_modes
  const Eigen::MatrixXd V = X * f.coef * Tt.transpose();       // nx x nt
  return Eigen::Map<const Eigen::ArrayXd>(V.data(), V.size());
}

/// Component c of u^(dt,dx,dz)(t, x, z).
inline double evaluate(const FluidField& f, int comp, double t, double x, double z, int dt = 0, int dx = 0, int dz = 0) {
  double s = 0.0;
  for (int i = 0; i < f.space->size(); ++i) {
    if (f.space->modes[static_cast<size_t>(i)].comp != comp) continue;
    const double v = f.space->value(i, x, z, dx, dz);
    for (int j = 0; j < f.time->size(); ++j) s += f.coef(i, j) * v * f.time->value(j, t, dt);
  }
  return s;
}

struct VectorGrid {
  Eigen::ArrayXd c[2];
};

/// Both components on a space-time grid, layout of Grid3.
inline VectorGrid evaluate(const FluidField& f, const Grid3& g, int dt = 0, int dx = 0, int dz = 0) {
  const FluidBasis& b = *f.space;
  const Eigen::MatrixXd Xf = g.x.table(b.xfam, dx);  // nx x |xfam|
  const Eigen::MatrixXd Zf = g.z.table(b.zfam, dz);  // nz x |zfam|
  const Eigen::MatrixXd Tt = g.t.table(f.time->fam, dt);
  const Eigen::MatrixXd A = f.coef * Tt.transpose();  // n x nt
  VectorGrid out;
  for (int c = 0; c < 2; ++c) {
    out.c[c] = Eigen::ArrayXd::Zero(g.size());
    std::vector<int> idx;
    for (int i = 0; i < b.size(); ++i)
      if (b.modes[static_cast<size_t>(i)].comp == c) idx.push_back(i);
    if (idx.empty()) continue;
    const Eigen::Index nc = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd Xc(g.nx(), nc), Zc(g.nz(), nc);
    for (Eigen::Index q = 0; q < nc; ++q) {
      const auto& md = b.modes[static_cast<size_t>(idx[static_cast<size_t>(q)])];
      Xc.col(q) = md.scale * Xf.col(md.ix);
      Zc.col(q) = Zf.col(md.iz);
    }
    Eigen::MatrixXd slab(g.nx(), g.nz());
    for (int t = 0; t < g.nt(); ++t) {
      Eigen::VectorXd a(nc);
      for (Eigen::Index q = 0; q < nc; ++q) a(q) = A(idx[static_cast<size_t>(q)], t);
      slab.noalias() = Xc * a.asDiagonal() * Zc.transpose();  // nx x nz, x fastest
      out.c[c].segment(g.at(0, 0, t), slab.size()) = Eigen::Map<const Eigen::ArrayXd>(slab.data(), slab.size());
    }
  }
  return out;
}

// -------------------------------------------------- testing (adjoint) ----

/// r(i,j) = sum_q w_q G(q) s_i^(dx)(x_q) tau_j^(dt)(t_q) on a Gamma grid.
inline Eigen::MatrixXd test_against(const BeamBasis& b, const TimeBasis& tb, const Grid2& g, const Eigen::ArrayXd& G,
                                    int dt = 0, int dx = 0) {
  if (G.size() != g.size()) throw ConfigError("test_against: grid mismatch");
  const Eigen::MatrixXd X = b.table(g.x, dx);
  const Eigen::MatrixXd Tt = g.t.table(tb.fam, dt);
  Eigen::Map<const Eigen::MatrixXd> Gm(G.data(), g.nx(), g.nt());
  return g.cell() * X.transpose() * Gm * Tt;
}

/// r(i,j) = sum_q w_q G_c(q) d^(dx,dz,dt) (f_i tau_j)_c(q), summed over the
/// components whose grids are supplied (nullptr skips a component).
inline Eigen::MatrixXd test_against(const FluidBasis& b, const TimeBasis& tb, const Grid3& g, const Eigen::ArrayXd* G0,
                                    const Eigen::ArrayXd* G1, int dt = 0, int dx = 0, int dz = 0) {
  const Eigen::ArrayXd* G[2] = {G0, G1};
  const Eigen::MatrixXd Xf = g.x.table(b.xfam, dx);
  const Eigen::MatrixXd Zf = g.z.table(b.zfam, dz);
  const Eigen::MatrixXd Tt = g.t.table(tb.fam, dt);
  Eigen::MatrixXd vals = Eigen::MatrixXd::Zero(b.size(), g.nt());  // per basis, per time node
  for (int c = 0; c < 2; ++c) {
    if (!G[c]) continue;
    if (G[c]->size() != g.size()) throw ConfigError("test_against: grid mismatch");
    std::vector<int> idx;
    for (int i = 0; i < b.size(); ++i)
      if (b.modes[static_cast<size_t>(i)].comp == c) idx.push_back(i);
    if (idx.empty()) continue;
    const Eigen::Index nc = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd Xc(g.nx(), nc), Zc(g.nz(), nc);
    for (Eigen::Index q = 0; q < nc; ++q) {
      const auto& md = b.modes[static_cast<size_t>(idx[static_cast<size_t>(q)])];
      Xc.col(q) = md.scale * Xf.col(md.ix);
      Zc.col(q) = Zf.col(md.iz);
    }
    Eigen::MatrixXd W(g.nz(), nc);
    for (int t = 0; t < g.nt(); ++t) {
      Eigen::Map<const Eigen::MatrixXd> slab(G[c]->data() + g.at(0, 0, t), g.nx(), g.nz());
      W.noalias() = slab.transpose() * Xc;  // nz x nc
      for (Eigen::Index q = 0; q < nc; ++q) vals(idx[static_cast<size_t>(q)], t) += Zc.col(q).dot(W.col(q));
    }
  }
  return g.cell() * vals * Tt;
}

// ------------------------------------------------------- differentiate ----

enum class Deriv { t, x, z, xx, tx };

/// Exact derivative of a beam field; spatial derivatives leave the beam basis
/// and are returned over a derived (non-orthonormal) basis.
inline BeamField differentiate(const BeamField& f, Deriv which) {
  if (which == Deriv::z) throw InputDomainError("differentiate: beam fields have no z dependence");
  const Eigen::MatrixXd Dt = f.time->fam.derivative_matrix();
  const Eigen::MatrixXd Dx = f.space->fam.derivative_matrix();
  auto space_d = [&](int order) {
    BeamBasis b = *f.space;
    for (int k = 0; k < order; ++k) b.gen = Dx * b.gen;
    b.orthonormal = false;
    return std::make_shared<const BeamBasis>(std::move(b));
  };
  switch (which) {
    case Deriv::t: return BeamField(f.space, f.time, f.coef * Dt.transpose());
    case Deriv::x: return BeamField(space_d(1), f.time, f.coef);
    case Deriv::xx: return BeamField(space_d(2), f.time, f.coef);
    case Deriv::tx: return BeamField(space_d(1), f.time, f.coef * Dt.transpose());
    default: throw InputDomainError("differentiate: unsupported derivative");
  }
}

/// Exact derivative of a fluid field; each mode maps to one partner mode.
inline FluidField differentiate(const FluidField& f, Deriv which) {
  const Eigen::MatrixXd Dt = f.time->fam.derivative_matrix();
  auto spatial = [&](bool in_x, int order) {
    FluidBasis b = *f.space;
    b.orthogonal = false;
    for (auto& md : b.modes) {
      for (int k = 0; k < order; ++k) {
        const TrigFamily& fam = in_x ? b.xfam : b.zfam;
        int& idx = in_x ? md.ix : md.iz;
        const double w = fam.wavenumber(idx);
        switch (TrigFamily::kind(idx)) {
          case TrigKind::Const: md.scale = 0.0; break;
          case TrigKind::Sin: idx += 1; md.scale *= w; break;     // sin -> w cos
          case TrigKind::Cos: idx -= 1; md.scale *= -w; break;    // cos -> -w sin
        }
      }
    }
    return std::make_shared<const FluidBasis>(std::move(b));
  };
  switch (which) {
    case Deriv::t: return FluidField(f.space, f.time, f.coef * Dt.transpose());
    case Deriv::x: return FluidField(spatial(true, 1), f.time, f.coef);
    case Deriv::z: return FluidField(spatial(false, 1), f.time, f.coef);
    case Deriv::xx: return FluidField(spatial(true, 2), f.time, f.coef);
    case Deriv::tx: return FluidField(spatial(true, 1), f.time, f.coef * Dt.transpose());
  }
  throw InputDomainError("differentiate: unsupported derivative");
}

// ------------------------------------------------------------- project ----

/// Galerkin projection of grid values onto the beam space-time basis.
inline BeamField project(const Eigen::ArrayXd& values, const Grid2& g, std::shared_ptr<const BeamBasis> b,
                         std::shared_ptr<const TimeBasis> tb) {
  const Eigen::MatrixXd rhs = test_against(*b, *tb, g, values);
  const Eigen::MatrixXd Gs = b->derivative_gram(0);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Gs);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) throw InternalError("project: singular beam Gram matrix");
  Eigen::MatrixXd c = ldlt.solve(rhs);
  c = c * tb->gram().cwiseInverse().asDiagonal();
  return BeamField(std::move(b), std::move(tb), std::move(c));
}

/// Galerkin projection of a vector grid function onto the fluid space-time basis.
inline FluidField project(const VectorGrid& values, const Grid3& g, std::shared_ptr<const FluidBasis> b,
                          std::shared_ptr<const TimeBasis> tb) {
  const Eigen::MatrixXd rhs = test_against(*b, *tb, g, &values.c[0], &values.c[1]);
  const Eigen::VectorXd gs = b->gram();
  if ((gs.array() <= 0.0).any()) throw InternalError("project: singular fluid Gram matrix");
  Eigen::MatrixXd c = gs.cwiseInverse().asDiagonal() * rhs * tb->gram().cwiseInverse().asDiagonal();
  return FluidField(std::move(b), std::move(tb), std::move(c));
}

/// Uniform nodes on (0,L) x (-H,H) x (0,T).
inline Grid3 make_grid(const DomainSpec& d, int nx, int nz, int nt) {
  return Grid3{UniformGrid1D{0.0, d.L, nx}, UniformGrid1D{-d.H, 2.0 * d.H, nz}, UniformGrid1D{0.0, d.T, nt}};
}
inline Grid2 make_beam_grid(const DomainSpec& d, int nx, int nt) {
  return Grid2{UniformGrid1D{0.0, d.L, nx}, UniformGrid1D{0.0, d.T, nt}};
}

/// Default node count for exact quadrature of a product of `degree` band-K factors.
inline int quadrature_nodes(int K, int degree = 2, int floor = 16) { return std::max(degree * K + 1, floor); }

}  // namespace pfsi
