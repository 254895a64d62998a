#pragma once

// Evaluation of fluid fields along the (wrapped) beam curve z = eta_hat(t, x).

#include <Eigen/Dense>
#include <vector>

#include "pfsi/basis.hpp"
#include "pfsi/geometry.hpp"

namespace pfsi {

/// v(t_k, x_j) on a beam grid, both components; layout of Grid2.
struct TraceField {
  Grid2 grid;
  Eigen::ArrayXd v[2];
};

inline bool same_time_basis(const TimeBasis& a, const TimeBasis& b) { return a.T() == b.T() && a.m() == b.m(); }

/// Wrapped heights eta_hat on the beam grid.
inline Eigen::ArrayXd wrapped_heights(const BeamField& eta, const Grid2& g, double H) {
  Eigen::ArrayXd e = evaluate(eta, g);
  for (Eigen::Index q = 0; q < e.size(); ++q) e(q) = wrap_eta(e(q), H).eta_hat;
  return e;
}

/// u(t, x, eta_hat(t, x)) with closed-form basis evaluation at every node.
inline TraceField trace_velocity(const FluidField& u, const BeamField& eta, const Grid2& g) {
  if (!same_time_basis(*u.time, *eta.time)) throw ConfigError("trace_velocity: u and eta use different time bases");
  if (g.nx() < 1 || g.nt() < 1) throw ConfigError("trace_velocity: empty grid");
  const FluidBasis& b = *u.space;
  const Eigen::ArrayXd zh = wrapped_heights(eta, g, b.H());
  const Eigen::MatrixXd A = u.coef * g.t.table(u.time->fam).transpose();  // n x nt
  const Eigen::MatrixXd Xf = g.x.table(b.xfam);
  TraceField out{g, {Eigen::ArrayXd::Zero(g.size()), Eigen::ArrayXd::Zero(g.size())}};
  Eigen::VectorXd zt(b.zfam.size());
  for (int t = 0; t < g.nt(); ++t)
    for (int x = 0; x < g.nx(); ++x) {
      const Eigen::Index q = g.at(x, t);
      for (int p = 0; p < b.zfam.size(); ++p) zt(p) = b.zfam.value(p, zh(q));
      for (int i = 0; i < b.size(); ++i) {
        const auto& md = b.modes[static_cast<size_t>(i)];
        out.v[md.comp](q) += A(i, t) * md.scale * Xf(x, md.ix) * zt(md.iz);
      }
    }
  return out;
}

/// Trace of every space-time fluid basis function: rows are beam-grid nodes,
/// columns follow the SpectralField vectorisation i + n * j. One matrix per
/// component.
struct TraceTable {
  Eigen::MatrixXd phi[2];
};

inline TraceTable trace_table(const FluidBasis& b, const TimeBasis& tb, const Grid2& g, const Eigen::ArrayXd& eta_hat) {
  const int n = b.size(), nt = tb.size();
  const Eigen::MatrixXd Xf = g.x.table(b.xfam);
  const Eigen::MatrixXd Tt = g.t.table(tb.fam);
  TraceTable out{{Eigen::MatrixXd::Zero(g.size(), Eigen::Index(n) * nt), Eigen::MatrixXd::Zero(g.size(), Eigen::Index(n) * nt)}};
  Eigen::VectorXd zt(b.zfam.size());
  for (int t = 0; t < g.nt(); ++t)
    for (int x = 0; x < g.nx(); ++x) {
      const Eigen::Index q = g.at(x, t);
      for (int p = 0; p < b.zfam.size(); ++p) zt(p) = b.zfam.value(p, eta_hat(q));
      for (int i = 0; i < n; ++i) {
        const auto& md = b.modes[static_cast<size_t>(i)];
        const double s = md.scale * Xf(x, md.ix) * zt(md.iz);
        if (s == 0.0) continue;
        for (int j = 0; j < nt; ++j) out.phi[md.comp](q, i + Eigen::Index(n) * j) = s * Tt(t, j);
      }
    }
  return out;
}

/// Lower and upper boundary of the equivalent moving domain eta < z < eta + 2H.
struct MovingDomainBounds {
  Eigen::ArrayXd x, lower, upper;
};

inline MovingDomainBounds moving_domain_map(const BeamField& eta, double t, const Eigen::ArrayXd& x, double H) {
  if (!std::isfinite(t)) throw InputDomainError("moving_domain_map: non-finite time");
  if (!(H > 0.0)) throw InputDomainError("moving_domain_map: H must be positive");
  MovingDomainBounds out{x, Eigen::ArrayXd(x.size()), Eigen::ArrayXd(x.size())};
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    out.lower(j) = evaluate(eta, t, x(j));
    out.upper(j) = out.lower(j) + 2.0 * H;
  }
  return out;
}

}  // namespace pfsi
