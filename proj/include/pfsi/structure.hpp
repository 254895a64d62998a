#pragma once

// Penalised viscoelastic beam in the space-time Galerkin space. Solved in the
// time derivative u = eta_t (time-mean-free part S) followed by the static
// elliptic problem for the time-constant part G.

#include <Eigen/Dense>
#include <memory>

#include "pfsi/basis.hpp"
#include "pfsi/errors.hpp"
#include "pfsi/trace.hpp"

namespace pfsi {

struct BeamState {
  BeamField eta;

  BeamField eta_t() const { return differentiate(eta, Deriv::t); }
  BeamField eta_x() const { return differentiate(eta, Deriv::x); }
  BeamField eta_xx() const { return differentiate(eta, Deriv::xx); }
  BeamField eta_tx() const { return differentiate(eta, Deriv::tx); }
};

inline BeamState zero_beam(std::shared_ptr<const BeamBasis> b, std::shared_ptr<const TimeBasis> t) {
  return BeamState{BeamField(std::move(b), std::move(t))};
}

/// Data of one structure solve, sampled on the beam grid.
struct PenaltyInput {
  Grid2 grid;
  Eigen::ArrayXd v_e2;  // vertical trace of the lagged fluid velocity
  Eigen::ArrayXd f;     // beam forcing
  double eps = 0.1;

  void validate() const {
    if (!(eps > 0.0)) throw ConfigError("structure: eps must be positive");
    if (v_e2.size() != grid.size() || f.size() != grid.size()) throw ConfigError("structure: inputs not sampled on the beam grid");
  }
};

/// Spatial Gram matrices M_d(k, i) = int s_k^(d) s_i^(d) and time matrices.
struct StructureMatrices {
  Eigen::MatrixXd M0, M1, M2;
  Eigen::MatrixXd Gt;  // int tau_l tau_j (diagonal)
  Eigen::MatrixXd Dt;  // int tau_l tau_j'
  Eigen::MatrixXd A;   // mean-free antiderivative on time coefficients
};

inline StructureMatrices structure_matrices(const BeamBasis& b, const TimeBasis& tb) {
  StructureMatrices s;
  s.M0 = b.derivative_gram(0);
  s.M1 = b.derivative_gram(1);
  s.M2 = b.derivative_gram(2);
  const Eigen::VectorXd g = tb.gram();
  s.Gt = g.asDiagonal();
  s.Dt = g.asDiagonal() * tb.fam.derivative_matrix();
  s.A = tb.fam.antiderivative_matrix();
  return s;
}

/// The bilinear form B(u, v) on S, rows (k + n l), columns (i + n j), l, j >= 1.
inline Eigen::MatrixXd structure_operator(const StructureMatrices& s, double eps) {
  const Eigen::Index n = s.M0.rows(), nt = s.Gt.rows();
  const Eigen::Index ns = nt - 1;
  const Eigen::MatrixXd GA = s.Gt * s.A;
  Eigen::MatrixXd B(n * ns, n * ns);
  for (Eigen::Index l = 0; l < ns; ++l)
    for (Eigen::Index j = 0; j < ns; ++j) {
      const Eigen::Index L = l + 1, J = j + 1;
      B.block(n * l, n * j, n, n) = s.Dt(L, J) * s.M0 + GA(L, J) * s.M2 + s.Gt(L, J) * (s.M1 + s.M0 / eps);
    }
  return B;
}

/// Right-hand side r(k, l) = int (f + v_e2 / eps) s_k tau_l.
inline Eigen::MatrixXd structure_rhs(const BeamBasis& b, const TimeBasis& tb, const PenaltyInput& in) {
  return test_against(b, tb, in.grid, in.f + in.v_e2 / in.eps);
}

inline BeamState solve_structure(const PenaltyInput& in, std::shared_ptr<const BeamBasis> b, std::shared_ptr<const TimeBasis> tb) {
  in.validate();
  const StructureMatrices s = structure_matrices(*b, *tb);
  const Eigen::MatrixXd r = structure_rhs(*b, *tb, in);
  const Eigen::Index n = b->size(), nt = tb->size();

  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, nt);
  if (nt > 1) {
    const Eigen::MatrixXd B = structure_operator(s, in.eps);
    const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(r.data() + n, n * (nt - 1));
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    const Eigen::VectorXd x = lu.solve(a);
    if (!x.allFinite() || (B * x - a).norm() > 1e-8 * (B.norm() * x.norm() + a.norm()))
      throw InternalError("solve_structure: singular time-dependent system");
    U.rightCols(nt - 1) = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, nt - 1);
  }
  BeamState out = zero_beam(b, tb);
  out.eta.coef = U * s.A.transpose();
  // static part: T int G'' s_k'' = r(k, 0)
  Eigen::LDLT<Eigen::MatrixXd> ldlt(tb->T() * s.M2);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) throw InternalError("solve_structure: singular static system");
  out.eta.coef.col(0) = ldlt.solve(r.col(0));
  return out;
}

/// Residual of the structure momentum equation
///   int eta_t psi_t - eta_xx psi_xx - eta_tx psi_x - (eta_t - v) psi / eps + f psi
/// against every psi = s_k tau_l, from grid values of eta.
inline Eigen::MatrixXd structure_residual(const BeamState& st, const PenaltyInput& in) {
  in.validate();
  const BeamBasis& b = *st.eta.space;
  const TimeBasis& tb = *st.eta.time;
  const Grid2& g = in.grid;
  const Eigen::ArrayXd et = evaluate(st.eta, g, 1, 0);
  const Eigen::ArrayXd exx = evaluate(st.eta, g, 0, 2);
  const Eigen::ArrayXd etx = evaluate(st.eta, g, 1, 1);
  return test_against(b, tb, g, et, 1, 0) - test_against(b, tb, g, exx, 0, 2) - test_against(b, tb, g, etx, 0, 1) +
         test_against(b, tb, g, in.f - (et - in.v_e2) / in.eps);
}

}  // namespace pfsi
