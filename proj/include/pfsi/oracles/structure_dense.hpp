#pragma once

// Monolithic assembly of the penalised beam equation over all coefficients
// c(i, l) of eta = sum c(i, l) s_i tau_l, by pointwise quadrature:
//   int eta_t psi_t - eta_xx psi_xx - eta_tx psi_x - eta_t psi / eps = -int (f + v / eps) psi
// for psi = s_k tau_j. Solved directly.

#include <Eigen/Dense>
#include <functional>

#include "pfsi/basis.hpp"

namespace pfsi::oracles {

using Field2 = std::function<double(double t, double x)>;

inline Eigen::MatrixXd structure_dense(const BeamBasis& b, const TimeBasis& tb, double eps, const Field2& f, const Field2& v, int nx = 96,
                                       int nt = 48) {
  const int n = b.size(), m = tb.size(), N = n * m;
  const double hx = b.L() / nx, ht = tb.T() / nt, w = hx * ht;
  // per-node values of s, s', s'' and tau, tau'
  Eigen::MatrixXd S[3], Tn[2];
  for (int d = 0; d < 3; ++d) {
    S[d].resize(nx, n);
    for (int q = 0; q < nx; ++q)
      for (int i = 0; i < n; ++i) S[d](q, i) = b.value(i, q * hx, d);
  }
  for (int d = 0; d < 2; ++d) {
    Tn[d].resize(nt, m);
    for (int q = 0; q < nt; ++q)
      for (int j = 0; j < m; ++j) Tn[d](q, j) = tb.value(j, q * ht, d);
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(N);
  for (int qt = 0; qt < nt; ++qt)
    for (int qx = 0; qx < nx; ++qx) {
      const double t = qt * ht, x = qx * hx;
      const double src = f(t, x) + v(t, x) / eps;
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < m; ++j) {
          const int row = k + n * j;
          const double psi = S[0](qx, k) * Tn[0](qt, j), psi_t = S[0](qx, k) * Tn[1](qt, j);
          const double psi_x = S[1](qx, k) * Tn[0](qt, j), psi_xx = S[2](qx, k) * Tn[0](qt, j);
          r(row) -= w * src * psi;
          for (int i = 0; i < n; ++i)
            for (int l = 0; l < m; ++l) {
              const double et = S[0](qx, i) * Tn[1](qt, l), exx = S[2](qx, i) * Tn[0](qt, l), etx = S[1](qx, i) * Tn[1](qt, l);
              A(row, i + n * l) += w * (et * psi_t - exx * psi_xx - etx * psi_x - et * psi / eps);
            }
        }
    }
  const Eigen::VectorXd c = A.fullPivLu().solve(r);
  return Eigen::Map<const Eigen::MatrixXd>(c.data(), n, m);
}

}  // namespace pfsi::oracles
