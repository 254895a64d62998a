#pragma once

// Restarted GMRES with right preconditioning for matrix-free real operators.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace pfsi {

using LinearOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct KrylovOptions {
  double tol = 1e-12;  // relative to |b|
  int restart = 60;
  int max_iter = 3000;
};

struct KrylovResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // relative residual after each restart cycle
};

/// Solves A x = b, iterating on A M^{-1} y = b with x = M^{-1} y.
inline KrylovResult gmres(const LinearOp& A, const LinearOp& Minv, const Eigen::VectorXd& b, Eigen::VectorXd x0,
                          const KrylovOptions& opt = {}) {
  KrylovResult res;
  const double bnorm = b.norm();
  res.x = std::move(x0);
  if (res.x.size() != b.size()) res.x = Eigen::VectorXd::Zero(b.size());
  if (bnorm == 0.0) {
    res.x.setZero();
    res.converged = true;
    res.history.push_back(0.0);
    return res;
  }
  const int m = opt.restart;
  Eigen::MatrixXd V(b.size(), m + 1);
  Eigen::MatrixXd Hs = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  while (res.iterations < opt.max_iter) {
    Eigen::VectorXd r = b - A(res.x);
    double beta = r.norm();
    res.history.push_back(beta / bnorm);
    if (beta <= opt.tol * bnorm) {
      res.converged = true;
      return res;
    }
    V.col(0) = r / beta;
    g.setZero();
    g(0) = beta;
    Hs.setZero();
    int k = 0;
    for (; k < m && res.iterations < opt.max_iter; ++k) {
      ++res.iterations;
      Eigen::VectorXd w = A(Minv(V.col(k)));
      // modified Gram-Schmidt, twice for stability
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= k; ++j) {
          const double h = V.col(j).dot(w);
          Hs(j, k) += h;
          w -= h * V.col(j);
        }
      Hs(k + 1, k) = w.norm();
      if (Hs(k + 1, k) > 0.0) V.col(k + 1) = w / Hs(k + 1, k);
      for (int j = 0; j < k; ++j) {
        const double t = cs(j) * Hs(j, k) + sn(j) * Hs(j + 1, k);
        Hs(j + 1, k) = -sn(j) * Hs(j, k) + cs(j) * Hs(j + 1, k);
        Hs(j, k) = t;
      }
      const double den = std::hypot(Hs(k, k), Hs(k + 1, k));
      cs(k) = den > 0.0 ? Hs(k, k) / den : 1.0;
      sn(k) = den > 0.0 ? Hs(k + 1, k) / den : 0.0;
      Hs(k, k) = den;
      Hs(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);
      if (std::abs(g(k + 1)) <= opt.tol * bnorm || den == 0.0) {
        ++k;
        break;
      }
    }
    Eigen::VectorXd y = Hs.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    res.x += Minv(V.leftCols(k) * y);
  }
  const double final_rel = (b - A(res.x)).norm() / bnorm;
  res.history.push_back(final_rel);
  res.converged = final_rel <= opt.tol;
  return res;
}

}  // namespace pfsi
