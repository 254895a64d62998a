#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pfsi/oracles/cases.hpp"
#include "pfsi/structure.hpp"
#include "support.hpp"

using namespace pfsi;
constexpr double pi = std::numbers::pi;

namespace {

PenaltyInput input_from(const Discretization& d, const BeamField& f, const BeamField& v, double eps) {
  return PenaltyInput{d.beam_grid, evaluate(v, d.beam_grid), evaluate(f, d.beam_grid), eps};
}

}  // namespace

TEST(Structure, ZeroDataZeroSolution) {
  const auto d = fixtures::disc(2, 4, 2);
  const BeamField z(d.beam, d.time);
  const BeamState s = solve_structure(input_from(d, z, z, 0.1), d.beam, d.time);
  EXPECT_EQ(s.eta.coef.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Structure, StaticSineLoad) {
  DomainSpec dom;
  dom.L = 1.5;
  const auto d = fixtures::disc(2, 4, 2, dom);
  const double k = 2 * pi / dom.L;
  PenaltyInput in{d.beam_grid, Eigen::ArrayXd::Zero(d.beam_grid.size()), Eigen::ArrayXd(d.beam_grid.size()), 0.1};
  for (int it = 0; it < d.beam_grid.nt(); ++it)
    for (int ix = 0; ix < d.beam_grid.nx(); ++ix) in.f(d.beam_grid.at(ix, it)) = std::pow(k, 4) * std::sin(k * d.beam_grid.x.node(ix));
  const BeamState s = solve_structure(in, d.beam, d.time);
  for (double t : {0.0, 0.3, 0.8})
    for (double x : {0.1, 0.6, 1.2}) EXPECT_NEAR(evaluate(s.eta, t, x), std::sin(k * x), 1e-12);
}

TEST(Structure, MatchesDenseOracle) {
  for (auto [n, m] : {std::pair{4, 2}, {3, 1}, {6, 3}}) {
    const auto r = oracles::structure_dense_case(n, m);
    EXPECT_LE(r.deviation, 1e-10) << r.name;
  }
}

TEST(StructureResidual, SolverOutputSmall) {
  const auto d = fixtures::disc(2, 4, 2);
  BeamField f(d.beam, d.time), v(d.beam, d.time);
  fixtures::randomize(f, 51);
  fixtures::randomize(v, 52);
  const PenaltyInput in = input_from(d, f, v, 0.05);
  const BeamState s = solve_structure(in, d.beam, d.time);
  const double scale = structure_operator(structure_matrices(*d.beam, *d.time), 0.05).norm() * s.eta.coef.norm();
  EXPECT_LE(structure_residual(s, in).cwiseAbs().maxCoeff(), 1e-10 * scale);
}

// eta = 0: the residual is the load tested against every s_k tau_l.
TEST(StructureResidual, ZeroStateEqualsLoadProjection) {
  const auto d = fixtures::disc(1, 3, 2);
  BeamField f(d.beam, d.time);
  fixtures::randomize(f, 53);
  const BeamField z(d.beam, d.time);
  const Eigen::MatrixXd r = structure_residual(BeamState{z}, input_from(d, f, z, 0.1));
  const int nq = 400;
  for (int k = 0; k < d.beam->size(); ++k)
    for (int l = 0; l < d.time->size(); ++l) {
      double q = 0;
      for (int a = 0; a < nq; ++a)
        for (int b = 0; b < nq; ++b) {
          const double t = double(a) / nq, x = double(b) / nq;
          q += evaluate(f, t, x) * d.beam->value(k, x) * d.time->value(l, t);
        }
      q /= double(nq) * nq;
      EXPECT_NEAR(r(k, l), q, 1e-12);
    }
}

// The residual map is affine: a perturbation along one coefficient shifts it
// by that coefficient's operator column, found by differencing.
TEST(StructureResidual, PerturbationIsOperatorColumn) {
  const auto d = fixtures::disc(2, 4, 2);
  BeamField f(d.beam, d.time), v(d.beam, d.time);
  fixtures::randomize(f, 54);
  fixtures::randomize(v, 55);
  const PenaltyInput in = input_from(d, f, v, 0.1);
  const BeamState s = solve_structure(in, d.beam, d.time);
  BeamState p = s, unit{BeamField(d.beam, d.time)};
  p.eta.coef(0, 1) += 1e-3;
  unit.eta.coef(0, 1) = 1.0;
  const BeamField zero(d.beam, d.time);
  const PenaltyInput hom = input_from(d, zero, zero, 0.1);
  const Eigen::MatrixXd col = structure_residual(unit, hom) - structure_residual(BeamState{zero}, hom);
  const Eigen::MatrixXd diff = structure_residual(p, in) - structure_residual(s, in);
  EXPECT_LE((diff - 1e-3 * col).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(col.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Structure, RejectsBadInput) {
  const auto d = fixtures::disc(1, 2, 2);
  PenaltyInput in{d.beam_grid, Eigen::ArrayXd::Zero(3), Eigen::ArrayXd::Zero(3), 0.1};
  EXPECT_THROW(solve_structure(in, d.beam, d.time), ConfigError);
}
