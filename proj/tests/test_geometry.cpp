#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "pfsi/trace.hpp"
#include "support.hpp"

using namespace pfsi;

TEST(WrapEta, InRange) {
  const auto w = wrap_eta(0.5, 1.0);
  EXPECT_EQ(w.eta_hat, 0.5);
  EXPECT_EQ(w.wind, 0);
}

TEST(WrapEta, OneWindingUp) {
  const auto w = wrap_eta(1.5, 1.0);
  EXPECT_DOUBLE_EQ(w.eta_hat, -0.5);
  EXPECT_EQ(w.wind, 1);
}

TEST(WrapEta, LowerEndIncluded) {
  const auto w = wrap_eta(-1.0, 1.0);
  EXPECT_EQ(w.eta_hat, -1.0);
  EXPECT_EQ(w.wind, 0);
  const auto u = wrap_eta(1.0, 1.0);
  EXPECT_EQ(u.eta_hat, -1.0);
  EXPECT_EQ(u.wind, 1);
}

TEST(WrapEta, RangeProperty) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> U(-50.0, 50.0);
  for (int k = 0; k < 2000; ++k) {
    const double e = U(gen), H = 0.3 + std::abs(U(gen)) / 10.0;
    const auto w = wrap_eta(e, H);
    EXPECT_GE(w.eta_hat, -H);
    EXPECT_LT(w.eta_hat, H);
    EXPECT_NEAR(w.eta_hat + 2.0 * H * w.wind, e, 1e-12 * std::max(1.0, std::abs(e)));
  }
}

TEST(WrapEta, RejectsNonFinite) {
  EXPECT_THROW(wrap_eta(std::nan(""), 1.0), InputDomainError);
  EXPECT_THROW(wrap_eta(0.0, 0.0), InputDomainError);
}

TEST(Trace, ConstantField) {
  const auto d = fixtures::disc(2, 4, 12);
  FluidField u(d.fluid, d.time);
  u.coef(0, 0) = 0.7;
  u.coef(1, 0) = -1.3;
  BeamField eta(d.beam, d.time);
  fixtures::randomize(eta, 5, 0.4);
  const TraceField v = trace_velocity(u, eta, d.beam_grid);
  EXPECT_LE((v.v[0] - 0.7).abs().maxCoeff(), 1e-14);
  EXPECT_LE((v.v[1] + 1.3).abs().maxCoeff(), 1e-14);
}

TEST(Trace, SinVanishesOnFlatBeam) {
  const auto d = fixtures::disc(2, 4, 12);
  FluidField u(d.fluid, d.time);
  u.coef(3, 0) = 1.0;  // (0, sin(pi z / H))
  const BeamField eta(d.beam, d.time);
  const TraceField v = trace_velocity(u, eta, d.beam_grid);
  EXPECT_LE(v.v[0].abs().maxCoeff(), 1e-15);
  EXPECT_LE(v.v[1].abs().maxCoeff(), 1e-15);
}

TEST(Trace, Linearity) {
  const auto d = fixtures::disc(2, 4, 12);
  FluidField a(d.fluid, d.time), b(d.fluid, d.time);
  fixtures::randomize(a, 1);
  fixtures::randomize(b, 2);
  BeamField eta(d.beam, d.time);
  fixtures::randomize(eta, 3, 0.5);
  const TraceField ta = trace_velocity(a, eta, d.beam_grid), tb = trace_velocity(b, eta, d.beam_grid);
  const TraceField tc = trace_velocity(2.0 * a + (-3.0) * b, eta, d.beam_grid);
  for (int c = 0; c < 2; ++c) EXPECT_LE((tc.v[c] - (2.0 * ta.v[c] - 3.0 * tb.v[c])).abs().maxCoeff(), 1e-12);
}

// Oracle: sample u on 512 z-nodes per (t, x) and interpolate trigonometrically.
TEST(Trace, MatchesOversampledInterpolation) {
  const auto d = fixtures::disc(1, 2, 6);
  FluidField u(d.fluid, d.time);
  u.coef(2, 1) = 0.8;
  u.coef(4, 0) = -0.5;
  u.coef(5, 2) = 0.3;
  BeamField eta(d.beam, d.time);
  eta.coef(0, 1) = 0.7;
  eta.coef(1, 0) = -0.9;
  const TraceField v = trace_velocity(u, eta, d.beam_grid);
  const int N = 512;
  const double H = d.domain.H, P = 2.0 * H;
  const Grid2& g = d.beam_grid;
  double err = 0.0;
  for (int it = 0; it < g.nt(); it += 7)
    for (int ix = 0; ix < g.nx(); ix += 5) {
      const double t = g.t.node(it), x = g.x.node(ix);
      const double zh = wrap_eta(evaluate(eta, t, x), H).eta_hat;
      for (int c = 0; c < 2; ++c) {
        std::vector<double> s(N);
        for (int q = 0; q < N; ++q) s[q] = evaluate(u, c, t, x, -H + P * q / N);
        double val = 0.0;
        // coefficients beyond |k| = 16 vanish to rounding for this field
        for (int k = -16; k <= 16; ++k) {
          std::complex<double> ck = 0.0;
          for (int q = 0; q < N; ++q) ck += s[q] * std::polar(1.0, -2.0 * std::numbers::pi * k * q / N);
          ck /= N;
          val += (ck * std::polar(1.0, 2.0 * std::numbers::pi * k * (zh + H) / P)).real();
        }
        err = std::max(err, std::abs(val - v.v[c](g.at(ix, it))));
      }
    }
  EXPECT_LE(err, 1e-12);
}

TEST(MovingDomain, FlatBeam) {
  const auto d = fixtures::disc(1, 2, 4);
  const BeamField eta(d.beam, d.time);
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(9, 0.0, 0.9);
  const auto b = moving_domain_map(eta, 0.3, x, 1.0);
  EXPECT_LE(b.lower.abs().maxCoeff(), 0.0);
  EXPECT_LE((b.upper - 2.0).abs().maxCoeff(), 0.0);
}

TEST(MovingDomain, SineBeam) {
  const auto d = fixtures::disc(1, 2, 4);
  BeamField eta(d.beam, d.time);
  // s_1 is a positive multiple of sin(2 pi x / L)
  eta.coef(0, 0) = 0.3 / d.beam->value(0, 0.25);
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(17, 0.0, 1.0);
  const auto b = moving_domain_map(eta, 0.0, x, 1.0);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    EXPECT_NEAR(b.lower(j), 0.3 * std::sin(2.0 * std::numbers::pi * x(j)), 1e-14);
    EXPECT_NEAR(b.upper(j), b.lower(j) + 2.0, 1e-14);
  }
}

TEST(MovingDomain, MatchesPointEvaluation) {
  const auto d = fixtures::disc(2, 6, 4);
  BeamField eta(d.beam, d.time);
  fixtures::randomize(eta, 9);
  Eigen::ArrayXd x(64);
  for (int j = 0; j < 64; ++j) x(j) = j / 64.0;
  const auto b = moving_domain_map(eta, 0.37, x, 1.0);
  for (int j = 0; j < 64; ++j) {
    double e = 0.0;
    for (int i = 0; i < d.beam->size(); ++i)
      for (int l = 0; l < d.time->size(); ++l) e += eta.coef(i, l) * d.beam->value(i, x(j)) * d.time->value(l, 0.37);
    EXPECT_NEAR(b.lower(j), e, 1e-12);
  }
}
