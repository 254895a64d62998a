#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "pfsi/fft.hpp"
#include "pfsi/oracles/quadrature.hpp"
#include "support.hpp"

using namespace pfsi;
constexpr double pi = std::numbers::pi;

TEST(TimeBasis, CosineAtQuarterPeriod) {
  const auto tb = make_time_basis(1.0, 1);
  EXPECT_EQ(tb->size(), 3);
  EXPECT_NEAR(tb->value(2, 0.25), 0.0, 1e-16);
  EXPECT_NEAR(tb->value(1, 0.25), 1.0, 1e-16);
}

TEST(TimeBasis, ConstantOnly) {
  const auto tb = make_time_basis(1.0, 0);
  EXPECT_EQ(tb->size(), 1);
  EXPECT_EQ(tb->value(0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(tb->gram()(0), 1.0);
}

TEST(TimeBasis, GramAgainstQuadrature) {
  const auto tb = make_time_basis(2.0, 2);
  const Eigen::MatrixXd Q = oracles::time_gram(*tb);
  const Eigen::MatrixXd G = tb->gram().asDiagonal();
  EXPECT_LE((G - Q).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BeamBasis, FirstMemberIsSine) {
  const auto b = make_beam_basis(2.0, 1);
  const double c = b->value(0, 0.5);
  EXPECT_GT(c, 0.0);
  for (double x : {0.1, 0.33, 0.9, 1.7}) EXPECT_NEAR(b->value(0, x), c * std::sin(pi * x), 1e-14);
  EXPECT_LE(std::abs(b->value(0, 0.0)), 1e-14);
}

TEST(BeamBasis, VanishesAtOrigin) {
  const auto b = make_beam_basis(1.3, 9);
  for (int i = 0; i < b->size(); ++i) EXPECT_LE(std::abs(b->value(i, 0.0)), 1e-14) << i;
}

TEST(BeamBasis, H2OrthonormalAgainstQuadrature) {
  const auto b = make_beam_basis(1.0, 6);
  const Eigen::MatrixXd Q = oracles::beam_h2_gram(*b);
  EXPECT_LE((Q - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((b->h2_gram() - Q).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FluidBasis, LeadingConstants) {
  const auto b = make_fluid_basis(1.0, 1.0, 10);
  for (double x : {0.1, 0.7})
    for (double z : {-0.8, 0.2}) {
      EXPECT_EQ(b->value(0, x, z), 1.0);
      EXPECT_EQ(b->value(1, x, z), 1.0);
    }
  EXPECT_EQ(b->modes[0].comp, 0);
  EXPECT_EQ(b->modes[1].comp, 1);
  EXPECT_LE(std::abs(oracles::fluid_gram(*b, 32)(0, 1)), 0.0);
}

TEST(FluidBasis, GramDiagonalAgainstQuadrature) {
  const auto b = make_fluid_basis(1.0, 1.0, 10);
  const Eigen::MatrixXd Q = oracles::fluid_gram(*b);
  const Eigen::MatrixXd G = b->gram().asDiagonal();
  EXPECT_LE((G - Q).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FluidBasis, OrderedByWavenumber) {
  const auto b = make_fluid_basis(1.0, 0.5, 30);
  for (int i = 1; i < b->size(); ++i) EXPECT_LE(b->wavenumber2(i - 1), b->wavenumber2(i) * (1 + 1e-14));
}

TEST(Differentiate, ConstantInTime) {
  const auto d = fixtures::disc(2, 4, 6);
  BeamField f(d.beam, d.time);
  f.coef.col(0).setRandom();
  EXPECT_EQ(differentiate(f, Deriv::t).coef.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Differentiate, SineToCosine) {
  DomainSpec dom;
  dom.T = 0.8;
  const auto d = fixtures::disc(2, 4, 6, dom);
  BeamField f(d.beam, d.time);
  f.coef(1, 1) = 1.7;
  const BeamField g = differentiate(f, Deriv::t);
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(f.coef.rows(), f.coef.cols());
  want(1, 2) = 1.7 * 2.0 * pi / 0.8;
  EXPECT_LE((g.coef - want).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Differentiate, BeamAgainstFiniteDifferences) {
  const auto d = fixtures::disc(2, 6, 6);
  BeamField f(d.beam, d.time);
  fixtures::randomize(f, 4);
  const double h = 1e-5;
  const BeamField ft = differentiate(f, Deriv::t), fx = differentiate(f, Deriv::x), fxx = differentiate(f, Deriv::xx),
                  ftx = differentiate(f, Deriv::tx);
  for (auto [t, x] : {std::pair{0.13, 0.41}, {0.77, 0.05}, {0.5, 0.93}}) {
    const double dt = (evaluate(f, t + h, x) - evaluate(f, t - h, x)) / (2 * h);
    const double dx = (evaluate(f, t, x + h) - evaluate(f, t, x - h)) / (2 * h);
    const double dxx = (evaluate(fx, t, x + h) - evaluate(fx, t, x - h)) / (2 * h);
    const double dtx = (evaluate(fx, t + h, x) - evaluate(fx, t - h, x)) / (2 * h);
    EXPECT_NEAR(evaluate(ft, t, x), dt, 1e-8 * std::max(1.0, std::abs(dt)));
    EXPECT_NEAR(evaluate(fx, t, x), dx, 1e-8 * std::max(1.0, std::abs(dx)));
    EXPECT_NEAR(evaluate(fxx, t, x), dxx, 1e-8 * std::max(1.0, std::abs(dxx)));
    EXPECT_NEAR(evaluate(ftx, t, x), dtx, 1e-8 * std::max(1.0, std::abs(dtx)));
  }
}

TEST(Differentiate, FluidAgainstFiniteDifferences) {
  const auto d = fixtures::disc(2, 2, 12);
  FluidField f(d.fluid, d.time);
  fixtures::randomize(f, 6);
  const double h = 1e-5;
  const FluidField ft = differentiate(f, Deriv::t), fx = differentiate(f, Deriv::x), fz = differentiate(f, Deriv::z);
  for (int c = 0; c < 2; ++c)
    for (auto [t, x, z] : {std::tuple{0.2, 0.3, -0.4}, {0.9, 0.6, 0.7}}) {
      const double dt = (evaluate(f, c, t + h, x, z) - evaluate(f, c, t - h, x, z)) / (2 * h);
      const double dx = (evaluate(f, c, t, x + h, z) - evaluate(f, c, t, x - h, z)) / (2 * h);
      const double dz = (evaluate(f, c, t, x, z + h) - evaluate(f, c, t, x, z - h)) / (2 * h);
      EXPECT_NEAR(evaluate(ft, c, t, x, z), dt, 1e-8 * std::max(1.0, std::abs(dt)));
      EXPECT_NEAR(evaluate(fx, c, t, x, z), dx, 1e-8 * std::max(1.0, std::abs(dx)));
      EXPECT_NEAR(evaluate(fz, c, t, x, z), dz, 1e-8 * std::max(1.0, std::abs(dz)));
    }
}

TEST(Differentiate, BeamHasNoZ) {
  const auto d = fixtures::disc(1, 2, 2);
  EXPECT_THROW(differentiate(BeamField(d.beam, d.time), Deriv::z), InputDomainError);
}

namespace {

Eigen::ArrayXd sample1d(int n, const std::function<double(double)>& f) {
  Eigen::ArrayXd v(n);
  for (int j = 0; j < n; ++j) v(j) = f(static_cast<double>(j) / n);
  return v;
}

}  // namespace

TEST(DealiasedProduct, IdentityFactor) {
  const Dims3 d{16, 1, 1};
  const Eigen::ArrayXd b = sample1d(16, [](double x) { return std::sin(2 * pi * x) + 0.3 * std::cos(6 * pi * x); });
  EXPECT_LE((dealiased_product(Eigen::ArrayXd::Ones(16), b, d) - b).abs().maxCoeff(), 1e-14);
}

TEST(DealiasedProduct, CosineSquared) {
  const Dims3 d{16, 1, 1};
  const Eigen::ArrayXd a = sample1d(16, [](double x) { return std::cos(2 * pi * x); });
  const Eigen::ArrayXd want = sample1d(16, [](double x) { return 0.5 + 0.5 * std::cos(4 * pi * x); });
  EXPECT_LE((dealiased_product(a, a, d) - want).abs().maxCoeff(), 1e-14);
}

// Oracle: evaluate the product on 1024 points, keep the modes the 16-point grid retains.
TEST(DealiasedProduct, MatchesOversampledProjection) {
  std::mt19937 gen(12);
  std::uniform_real_distribution<double> U(-1, 1);
  auto rand5 = [&]() {
    std::array<double, 10> c;
    for (auto& v : c) v = U(gen);
    return [c](double x) {
      double s = 0;
      for (int k = 1; k <= 5; ++k) s += c[2 * k - 2] * std::cos(2 * pi * k * x) + c[2 * k - 1] * std::sin(2 * pi * k * x);
      return s;
    };
  };
  const auto fa = rand5(), fb = rand5();
  const int n = 16, N = 1024;
  const Eigen::ArrayXd got = dealiased_product(sample1d(n, fa), sample1d(n, fb), Dims3{n, 1, 1});
  std::vector<std::complex<double>> c(n);
  for (int k = -(n / 2 - 1); k <= n / 2 - 1; ++k) {
    std::complex<double> s = 0;
    for (int q = 0; q < N; ++q) s += fa(double(q) / N) * fb(double(q) / N) * std::polar(1.0, -2 * pi * k * q / N);
    c[(k + n) % n] = s / double(N);
  }
  double err = 0;
  for (int j = 0; j < n; ++j) {
    std::complex<double> v = 0;
    for (int k = -(n / 2 - 1); k <= n / 2 - 1; ++k) v += c[(k + n) % n] * std::polar(1.0, 2 * pi * k * j / n);
    err = std::max(err, std::abs(v.real() - got(j)));
  }
  EXPECT_LE(err, 1e-12);
}

TEST(DealiasedProduct, RejectsMismatch) {
  EXPECT_THROW(dealiased_product(Eigen::ArrayXd::Ones(8), Eigen::ArrayXd::Ones(16), Dims3{16, 1, 1}), ConfigError);
}

TEST(Project, RoundTripBeam) {
  const auto d = fixtures::disc(2, 6, 4);
  BeamField f(d.beam, d.time);
  fixtures::randomize(f, 21);
  const BeamField g = project(evaluate(f, d.beam_grid), d.beam_grid, d.beam, d.time);
  EXPECT_LE((g.coef - f.coef).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Project, RoundTripFluid) {
  const auto d = fixtures::disc(2, 4, 14);
  FluidField f(d.fluid, d.time);
  fixtures::randomize(f, 22);
  const FluidField g = project(evaluate(f, d.fluid_grid), d.fluid_grid, d.fluid, d.time);
  EXPECT_LE((g.coef - f.coef).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Project, OrthogonalComplementVanishes) {
  const auto d = fixtures::disc(1, 4, 6);
  // x-harmonic 5 and time harmonic 3 are outside both spaces
  const Grid3& g = d.fluid_grid;
  VectorGrid v{{Eigen::ArrayXd(g.size()), Eigen::ArrayXd(g.size())}};
  for (int it = 0; it < g.nt(); ++it)
    for (int iz = 0; iz < g.nz(); ++iz)
      for (int ix = 0; ix < g.nx(); ++ix) {
        v.c[0](g.at(ix, iz, it)) = std::cos(2 * pi * 3 * g.t.node(it));
        v.c[1](g.at(ix, iz, it)) = std::sin(2 * pi * 3 * g.t.node(it)) * std::cos(pi * g.z.node(iz));
      }
  EXPECT_LE(project(v, g, d.fluid, d.time).coef.cwiseAbs().maxCoeff(), 1e-12);
}

// Oracle: normal equations assembled by quadrature at ten times the resolution.
TEST(Project, SmoothFunctionAgainstNormalEquations) {
  const auto d = fixtures::disc(2, 4, 4);
  auto fn = [](double t, double x) { return std::exp(std::sin(2 * pi * x)) * (1.0 + 0.5 * std::cos(2 * pi * t)) - 1.0; };
  const Grid2& g = d.beam_grid;
  Eigen::ArrayXd v(g.size());
  for (int it = 0; it < g.nt(); ++it)
    for (int ix = 0; ix < g.nx(); ++ix) v(g.at(ix, it)) = fn(g.t.node(it), g.x.node(ix));
  const BeamField p = project(v, g, d.beam, d.time);

  const int nx = 10 * g.nx(), nt = 10 * g.nt(), n = d.beam->size(), m = d.time->size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n * m, n * m);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n * m);
  Eigen::VectorXd phi(n * m);
  for (int qt = 0; qt < nt; ++qt)
    for (int qx = 0; qx < nx; ++qx) {
      const double t = double(qt) / nt, x = double(qx) / nx;
      for (int l = 0; l < m; ++l)
        for (int i = 0; i < n; ++i) phi(i + n * l) = d.beam->value(i, x) * d.time->value(l, t);
      A += phi * phi.transpose();
      r += fn(t, x) * phi;
    }
  const Eigen::VectorXd c = A.ldlt().solve(r);
  EXPECT_LE((p.vec() - c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Parseval, Beam) {
  const auto d = fixtures::disc(2, 6, 2);
  BeamField f(d.beam, d.time);
  fixtures::randomize(f, 31);
  const Grid2& g = d.beam_grid;
  const double quad = g.cell() * evaluate(f, g).square().sum();
  const Eigen::MatrixXd G = d.beam->derivative_gram(0);
  double coef = 0.0;
  for (int l = 0; l < d.time->size(); ++l) coef += d.time->gram()(l) * f.coef.col(l).dot(G * f.coef.col(l));
  EXPECT_NEAR(quad, coef, 1e-12 * coef);
}

TEST(Parseval, Fluid) {
  const auto d = fixtures::disc(2, 2, 16);
  FluidField f(d.fluid, d.time);
  fixtures::randomize(f, 32);
  const Grid3& g = d.fluid_grid;
  const VectorGrid v = evaluate(f, g);
  const double quad = g.cell() * (v.c[0].square() + v.c[1].square()).sum();
  const double coef = (d.fluid->gram().asDiagonal() * f.coef.cwiseAbs2() * d.time->gram()).sum();
  EXPECT_NEAR(quad, coef, 1e-12 * coef);
}
