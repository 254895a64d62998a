#pragma once

// Fixed-point map (eta~, u~) -> (eta, u): density from u~, beam from the trace
// of u~ on eta~, fluid from (rho, u~, eta~). Relaxed Picard or Anderson-mixed
// iteration to a tolerance, and continuation over stages.

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pfsi/density.hpp"
#include "pfsi/discretization.hpp"
#include "pfsi/fluid.hpp"
#include "pfsi/structure.hpp"
#include "pfsi/trace.hpp"

namespace pfsi {

struct PhysicalParams {
  double gamma = 2.0;
  double mu = 1.0;
  double zeta = 1.0;
  double m0 = 2.0;
  double a = 5.0;

  void validate() const {
    if (!(gamma > 1.0)) throw ConfigError("gamma: let γ > 1 (got " + std::to_string(gamma) + ")");
    if (!(mu > 0.0)) throw ConfigError("mu: viscosity must be positive");
    if (!(zeta > 0.0)) throw ConfigError("zeta: viscosity must be positive");
    if (!(m0 > 0.0)) throw ConfigError("m0: total mass must be positive");
    if (!(a >= 5.0)) throw ConfigError("a: artificial pressure exponent must satisfy a >= 5");
  }
};

/// amplitude * (space basis function #space, 1-based) * tau_time.
struct ModeTriple {
  double amp = 0.0;
  int space = 1;
  int time = 0;
};

struct ForcingSpec {
  std::vector<ModeTriple> beam;   // f over s_i tau_j
  std::vector<ModeTriple> fluid;  // F over f_i tau_j
  bool empty() const { return beam.empty() && fluid.empty(); }
};

struct StageSpec {
  int m = 2, n_beam = 4, n_fluid = 12;
  double eps = 0.1, delta = 0.1;
  double tol = 1e-10;
  int max_iter = 200;
  std::string tag;
};

struct ContinuationSchedule {
  std::vector<StageSpec> stages;

  void validate() const {
    if (stages.empty()) throw ConfigError("schedule: no stages");
    for (size_t k = 0; k < stages.size(); ++k) {
      const auto& s = stages[k];
      if (!(s.eps > 0.0) || !(s.delta > 0.0)) throw ConfigError("schedule: stage " + std::to_string(k) + " needs eps, delta > 0");
      if (!(s.tol > 0.0) || s.max_iter < 1) throw ConfigError("schedule: stage " + std::to_string(k) + " needs tol > 0, max_iter >= 1");
      if (k == 0) continue;
      const auto& p = stages[k - 1];
      if (!(s.eps < p.eps) || !(s.delta < p.delta))
        throw ConfigError("schedule: eps and delta must decrease strictly (stage " + std::to_string(k) + ")");
      if (s.m < p.m || s.n_beam < p.n_beam || s.n_fluid < p.n_fluid)
        throw ConfigError("schedule: m, n_beam, n_fluid must be nondecreasing (stage " + std::to_string(k) + ")");
    }
  }
};

inline ContinuationSchedule default_schedule(int m = 2, int n_beam = 4, int n_fluid = 12) {
  ContinuationSchedule s;
  int k = 0;
  for (double e : {1e-1, 1e-2, 1e-3}) s.stages.push_back({m, n_beam, n_fluid, e, e, 1e-10, 200, "stage" + std::to_string(k++)});
  return s;
}

enum class Acceleration { None, Anderson };
enum class SweepOrder { Jacobi, GaussSeidel };

struct DriverConfig {
  DomainSpec domain;
  PhysicalParams phys;
  ForcingSpec forcing;
  DiscretizationSpec grids;  // m / n fields ignored; taken from the stage
  double omega = 0.5;
  Acceleration accel = Acceleration::Anderson;
  int anderson_depth = 20;
  SweepOrder order = SweepOrder::Jacobi;
  // test mode (all false for the scheme proper)
  bool freeze_density = false;
  bool linear_fluid = false;  // drop convection and cubic damping
  bool flat_trace = false;
  DensitySolveOptions density;
  FluidSolveOptions fluid;
  unsigned long seed = 0;
  double initial_noise = 0.0;  // amplitude of a seeded random initial guess

  double M() const { return phys.m0 / domain.area(); }

  void validate() const {
    domain.validate();
    phys.validate();
    if (!(omega > 0.0 && omega <= 1.0)) throw ConfigError("omega: relaxation must lie in (0, 1]");
    if (anderson_depth < 1) throw ConfigError("anderson_depth: must be >= 1");
  }
};

struct IterationRecord {
  double update = 0.0;  // normalised combined update
  double min_rho = 0.0;
  int density_iterations = 0;
  int fluid_iterations = 0;
};

struct CoupledState {
  std::shared_ptr<const Discretization> disc;
  DensityField rho;
  FluidField u;
  BeamState eta;
  StageSpec stage;
  std::vector<IterationRecord> history;
  bool converged = false;
  int iterations = 0;
};

// ------------------------------------------------------------- forcing ----

inline BeamField beam_forcing(const ForcingSpec& fs, const Discretization& d) {
  BeamField f(d.beam, d.time);
  for (const auto& t : fs.beam) {
    if (t.space < 1 || t.space > d.beam->size() || t.time < 0 || t.time >= d.time->size())
      throw ConfigError("forcing: beam mode (" + std::to_string(t.space) + ", " + std::to_string(t.time) + ") outside the basis band");
    f.coef(t.space - 1, t.time) += t.amp;
  }
  return f;
}

inline FluidField fluid_forcing(const ForcingSpec& fs, const Discretization& d) {
  FluidField F(d.fluid, d.time);
  for (const auto& t : fs.fluid) {
    if (t.space < 1 || t.space > d.fluid->size() || t.time < 0 || t.time >= d.time->size())
      throw ConfigError("forcing: fluid mode (" + std::to_string(t.space) + ", " + std::to_string(t.time) + ") outside the basis band");
    F.coef(t.space - 1, t.time) += t.amp;
  }
  return F;
}

// --------------------------------------------------------------- setup ----

inline std::shared_ptr<const Discretization> stage_discretization(const DriverConfig& cfg, const StageSpec& s) {
  DiscretizationSpec ds = cfg.grids;
  ds.m = s.m;
  ds.n_beam = s.n_beam;
  ds.n_fluid = s.n_fluid;
  return std::make_shared<const Discretization>(make_discretization(cfg.domain, ds));
}

inline CoupledState initial_state(const DriverConfig& cfg, const StageSpec& s) {
  CoupledState st;
  st.disc = stage_discretization(cfg, s);
  st.stage = s;
  st.rho = constant_density(st.disc->rho_grid, cfg.M());
  st.u = FluidField(st.disc->fluid, st.disc->time);
  st.eta = zero_beam(st.disc->beam, st.disc->time);
  if (cfg.initial_noise > 0.0) {
    std::mt19937_64 gen(cfg.seed);
    std::normal_distribution<double> nd(0.0, cfg.initial_noise);
    for (Eigen::Index k = 0; k < st.u.coef.size(); ++k) st.u.coef.data()[k] = nd(gen);
    for (Eigen::Index k = 0; k < st.eta.eta.coef.size(); ++k) st.eta.eta.coef.data()[k] = nd(gen);
  }
  return st;
}

/// Copy coefficients of matching modes into another discretisation.
inline CoupledState prolongate(const CoupledState& src, const DriverConfig& cfg, const StageSpec& s) {
  CoupledState dst = initial_state(DriverConfig{cfg.domain, cfg.phys, {}, cfg.grids}, s);
  const Discretization& a = *src.disc;
  const Discretization& b = *dst.disc;
  const int nt = std::min(a.time->size(), b.time->size());
  // beam bases share their leading functions
  const int nb = std::min(a.beam->size(), b.beam->size());
  dst.eta.eta.coef.topLeftCorner(nb, nt) = src.eta.eta.coef.topLeftCorner(nb, nt);
  for (int i = 0; i < b.fluid->size(); ++i) {
    const auto& mb = b.fluid->modes[static_cast<size_t>(i)];
    const int kx = TrigFamily::harmonic(mb.ix), kz = TrigFamily::harmonic(mb.iz);
    for (int k = 0; k < a.fluid->size(); ++k) {
      const auto& ma = a.fluid->modes[static_cast<size_t>(k)];
      if (ma.comp == mb.comp && ma.ix == mb.ix && ma.iz == mb.iz && TrigFamily::harmonic(ma.ix) == kx &&
          TrigFamily::harmonic(ma.iz) == kz) {
        dst.u.coef.row(i).head(nt) = src.u.coef.row(k).head(nt) * (ma.scale / mb.scale);
        break;
      }
    }
  }
  const Dims3 da = Discretization::dims(a.rho_grid), db = Discretization::dims(b.rho_grid);
  dst.rho.values = da == db ? src.rho.values : interpolate(src.rho.values, da, db);
  dst.rho.refresh_metadata();
  return dst;
}

inline FluidParams fluid_params(const DriverConfig& cfg, const StageSpec& s) {
  FluidParams p;
  p.gamma = cfg.phys.gamma;
  p.a = cfg.phys.a;
  p.delta = s.delta;
  p.eps = s.eps;
  p.mu = cfg.phys.mu;
  p.zeta = cfg.phys.zeta;
  p.M = cfg.M();
  p.convection = !cfg.linear_fluid;
  p.cubic = !cfg.linear_fluid;
  p.flat_trace = cfg.flat_trace;
  return p;
}

inline DensitySolveOptions density_options(const DriverConfig& cfg, const StageSpec& s) {
  DensitySolveOptions o = cfg.density;
  o.eps = s.eps;
  o.M = cfg.M();
  return o;
}

/// Structure input from the trace of u~ along eta~ (or along z = 0 in flat-trace mode).
inline PenaltyInput penalty_input(const FluidField& u, const BeamState& eta, const BeamField& f, const Discretization& d, double eps,
                                  bool flat) {
  const Grid2& g = d.beam_grid;
  PenaltyInput in{g, Eigen::ArrayXd(), evaluate(f, g), eps};
  if (flat) {
    in.v_e2 = trace_velocity(u, zero_beam(eta.eta.space, eta.eta.time).eta, g).v[1];
  } else {
    in.v_e2 = trace_velocity(u, eta.eta, g).v[1];
  }
  return in;
}

// -------------------------------------------------------------- norms ----

inline double l2_norm(const FluidField& u) {
  const Eigen::VectorXd gs = u.space->gram(), gt = u.time->gram();
  return std::sqrt((u.coef.array().square() * (gs * gt.transpose()).array()).sum());
}

/// L2(0,T; H2(Gamma)) with the full H2 product.
inline double h2_norm(const BeamField& e) {
  const Eigen::MatrixXd Gs = e.space->h2_gram();
  const Eigen::VectorXd gt = e.time->gram();
  double s = 0.0;
  for (int j = 0; j < e.time->size(); ++j) s += gt(j) * e.coef.col(j).dot(Gs * e.coef.col(j));
  return std::sqrt(std::max(0.0, s));
}

inline double l2_norm(const DensityField& r) { return std::sqrt(r.grid.cell() * r.values.square().sum()); }

inline double update_metric(const CoupledState& a, const CoupledState& b) {
  const double du = l2_norm(b.u - a.u);
  const double de = h2_norm(b.eta.eta - a.eta.eta);
  DensityField dr = b.rho;
  dr.values -= a.rho.values;
  const double drho = l2_norm(dr);
  return (du + de + drho) / (l2_norm(b.u) + h2_norm(b.eta.eta) + l2_norm(b.rho) + 1.0);
}

// ---------------------------------------------------------- the map T ----

struct MapOutput {
  DensityField rho;
  FluidField u;
  BeamState eta;
  int density_iterations = 0, fluid_iterations = 0;
};

/// One unrelaxed application of the fixed-point map to (eta~, u~) = (state.eta, state.u).
inline MapOutput apply_map(const CoupledState& st, const DriverConfig& cfg) {
  const Discretization& d = *st.disc;
  const StageSpec& s = st.stage;
  MapOutput out;
  try {
    if (cfg.freeze_density) {
      out.rho = constant_density(d.rho_grid, cfg.M());
    } else {
      out.rho = solve_density(st.u, d.rho_grid, density_options(cfg, s), &st.rho);
      out.density_iterations = out.rho.iterations;
      if (out.rho.min_value < -0.1 * cfg.M())
        throw SolverError("density minimum " + std::to_string(out.rho.min_value) + " below -0.1 M");
    }
    const BeamField f = beam_forcing(cfg.forcing, d);
    out.eta = solve_structure(penalty_input(st.u, st.eta, f, d, s.eps, cfg.flat_trace), d.beam, d.time);
    const FluidField F = fluid_forcing(cfg.forcing, d);
    const BeamState& curve = cfg.order == SweepOrder::GaussSeidel ? out.eta : st.eta;
    FluidInputs in{&d, &out.rho, &st.u, &curve, &F};
    FluidSolveResult fr = solve_fluid(in, fluid_params(cfg, s), cfg.fluid);
    out.u = std::move(fr.u);
    out.fluid_iterations = fr.iterations;
  } catch (const SolverError& e) {
    throw SolverError(std::string("stage '") + s.tag + "': " + e.what(), e.history());
  }
  return out;
}

inline Eigen::VectorXd pack(const BeamState& eta, const FluidField& u) {
  Eigen::VectorXd x(eta.eta.coef.size() + u.coef.size());
  x << eta.eta.vec(), u.vec();
  return x;
}

inline void unpack(const Eigen::VectorXd& x, BeamState& eta, FluidField& u) {
  const Eigen::Index ne = eta.eta.coef.size();
  eta.eta.set_vec(x.head(ne));
  u.set_vec(x.tail(u.coef.size()));
}

/// One relaxed step: (eta~, u~) <- (1 - omega)(eta~, u~) + omega T(eta~, u~).
inline CoupledState fixed_point_step(const CoupledState& st, const DriverConfig& cfg) {
  MapOutput m = apply_map(st, cfg);
  CoupledState next = st;
  next.rho = std::move(m.rho);
  next.u = (1.0 - cfg.omega) * st.u + cfg.omega * m.u;
  next.eta.eta = (1.0 - cfg.omega) * st.eta.eta + cfg.omega * m.eta.eta;
  next.iterations = st.iterations + 1;
  IterationRecord rec{update_metric(st, next), next.rho.min_value, m.density_iterations, m.fluid_iterations};
  next.history.push_back(rec);
  return next;
}

// ------------------------------------------------------------ Anderson ----

/// Type-II Anderson mixing on x <- g(x) with mixing parameter beta.
class AndersonMixer {
 public:
  AndersonMixer(int depth, double beta) : depth_(depth), beta_(beta) {}

  Eigen::VectorXd next(const Eigen::VectorXd& x, const Eigen::VectorXd& gx) {
    const Eigen::VectorXd f = gx - x;
    if (has_prev_) {
      dX_.push_back(x - x_prev_);
      dF_.push_back(f - f_prev_);
      if (static_cast<int>(dX_.size()) > depth_) {
        dX_.pop_front();
        dF_.pop_front();
      }
    }
    x_prev_ = x;
    f_prev_ = f;
    has_prev_ = true;
    if (dF_.empty()) return x + beta_ * f;
    const Eigen::Index k = static_cast<Eigen::Index>(dF_.size());
    Eigen::MatrixXd F(f.size(), k), X(f.size(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
      F.col(j) = dF_[static_cast<size_t>(j)];
      X.col(j) = dX_[static_cast<size_t>(j)];
    }
    const Eigen::VectorXd g = F.completeOrthogonalDecomposition().solve(f);
    return x + beta_ * f - (X + beta_ * F) * g;
  }

  void reset() {
    dX_.clear();
    dF_.clear();
    has_prev_ = false;
  }

 private:
  int depth_;
  double beta_;
  std::deque<Eigen::VectorXd> dX_, dF_;
  Eigen::VectorXd x_prev_, f_prev_;
  bool has_prev_ = false;
};

// --------------------------------------------------------------- stage ----

using StageObserver = std::function<void(const CoupledState&)>;

/// Iterates the fixed-point map until the normalised update drops below the
/// stage tolerance. Exceeding max_iter returns the last state unconverged.
inline CoupledState run_stage(CoupledState st, const DriverConfig& cfg, const StageObserver& obs = {}) {
  cfg.validate();
  st.converged = false;
  st.history.clear();
  st.iterations = 0;
  AndersonMixer mixer(cfg.anderson_depth, cfg.omega);
  for (int k = 0; k < st.stage.max_iter; ++k) {
    if (cfg.accel == Acceleration::None) {
      st = fixed_point_step(st, cfg);
    } else {
      MapOutput m = apply_map(st, cfg);
      CoupledState next = st;
      next.rho = std::move(m.rho);
      const Eigen::VectorXd x = pack(st.eta, st.u);
      unpack(mixer.next(x, pack(m.eta, m.u)), next.eta, next.u);
      next.iterations = st.iterations + 1;
      next.history.push_back({update_metric(st, next), next.rho.min_value, m.density_iterations, m.fluid_iterations});
      st = std::move(next);
    }
    if (obs) obs(st);
    if (st.history.back().update < st.stage.tol) {
      st.converged = true;
      break;
    }
  }
  return st;
}

/// Runs the stages in order, each warm-started from the previous. A failing
/// stage stops the schedule; completed stages are returned.
struct ContinuationResult {
  std::vector<CoupledState> stages;
  std::optional<std::string> error;
};

inline ContinuationResult run_continuation(const ContinuationSchedule& sched, const DriverConfig& cfg, const StageObserver& obs = {}) {
  sched.validate();
  cfg.validate();
  ContinuationResult out;
  for (size_t k = 0; k < sched.stages.size(); ++k) {
    const StageSpec& s = sched.stages[k];
    CoupledState init = out.stages.empty() ? initial_state(cfg, s) : prolongate(out.stages.back(), cfg, s);
    init.stage = s;
    try {
      out.stages.push_back(run_stage(std::move(init), cfg, obs));
    } catch (const SolverError& e) {
      out.error = e.what();
      break;
    }
  }
  return out;
}

}  // namespace pfsi
