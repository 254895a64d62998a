#pragma once

// CSV time series and JSON summaries of diagnostics.
//
// energy CSV (schema "pfsi-energy-v1"): one row per coupling-grid time node,
//   t, E, E_delta, visc_rate, beam_rate
// summary JSON (schema "pfsi-summary-v1"): see stage_summary for the keys.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pfsi/config.hpp"
#include "pfsi/diagnostics.hpp"

namespace pfsi {

inline void write_energy_csv(std::ostream& o, const EnergyReport& r) {
  o << "# pfsi-energy-v1\n";
  o << "t,E,E_delta,visc_rate,beam_rate\n";
  o << std::setprecision(17);
  for (size_t k = 0; k < r.t.size(); ++k)
    o << r.t[k] << ',' << r.E[k] << ',' << r.E_delta[k] << ',' << r.visc_rate[k] << ',' << r.beam_rate[k] << '\n';
}

/// Scalar diagnostics of one stage, in a fixed order (also stored in archives).
inline std::vector<std::pair<std::string, double>> scalar_diagnostics(const CoupledState& st, const EnergyReport& e) {
  return {{"eps", st.stage.eps},
          {"delta", st.stage.delta},
          {"iterations", static_cast<double>(st.iterations)},
          {"converged", st.converged ? 1.0 : 0.0},
          {"visc_diss", e.visc_diss},
          {"cubic_diss", e.cubic_diss},
          {"beam_diss", e.beam_diss},
          {"eps_gamma_grad", e.eps_gamma_grad},
          {"eps_gamma_pow", e.eps_gamma_pow},
          {"eps_a_grad", e.eps_a_grad},
          {"eps_a_pow", e.eps_a_pow},
          {"penalty_residual", e.penalty_residual},
          {"penalty_term", e.penalty_term},
          {"work_f", e.work_f},
          {"work_F", e.work_F},
          {"source_gamma", e.source_gamma},
          {"source_a", e.source_a},
          {"balance_lhs", e.lhs},
          {"balance_rhs", e.rhs},
          {"balance_residual", e.balance},
          {"balance_scale", e.scale},
          {"phys_lhs", e.phys_lhs},
          {"phys_rhs", e.phys_rhs},
          {"phys_defect", e.phys_defect},
          {"sup_E", e.sup_E},
          {"sup_E_delta", e.sup_E_delta},
          {"mass_error", e.mass_error},
          {"min_rho", e.min_rho}};
}

struct CheckLine {
  std::string name;
  bool pass = false;
  double value = 0.0, limit = 0.0;
  bool equality = true;  // counts towards the exit status
};

/// Invariant checks applied to every stage. Equality checks are two-sided;
/// the inequality and the density floor are reported only.
inline std::vector<CheckLine> stage_checks(const CoupledState& st, const EnergyReport& e, double m0) {
  std::vector<CheckLine> c;
  c.push_back({"converged", st.converged, static_cast<double>(st.iterations), static_cast<double>(st.stage.max_iter), true});
  c.push_back({"mass", e.mass_error <= 1e-10 * m0, e.mass_error, 1e-10 * m0, true});
  c.push_back({"energy_identity", std::abs(e.balance) <= 1e-8 * e.scale, std::abs(e.balance), 1e-8 * e.scale, true});
  const double ps = std::max({std::abs(e.phys_lhs), std::abs(e.phys_rhs), 1.0});
  c.push_back({"energy_inequality", e.phys_defect <= 1e-8 * ps, e.phys_defect, 1e-8 * ps, false});
  c.push_back({"density_floor", e.min_rho >= 0.0, e.min_rho, 0.0, false});
  return c;
}

inline nlohmann::json stage_summary(const CoupledState& st, const EnergyReport& e, double m0) {
  nlohmann::json j;
  j["schema"] = "pfsi-summary-v1";
  j["tag"] = st.stage.tag;
  j["m"] = st.stage.m;
  j["n_beam"] = st.stage.n_beam;
  j["n_fluid"] = st.stage.n_fluid;
  for (const auto& [k, v] : scalar_diagnostics(st, e)) j["diagnostics"][k] = v;
  for (const auto& c : stage_checks(st, e, m0))
    j["checks"][c.name] = {{"pass", c.pass}, {"value", c.value}, {"limit", c.limit}, {"equality", c.equality}};
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream o(path);
  if (!o) throw IntegrityError("cannot write '" + path + "'");
  o << text;
}

}  // namespace pfsi
