#pragma once

// Command implementations behind the pfsi executable. Each returns a process
// exit status and writes its human-readable report to the given stream.
//
// Artifacts of `run` in the output directory, per stage <tag>:
//   <tag>.pfsi         state archive
//   <tag>_energy.csv   energy time series
//   <tag>.json         stage summary
// and for the whole run: summary.txt, summary.json.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "pfsi/archive.hpp"
#include "pfsi/oracles/cases.hpp"
#include "pfsi/report.hpp"

namespace pfsi::cli {

enum Exit : int { kOk = 0, kConfigError = 1, kSolverError = 2, kCheckFailed = 3, kIntegrityError = 4 };

/// PFSI_LOG: 0 / quiet, 1 / info (default), 2 / debug.
inline int log_level_from_env() {
  const char* v = std::getenv("PFSI_LOG");
  if (!v) return 1;
  const std::string s(v);
  if (s == "0" || s == "quiet") return 0;
  if (s == "2" || s == "debug") return 2;
  return 1;
}

struct RunOptions {
  std::string out_dir;  // overrides [output] dir when set
  std::string stage_tag;  // stop after this stage
  std::optional<unsigned long> seed;
  int log_level = 1;
};

inline std::string hex(std::uint64_t h) {
  std::ostringstream o;
  o << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
  return o.str();
}

namespace detail {

inline bool exact_zero_fixed_point(const CoupledState& st, double M) {
  return (st.rho.values == M).all() && (st.u.coef.array() == 0.0).all() && (st.eta.eta.coef.array() == 0.0).all();
}

inline std::string fmt_sci(double v) {
  std::ostringstream o;
  o << std::scientific << std::setprecision(3) << v;
  return o.str();
}

}  // namespace detail

inline int cmd_run(RunConfig rc, const RunOptions& opt, std::ostream& out) {
  namespace fs = std::filesystem;
  if (!opt.out_dir.empty()) rc.out_dir = opt.out_dir;
  if (opt.seed) rc.driver.seed = *opt.seed;
  if (!opt.stage_tag.empty()) {
    auto& st = rc.schedule.stages;
    auto it = std::find_if(st.begin(), st.end(), [&](const StageSpec& s) { return s.tag == opt.stage_tag; });
    if (it == st.end()) {
      out << "error: --stage-tag " << opt.stage_tag << " names no stage of the schedule\n";
      return kConfigError;
    }
    st.erase(it + 1, st.end());
  }
  const DriverConfig& cfg = rc.driver;
  const std::string hash = hex(config_hash(rc));
  try {
    fs::create_directories(rc.out_dir);
  } catch (const fs::filesystem_error& e) {
    out << "error: cannot create output directory: " << e.what() << "\n";
    return kIntegrityError;
  }

  StageObserver obs;
  if (opt.log_level >= 2)
    obs = [&](const CoupledState& s) {
      const auto& h = s.history.back();
      out << "  [" << s.stage.tag << "] iter " << s.iterations << " update " << detail::fmt_sci(h.update) << " min_rho " << h.min_rho
          << " density_its " << h.density_iterations << " fluid_its " << h.fluid_iterations << "\n";
    };

  ContinuationResult res;
  try {
    res = run_continuation(rc.schedule, cfg, obs);
  } catch (const ConfigError& e) {
    out << "error: " << e.what() << "\n";
    return kConfigError;
  }

  std::ostringstream sum;
  nlohmann::json js;
  js["schema"] = "pfsi-summary-v1";
  js["config_hash"] = hash;
  js["config"] = config_echo(rc);
  js["stages"] = nlohmann::json::array();
  sum << "pfsi run summary\nconfig hash " << hash << "\n\n";
  sum << "stage      eps        delta      m  nb  nf  its  conv  penalty    balance/scale  mass_err   phys_defect\n";

  bool all_ok = true;
  std::vector<double> penalty, defect;
  for (const CoupledState& st : res.stages) {
    const DiagnosticParams dp = diagnostic_params(st, cfg);
    const EnergyReport e = energy(st, dp);
    const auto diag = scalar_diagnostics(st, e);
    const std::string base = (fs::path(rc.out_dir) / st.stage.tag).string();
    try {
      save_archive(base + ".pfsi", rc, st, diag);
      std::ostringstream csv;
      csv << "# config_hash=" << hash << "\n";
      write_energy_csv(csv, e);
      write_text(base + "_energy.csv", csv.str());
      nlohmann::json sj = stage_summary(st, e, cfg.phys.m0);
      sj["config_hash"] = hash;
      write_text(base + ".json", sj.dump(2) + "\n");
      js["stages"].push_back(sj);
    } catch (const IntegrityError& ex) {
      out << "error: stage " << st.stage.tag << ": " << ex.what() << "\n";
      return kIntegrityError;
    }
    penalty.push_back(e.penalty_residual);
    defect.push_back(e.phys_defect);
    sum << std::left << std::setw(10) << st.stage.tag << " " << std::setw(10) << detail::fmt_sci(st.stage.eps) << " " << std::setw(10)
        << detail::fmt_sci(st.stage.delta) << " " << std::setw(2) << st.stage.m << " " << std::setw(3) << st.stage.n_beam << " " << std::setw(3)
        << st.stage.n_fluid << " " << std::setw(4) << st.iterations << " " << std::setw(5) << (st.converged ? "yes" : "no") << " " << std::setw(10)
        << detail::fmt_sci(e.penalty_residual) << " " << std::setw(14) << detail::fmt_sci(std::abs(e.balance) / e.scale) << " " << std::setw(10)
        << detail::fmt_sci(e.mass_error) << " " << detail::fmt_sci(e.phys_defect) << "\n";
    for (const auto& c : stage_checks(st, e, cfg.phys.m0))
      if (c.equality && !c.pass) all_ok = false;
  }
  sum << std::right << "\nchecks\n";
  for (const CoupledState& st : res.stages) {
    const EnergyReport e = energy(st, diagnostic_params(st, cfg));
    for (const auto& c : stage_checks(st, e, cfg.phys.m0))
      sum << "  " << (c.pass ? "PASS " : "FAIL ") << st.stage.tag << "." << c.name << " value " << detail::fmt_sci(c.value) << " limit "
          << detail::fmt_sci(c.limit) << (c.equality ? "" : " (reported)") << "\n";
  }
  bool pen_mono = true, def_mono = true;
  for (size_t k = 1; k < penalty.size(); ++k) {
    pen_mono = pen_mono && (penalty[k] < penalty[k - 1] || (penalty[k] == 0.0 && penalty[k - 1] == 0.0));
    def_mono = def_mono && defect[k] <= defect[k - 1];
  }
  if (penalty.size() > 1) {
    sum << "penalty residual decreasing across stages: " << (pen_mono ? "yes" : "no") << "\n";
    sum << "energy inequality defect non-increasing: " << (def_mono ? "yes" : "no") << "\n";
  }
  js["penalty_residual_decreasing"] = pen_mono;
  js["inequality_defect_nonincreasing"] = def_mono;
  if (cfg.forcing.empty() && !res.stages.empty()) {
    const bool exact = detail::exact_zero_fixed_point(res.stages.back(), cfg.M());
    sum << "zero forcing: exact fixed point (M, 0, 0) " << (exact ? "reached" : "NOT reached") << "\n";
    js["exact_fixed_point"] = exact;
    all_ok = all_ok && exact;
  }
  int code = all_ok ? kOk : kCheckFailed;
  if (res.error) {
    const StageSpec& s = rc.schedule.stages[res.stages.size()];
    sum << "solver error in stage " << s.tag << " (eps=" << s.eps << ", delta=" << s.delta << "): " << *res.error << "\n";
    js["error"] = "stage " + s.tag + ": " + *res.error;
    code = kSolverError;
  }
  js["ok"] = code == kOk;
  sum << "result: " << (code == kOk ? "OK" : "FAILED") << "\n";
  try {
    write_text((fs::path(rc.out_dir) / "summary.txt").string(), sum.str());
    write_text((fs::path(rc.out_dir) / "summary.json").string(), js.dump(2) + "\n");
  } catch (const IntegrityError& ex) {
    out << "error: " << ex.what() << "\n";
    return kIntegrityError;
  }
  if (opt.log_level >= 1) out << sum.str();
  return code;
}

inline int cmd_run_file(const std::string& config_path, const RunOptions& opt, std::ostream& out) {
  RunConfig rc;
  try {
    rc = parse_config(config_path);
  } catch (const ConfigError& e) {
    out << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  return cmd_run(std::move(rc), opt, out);
}

/// Recomputes the diagnostics of an archived stage and compares them with
/// the recorded ones.
inline int cmd_check(const std::string& path, std::ostream& out) {
  Archive a;
  try {
    a = load_archive(path);
  } catch (const IntegrityError& e) {
    out << "integrity error: " << e.what() << "\n";
    return kIntegrityError;
  }
  const DriverConfig& cfg = a.config.driver;
  const EnergyReport e = energy(a.state, diagnostic_params(a.state, cfg));
  const auto now = scalar_diagnostics(a.state, e);
  int same = 0, differ = 0;
  out << "archive " << path << " stage " << a.tag << " config hash " << hex(a.hash) << "\n";
  for (const auto& [k, v] : now) {
    auto it = std::find_if(a.diagnostics.begin(), a.diagnostics.end(), [&](const auto& p) { return p.first == k; });
    if (it == a.diagnostics.end()) continue;
    if (it->second == v) {
      ++same;
    } else {
      ++differ;
      out << "  differs " << k << ": recorded " << it->second << " recomputed " << v << "\n";
    }
  }
  out << "recorded diagnostics reproduced: " << same << " exact, " << differ << " differing\n";
  bool ok = true;
  for (const auto& c : stage_checks(a.state, e, cfg.phys.m0)) {
    out << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << " value " << detail::fmt_sci(c.value) << " limit " << detail::fmt_sci(c.limit)
        << (c.equality ? "" : " (reported)") << "\n";
    if (c.equality && !c.pass) ok = false;
  }
  if (!ok) out << "FLAGGED: archived state violates an invariant\n";
  return ok ? kOk : kCheckFailed;
}

inline const std::vector<std::string>& oracle_names() {
  static const std::vector<std::string> v{"gram-beam", "gram-fluid", "gram-time", "density-fd", "density-fd-compressive",
                                          "structure-dense", "fluid-fd", "coupled-linear"};
  return v;
}

/// n: basis size (0 = default); m: time harmonics (-1 = default); grid: FD grid.
inline int cmd_oracle(const std::string& name, int n, int m, int grid, std::ostream& out) {
  using namespace oracles;
  std::vector<std::string> names;
  if (name == "all") names = oracle_names();
  else names = {name};
  bool ok = true;
  for (const auto& nm : names) {
    OracleReport r;
    try {
      if (nm == "gram-beam") r = gram_beam(n ? n : 6);
      else if (nm == "gram-fluid") r = gram_fluid(n ? n : 10);
      else if (nm == "gram-time") r = gram_time(2.0, m >= 0 ? m : 2);
      else if (nm == "density-fd") r = density_fd_case(grid ? grid : 64, false);
      else if (nm == "density-fd-compressive") r = density_fd_case(grid ? grid : 64, true);
      else if (nm == "structure-dense") r = structure_dense_case(n ? n : 4, m >= 0 ? m : 2);
      else if (nm == "fluid-fd") r = fluid_fd_case(n ? n : 6, m >= 0 ? m : 2);
      else if (nm == "coupled-linear") r = coupled_linear_case(n ? n : 6, m >= 0 ? m : 1);
      else {
        out << "error: unknown oracle '" << nm << "'\n";
        return kConfigError;
      }
    } catch (const ConfigError& e) {
      out << "refused: " << e.what() << "\n";
      return kConfigError;
    } catch (const SolverError& e) {
      out << "solver error in " << nm << ": " << e.what() << "\n";
      return kSolverError;
    }
    out << (r.pass ? "PASS " : "FAIL ") << r.name << "  max deviation " << detail::fmt_sci(r.deviation) << "  limit " << detail::fmt_sci(r.limit)
        << "  " << std::fixed << std::setprecision(2) << r.seconds << std::defaultfloat << " s" << (r.detail.empty() ? "" : "  " + r.detail) << "\n";
    ok = ok && r.pass;
  }
  return ok ? kOk : kCheckFailed;
}

/// Runs each config in its own process, at most `jobs` at a time, writing to
/// out_root/<config stem>. Returns the largest child exit status.
inline int cmd_sweep(const std::vector<std::string>& configs, const std::string& out_root, int jobs, const RunOptions& base, std::ostream& out) {
  namespace fs = std::filesystem;
  jobs = std::max(1, jobs);
  std::vector<std::string> dirs;
  for (const auto& c : configs) {
    const std::string d = (fs::path(out_root) / fs::path(c).stem()).string();
    if (std::find(dirs.begin(), dirs.end(), d) != dirs.end()) {
      out << "error: two sweep configs map to output directory " << d << "\n";
      return kConfigError;
    }
    dirs.push_back(d);
  }
  try {
    fs::create_directories(out_root);
  } catch (const fs::filesystem_error& e) {
    out << "error: cannot create output directory: " << e.what() << "\n";
    return kIntegrityError;
  }
  out.flush();
  int worst = kOk, running = 0;
  std::vector<pid_t> pids(configs.size(), -1);
  auto reap = [&]() {
    int status = 0;
    const pid_t p = ::wait(&status);
    if (p < 0) return;
    --running;
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : kSolverError;
    for (size_t k = 0; k < pids.size(); ++k)
      if (pids[k] == p) out << "  " << configs[k] << " -> " << dirs[k] << " exit " << code << "\n";
    worst = std::max(worst, code);
  };
  for (size_t k = 0; k < configs.size(); ++k) {
    if (running >= jobs) reap();
    const pid_t p = ::fork();
    if (p < 0) {
      out << "error: fork failed\n";
      return kSolverError;
    }
    if (p == 0) {
      RunOptions o = base;
      o.out_dir = dirs[k];
      std::ostringstream log;
      const int code = cmd_run_file(configs[k], o, log);
      std::ofstream(dirs[k] + ".log") << log.str();
      std::_Exit(code);
    }
    pids[k] = p;
    ++running;
  }
  while (running > 0) reap();
  return worst;
}

}  // namespace pfsi::cli
