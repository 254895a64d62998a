#pragma once

// Run configuration in a sectioned "key = value" text format:
//
//   [domain]          L, H, T
//   [physics]         gamma, mu, zeta, m0, a
//   [forcing]         beam, fluid: comma-separated amp:space:time triples
//   [discretization]  m, n_beam, n_fluid (scalar or one per stage), rho_nx,
//                     rho_nz, rho_nt, beam_nx, beam_nt
//   [schedule]        eps, delta (comma lists, one entry per stage), tol, max_iter
//   [solver]          omega, accel (anderson|none), anderson_depth,
//                     order (jacobi|gauss-seidel), density_tol, fluid_tol,
//                     seed, initial_noise
//   [test]            freeze_density, linear_fluid, flat_trace
//   [output]          dir
//
// '#' and ';' start comments. Every key may appear once.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pfsi/driver.hpp"

namespace pfsi {

struct RunConfig {
  DriverConfig driver;
  ContinuationSchedule schedule;
  std::string out_dir = "pfsi_out";
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

}  // namespace detail

/// Raw section.key -> value table with line numbers.
class IniTable {
 public:
  static IniTable parse(const std::string& text, const std::string& source = "<config>") {
    IniTable t;
    t.source_ = source;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string s = raw;
      const auto c = s.find_first_of("#;");
      if (c != std::string::npos) s = s.substr(0, c);
      s = detail::trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']' || s.size() < 3) throw ConfigError(source + ":" + std::to_string(line) + ": malformed section header '" + s + "'");
        section = detail::trim(s.substr(1, s.size() - 2));
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(line) + ": expected 'key = value'");
      if (section.empty()) throw ConfigError(source + ":" + std::to_string(line) + ": key outside of any section");
      const std::string key = section + "." + detail::trim(s.substr(0, eq));
      const std::string val = detail::trim(s.substr(eq + 1));
      if (detail::trim(s.substr(0, eq)).empty()) throw ConfigError(source + ":" + std::to_string(line) + ": empty key");
      auto it = t.entries_.find(key);
      if (it != t.entries_.end())
        throw ConfigError(source + ":" + std::to_string(line) + ": duplicate key '" + key + "' (first defined at line " +
                          std::to_string(it->second.line) + ")");
      t.entries_[key] = detail::Entry{val, line};
    }
    return t;
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  const std::string* get(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second.value;
  }

  std::string where(const std::string& key) const {
    auto it = entries_.find(key);
    return source_ + ":" + (it == entries_.end() ? std::string("?") : std::to_string(it->second.line));
  }

  void reject_unused() const {
    for (const auto& [k, e] : entries_)
      if (!e.used) throw ConfigError(source_ + ":" + std::to_string(e.line) + ": unknown key '" + k + "'");
  }

 private:
  std::string source_;
  std::map<std::string, detail::Entry> entries_;
};

namespace detail {

inline double to_double(IniTable& t, const std::string& key, double def) {
  const std::string* v = t.get(key);
  if (!v) return def;
  try {
    size_t pos = 0;
    const double d = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(t.where(key) + ": " + key + ": expected a number, got '" + *v + "'");
  }
}

inline long to_long(IniTable& t, const std::string& key, long def) {
  const std::string* v = t.get(key);
  if (!v) return def;
  try {
    size_t pos = 0;
    const long d = std::stol(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(t.where(key) + ": " + key + ": expected an integer, got '" + *v + "'");
  }
}

inline bool to_bool(IniTable& t, const std::string& key, bool def) {
  const std::string* v = t.get(key);
  if (!v) return def;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(t.where(key) + ": " + key + ": expected true/false, got '" + *v + "'");
}

inline std::vector<double> to_list(IniTable& t, const std::string& key, std::vector<double> def) {
  const std::string* v = t.get(key);
  if (!v) return def;
  std::vector<double> out;
  for (const auto& item : split(*v, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError(t.where(key) + ": " + key + ": bad list entry '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(t.where(key) + ": " + key + ": empty list");
  return out;
}

inline std::vector<ModeTriple> to_triples(IniTable& t, const std::string& key) {
  const std::string* v = t.get(key);
  std::vector<ModeTriple> out;
  if (!v) return out;
  for (const auto& item : split(*v, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 3) throw ConfigError(t.where(key) + ": " + key + ": expected amp:space:time, got '" + item + "'");
    try {
      out.push_back({std::stod(parts[0]), std::stoi(parts[1]), std::stoi(parts[2])});
    } catch (const std::exception&) {
      throw ConfigError(t.where(key) + ": " + key + ": bad triple '" + item + "'");
    }
  }
  return out;
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>") {
  using namespace detail;
  IniTable t = IniTable::parse(text, source);
  RunConfig rc;
  DriverConfig& c = rc.driver;
  c.domain.L = to_double(t, "domain.L", c.domain.L);
  c.domain.H = to_double(t, "domain.H", c.domain.H);
  c.domain.T = to_double(t, "domain.T", c.domain.T);
  c.phys.gamma = to_double(t, "physics.gamma", c.phys.gamma);
  c.phys.mu = to_double(t, "physics.mu", c.phys.mu);
  c.phys.zeta = to_double(t, "physics.zeta", c.phys.zeta);
  c.phys.m0 = to_double(t, "physics.m0", c.phys.m0);
  c.phys.a = to_double(t, "physics.a", c.phys.a);
  c.forcing.beam = to_triples(t, "forcing.beam");
  c.forcing.fluid = to_triples(t, "forcing.fluid");

  const std::vector<double> ms = to_list(t, "discretization.m", {2});
  const std::vector<double> nbs = to_list(t, "discretization.n_beam", {4});
  const std::vector<double> nfs = to_list(t, "discretization.n_fluid", {12});
  c.grids.rho_nx = static_cast<int>(to_long(t, "discretization.rho_nx", 0));
  c.grids.rho_nz = static_cast<int>(to_long(t, "discretization.rho_nz", 0));
  c.grids.rho_nt = static_cast<int>(to_long(t, "discretization.rho_nt", 0));
  c.grids.beam_nx = static_cast<int>(to_long(t, "discretization.beam_nx", 0));
  c.grids.beam_nt = static_cast<int>(to_long(t, "discretization.beam_nt", 0));

  const std::vector<double> eps = to_list(t, "schedule.eps", {1e-1, 1e-2, 1e-3});
  const std::vector<double> dl = to_list(t, "schedule.delta", eps);
  const double tol = to_double(t, "schedule.tol", 1e-10);
  const long max_iter = to_long(t, "schedule.max_iter", 200);
  const size_t ns = eps.size();
  if (dl.size() != ns) throw ConfigError("schedule.delta: needs one entry per eps stage (" + std::to_string(ns) + ")");
  auto per_stage = [ns](const std::vector<double>& v, const char* name) {
    if (v.size() != 1 && v.size() != ns)
      throw ConfigError(std::string("discretization.") + name + ": give one value or one per stage (" + std::to_string(ns) + ")");
    return [v](size_t k) { return static_cast<int>(v.size() == 1 ? v[0] : v[k]); };
  };
  const auto m_at = per_stage(ms, "m"), nb_at = per_stage(nbs, "n_beam"), nf_at = per_stage(nfs, "n_fluid");
  for (size_t k = 0; k < ns; ++k)
    rc.schedule.stages.push_back({m_at(k), nb_at(k), nf_at(k), eps[k], dl[k], tol, static_cast<int>(max_iter), "stage" + std::to_string(k)});

  c.omega = to_double(t, "solver.omega", c.omega);
  if (const std::string* a = t.get("solver.accel")) {
    if (*a == "anderson") c.accel = Acceleration::Anderson;
    else if (*a == "none") c.accel = Acceleration::None;
    else throw ConfigError(t.where("solver.accel") + ": solver.accel: expected anderson or none");
  }
  c.anderson_depth = static_cast<int>(to_long(t, "solver.anderson_depth", c.anderson_depth));
  if (const std::string* o = t.get("solver.order")) {
    if (*o == "jacobi") c.order = SweepOrder::Jacobi;
    else if (*o == "gauss-seidel") c.order = SweepOrder::GaussSeidel;
    else throw ConfigError(t.where("solver.order") + ": solver.order: expected jacobi or gauss-seidel");
  }
  c.density.tol = to_double(t, "solver.density_tol", c.density.tol);
  c.fluid.tol = to_double(t, "solver.fluid_tol", c.fluid.tol);
  const long seed = to_long(t, "solver.seed", 0);
  if (seed < 0) throw ConfigError(t.where("solver.seed") + ": solver.seed: must be non-negative");
  c.seed = static_cast<unsigned long>(seed);
  c.initial_noise = to_double(t, "solver.initial_noise", 0.0);
  c.freeze_density = to_bool(t, "test.freeze_density", false);
  c.linear_fluid = to_bool(t, "test.linear_fluid", false);
  c.flat_trace = to_bool(t, "test.flat_trace", false);
  if (const std::string* d = t.get("output.dir")) rc.out_dir = *d;
  t.reject_unused();

  try {
    c.validate();
    rc.schedule.validate();
    for (const auto& s : rc.schedule.stages) {
      DiscretizationSpec ds = c.grids;
      ds.m = s.m;
      ds.n_beam = s.n_beam;
      ds.n_fluid = s.n_fluid;
      ds.validate();
      const Discretization d = make_discretization(c.domain, ds);
      (void)beam_forcing(c.forcing, d);
      (void)fluid_forcing(c.forcing, d);
    }
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return rc;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

/// Canonical text of a configuration with all defaults resolved. Parsing the
/// echo reproduces the configuration. The output directory is left out so
/// the same computation hashes the same wherever it is written.
inline std::string config_echo(const RunConfig& rc) {
  using detail::fmt;
  const DriverConfig& c = rc.driver;
  std::ostringstream o;
  auto triples = [](const std::vector<ModeTriple>& v) {
    std::string s;
    for (size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v[k].amp) + ":" + std::to_string(v[k].space) + ":" + std::to_string(v[k].time);
    return s;
  };
  auto list = [&](auto get) {
    std::string s;
    for (size_t k = 0; k < rc.schedule.stages.size(); ++k) s += (k ? ", " : "") + fmt(get(rc.schedule.stages[k]));
    return s;
  };
  o << "[domain]\nL = " << fmt(c.domain.L) << "\nH = " << fmt(c.domain.H) << "\nT = " << fmt(c.domain.T) << "\n";
  o << "[physics]\ngamma = " << fmt(c.phys.gamma) << "\nmu = " << fmt(c.phys.mu) << "\nzeta = " << fmt(c.phys.zeta) << "\nm0 = " << fmt(c.phys.m0)
    << "\na = " << fmt(c.phys.a) << "\n";
  o << "[forcing]\n";
  if (!c.forcing.beam.empty()) o << "beam = " << triples(c.forcing.beam) << "\n";
  if (!c.forcing.fluid.empty()) o << "fluid = " << triples(c.forcing.fluid) << "\n";
  o << "[discretization]\nm = " << list([](const StageSpec& s) { return s.m; }) << "\nn_beam = " << list([](const StageSpec& s) { return s.n_beam; })
    << "\nn_fluid = " << list([](const StageSpec& s) { return s.n_fluid; }) << "\nrho_nx = " << c.grids.rho_nx << "\nrho_nz = " << c.grids.rho_nz
    << "\nrho_nt = " << c.grids.rho_nt << "\nbeam_nx = " << c.grids.beam_nx << "\nbeam_nt = " << c.grids.beam_nt << "\n";
  const StageSpec& s0 = rc.schedule.stages.front();
  o << "[schedule]\neps = " << list([](const StageSpec& s) { return s.eps; }) << "\ndelta = " << list([](const StageSpec& s) { return s.delta; })
    << "\ntol = " << fmt(s0.tol) << "\nmax_iter = " << s0.max_iter << "\n";
  o << "[solver]\nomega = " << fmt(c.omega) << "\naccel = " << (c.accel == Acceleration::Anderson ? "anderson" : "none")
    << "\nanderson_depth = " << c.anderson_depth << "\norder = " << (c.order == SweepOrder::Jacobi ? "jacobi" : "gauss-seidel")
    << "\ndensity_tol = " << fmt(c.density.tol) << "\nfluid_tol = " << fmt(c.fluid.tol) << "\nseed = " << c.seed
    << "\ninitial_noise = " << fmt(c.initial_noise) << "\n";
  o << "[test]\nfreeze_density = " << (c.freeze_density ? "true" : "false") << "\nlinear_fluid = " << (c.linear_fluid ? "true" : "false")
    << "\nflat_trace = " << (c.flat_trace ? "true" : "false") << "\n";
  return o.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const void* data, size_t n, std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t config_hash(const RunConfig& rc) {
  const std::string e = config_echo(rc);
  return fnv1a(e.data(), e.size());
}

}  // namespace pfsi
