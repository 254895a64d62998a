#pragma once

// "PFSI1" state archive. Layout, all integers and floats little-endian:
//
//   char[8]   magic "PFSI1\0\0\0"
//   u32       format version
//   u64       FNV-1a hash of the config echo
//   str       config echo (u32 byte count + bytes)
//   str       stage tag
//   f64 x3    eps, delta, tol
//   i32 x4    m, n_beam, n_fluid, max_iter
//   u8, u32   converged flag, iteration count
//   u32 x3    density grid nx, nz, nt, then f64[nx*nz*nt] values (layout of Grid3)
//   u32 x2    velocity coefficient rows, cols, then f64[rows*cols] column-major
//   u32 x2    beam coefficient rows, cols, then f64[rows*cols] column-major
//   u32       diagnostic count, then per entry: str name, f64 value
//   u64       FNV-1a checksum of every preceding byte

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pfsi/config.hpp"

namespace pfsi {

inline constexpr std::uint32_t kArchiveVersion = 1;

struct Archive {
  RunConfig config;
  std::string echo;
  std::uint64_t hash = 0;
  std::string tag;
  CoupledState state;
  std::vector<std::pair<std::string, double>> diagnostics;
};

namespace detail {

class ByteWriter {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    buf_.insert(buf_.end(), b, b + sizeof(T));
  }
  void str(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void raw(const char* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void doubles(const double* p, size_t n) {
    for (size_t i = 0; i < n; ++i) put<double>(p[i]);
  }
  const std::vector<unsigned char>& bytes() const { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class ByteReader {
 public:
  ByteReader(const unsigned char* p, size_t n) : p_(p), n_(n) {}
  template <class T>
  T get() {
    need(sizeof(T));
    unsigned char b[sizeof(T)];
    std::memcpy(b, p_ + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
  std::string str() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(p_ + pos_), n);
    pos_ += n;
    return s;
  }
  void doubles(double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = get<double>();
  }
  size_t pos() const { return pos_; }

 private:
  void need(size_t k) const {
    if (pos_ + k > n_) throw IntegrityError("archive truncated");
  }
  const unsigned char* p_;
  size_t n_, pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> serialize_archive(const RunConfig& rc, const CoupledState& st,
                                                    const std::vector<std::pair<std::string, double>>& diagnostics) {
  detail::ByteWriter w;
  const char magic[8] = {'P', 'F', 'S', 'I', '1', 0, 0, 0};
  w.raw(magic, 8);
  w.put<std::uint32_t>(kArchiveVersion);
  const std::string echo = config_echo(rc);
  w.put<std::uint64_t>(fnv1a(echo.data(), echo.size()));
  w.str(echo);
  w.str(st.stage.tag);
  w.put<double>(st.stage.eps);
  w.put<double>(st.stage.delta);
  w.put<double>(st.stage.tol);
  for (int v : {st.stage.m, st.stage.n_beam, st.stage.n_fluid, st.stage.max_iter}) w.put<std::int32_t>(v);
  w.put<std::uint8_t>(st.converged ? 1 : 0);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(st.iterations));
  const Grid3& g = st.rho.grid;
  for (int v : {g.nx(), g.nz(), g.nt()}) w.put<std::uint32_t>(static_cast<std::uint32_t>(v));
  w.doubles(st.rho.values.data(), static_cast<size_t>(st.rho.values.size()));
  for (const Eigen::MatrixXd* m : {&st.u.coef, &st.eta.eta.coef}) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m->rows()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m->cols()));
    w.doubles(m->data(), static_cast<size_t>(m->size()));
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(diagnostics.size()));
  for (const auto& [k, v] : diagnostics) {
    w.str(k);
    w.put<double>(v);
  }
  const auto& b = w.bytes();
  w.put<std::uint64_t>(fnv1a(b.data(), b.size()));
  return w.bytes();
}

inline Archive deserialize_archive(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 8 + 4 + 8) throw IntegrityError("archive too short");
  if (std::memcmp(bytes.data(), "PFSI1\0\0\0", 8) != 0) throw IntegrityError("not a PFSI1 archive (bad magic)");
  {
    detail::ByteReader tail(bytes.data() + bytes.size() - 8, 8);
    const auto stored = tail.get<std::uint64_t>();
    if (stored != fnv1a(bytes.data(), bytes.size() - 8)) throw IntegrityError("archive checksum mismatch (corrupt or edited file)");
  }
  detail::ByteReader r(bytes.data() + 8, bytes.size() - 16);
  const auto version = r.get<std::uint32_t>();
  if (version != kArchiveVersion)
    throw IntegrityError("archive version " + std::to_string(version) + " is not supported (reader version " + std::to_string(kArchiveVersion) + ")");
  Archive a;
  a.hash = r.get<std::uint64_t>();
  a.echo = r.str();
  if (a.hash != fnv1a(a.echo.data(), a.echo.size())) throw IntegrityError("archive config hash does not match its config echo");
  try {
    a.config = parse_config_text(a.echo, "<archive config>");
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("archive config echo does not parse: ") + e.what());
  }
  a.tag = r.str();
  StageSpec s;
  s.tag = a.tag;
  s.eps = r.get<double>();
  s.delta = r.get<double>();
  s.tol = r.get<double>();
  s.m = r.get<std::int32_t>();
  s.n_beam = r.get<std::int32_t>();
  s.n_fluid = r.get<std::int32_t>();
  s.max_iter = r.get<std::int32_t>();
  CoupledState st;
  try {
    st = initial_state(DriverConfig{a.config.driver.domain, a.config.driver.phys, {}, a.config.driver.grids}, s);
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("archive stage does not describe a valid discretization: ") + e.what());
  }
  st.converged = r.get<std::uint8_t>() != 0;
  st.iterations = static_cast<int>(r.get<std::uint32_t>());
  const int nx = static_cast<int>(r.get<std::uint32_t>()), nz = static_cast<int>(r.get<std::uint32_t>()),
            nt = static_cast<int>(r.get<std::uint32_t>());
  if (nx != st.rho.grid.nx() || nz != st.rho.grid.nz() || nt != st.rho.grid.nt()) throw IntegrityError("archive density grid does not match its config");
  r.doubles(st.rho.values.data(), static_cast<size_t>(st.rho.values.size()));
  for (Eigen::MatrixXd* m : {&st.u.coef, &st.eta.eta.coef}) {
    const auto rows = r.get<std::uint32_t>(), cols = r.get<std::uint32_t>();
    if (rows != m->rows() || cols != m->cols()) throw IntegrityError("archive coefficient shape does not match its config");
    r.doubles(m->data(), static_cast<size_t>(m->size()));
  }
  st.rho.refresh_metadata(a.config.driver.density.negativity_tol);
  const auto nd = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < nd; ++k) {
    std::string name = r.str();
    a.diagnostics.emplace_back(std::move(name), r.get<double>());
  }
  if (r.pos() != bytes.size() - 16) throw IntegrityError("archive has trailing bytes");
  a.state = std::move(st);
  return a;
}

inline void save_archive(const std::string& path, const RunConfig& rc, const CoupledState& st,
                         const std::vector<std::pair<std::string, double>>& diagnostics) {
  const auto bytes = serialize_archive(rc, st, diagnostics);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IntegrityError("cannot write archive '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IntegrityError("short write on archive '" + path + "'");
}

inline Archive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot open archive '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_archive(bytes);
}

}  // namespace pfsi
