#include <gtest/gtest.h>

#include <filesystem>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pfsi/archive.hpp"
#include "pfsi/cli.hpp"

using namespace pfsi;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = PFSI_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pfsi_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<unsigned char> bytes_of(const fs::path& p) {
  const std::string s = slurp(p);
  return {s.begin(), s.end()};
}

void put_bytes(const fs::path& p, const std::vector<unsigned char>& b) {
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

// Small zero-forcing run shared by the archive tests.
const fs::path& zero_run() {
  static const fs::path dir = [] {
    const fs::path d = scratch("zero");
    cli::RunOptions o;
    o.out_dir = d.string();
    o.log_level = 0;
    std::ostringstream log;
    const int code = cli::cmd_run_file(kConfigs + "/zero_forcing.ini", o, log);
    EXPECT_EQ(code, cli::kOk) << log.str();
    return d;
  }();
  return dir;
}

}  // namespace

TEST(Config, MinimalDefaults) {
  const RunConfig rc = parse_config(kConfigs + "/minimal.ini");
  EXPECT_EQ(rc.driver.phys.mu, 1.0);
  EXPECT_EQ(rc.driver.phys.zeta, 1.0);
  EXPECT_EQ(rc.driver.phys.a, 5.0);
  EXPECT_EQ(rc.driver.phys.gamma, 1.4);
  ASSERT_EQ(rc.schedule.stages.size(), 3u);
  EXPECT_EQ(rc.schedule.stages[0].eps, 1e-1);
  EXPECT_EQ(rc.schedule.stages[1].eps, 1e-2);
  EXPECT_EQ(rc.schedule.stages[2].eps, 1e-3);
  for (const auto& s : rc.schedule.stages) EXPECT_EQ(s.delta, s.eps);
  EXPECT_TRUE(rc.driver.forcing.empty());
}

TEST(Config, GammaOneRejected) {
  try {
    parse_config_text("[physics]\ngamma = 1\n");
    FAIL() << "gamma = 1 accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("let γ > 1"), std::string::npos) << e.what();
  }
}

TEST(Config, DuplicateKeyCitesBothLines) {
  try {
    parse_config_text("[physics]\nmu = 2\n\nmu = 3\n", "dup.ini");
    FAIL() << "duplicate accepted";
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("dup.ini:4"), std::string::npos) << m;
    EXPECT_NE(m.find("line 2"), std::string::npos) << m;
  }
}

TEST(Config, UnknownKeyAndBadValues) {
  EXPECT_THROW(parse_config_text("[physics]\nviscosity = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[physics]\nmu = fast\n"), ConfigError);
  EXPECT_THROW(parse_config_text("mu = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[schedule]\neps = 0.1, 0.01\ndelta = 0.1\n"), ConfigError);
}

TEST(Config, EchoReparsesIdentically) {
  for (const char* f : {"minimal.ini", "desk.ini", "zero_forcing.ini"}) {
    const RunConfig a = parse_config(kConfigs + "/" + f);
    const std::string echo = config_echo(a);
    const RunConfig b = parse_config_text(echo);
    EXPECT_EQ(config_echo(b), echo) << f;
    EXPECT_EQ(config_hash(a), config_hash(b)) << f;
  }
}

TEST(Archive, RoundTripIsBitIdentical) {
  const fs::path p = zero_run() / "stage2.pfsi";
  const auto bytes = bytes_of(p);
  const Archive a = deserialize_archive(bytes);
  EXPECT_EQ(serialize_archive(a.config, a.state, a.diagnostics), bytes);
  EXPECT_EQ(a.tag, "stage2");
  EXPECT_TRUE(a.state.converged);
}

TEST(Archive, VersionMismatchNamesBothVersions) {
  auto bytes = bytes_of(zero_run() / "stage0.pfsi");
  const std::uint32_t v = 7;
  std::memcpy(bytes.data() + 8, &v, 4);
  const std::uint64_t sum = fnv1a(bytes.data(), bytes.size() - 8);
  std::memcpy(bytes.data() + bytes.size() - 8, &sum, 8);
  try {
    deserialize_archive(bytes);
    FAIL() << "version 7 accepted";
  } catch (const IntegrityError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("version 7"), std::string::npos) << m;
    EXPECT_NE(m.find("reader version 1"), std::string::npos) << m;
  }
}

TEST(Archive, CorruptionIsIntegrityError) {
  const fs::path d = scratch("corrupt");
  auto bytes = bytes_of(zero_run() / "stage1.pfsi");
  bytes[bytes.size() / 2] ^= 0x01;
  put_bytes(d / "bad.pfsi", bytes);
  EXPECT_THROW(load_archive((d / "bad.pfsi").string()), IntegrityError);
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_check((d / "bad.pfsi").string(), out), cli::kIntegrityError);
  bytes.resize(10);
  put_bytes(d / "short.pfsi", bytes);
  EXPECT_EQ(cli::cmd_check((d / "short.pfsi").string(), out), cli::kIntegrityError);
}

TEST(Run, ZeroForcingArtifactsShareTheHash) {
  const fs::path& d = zero_run();
  const nlohmann::json js = nlohmann::json::parse(slurp(d / "summary.json"));
  EXPECT_EQ(js["schema"], "pfsi-summary-v1");
  EXPECT_TRUE(js["ok"].get<bool>());
  EXPECT_TRUE(js["exact_fixed_point"].get<bool>());
  const std::string hash = js["config_hash"];
  EXPECT_NE(slurp(d / "summary.txt").find("config hash " + hash), std::string::npos);
  for (const char* tag : {"stage0", "stage1", "stage2"}) {
    const Archive a = load_archive((d / (std::string(tag) + ".pfsi")).string());
    EXPECT_EQ(cli::hex(a.hash), hash) << tag;
    const nlohmann::json sj = nlohmann::json::parse(slurp(d / (std::string(tag) + ".json")));
    EXPECT_EQ(sj["config_hash"], hash) << tag;
    const std::string csv = slurp(d / (std::string(tag) + "_energy.csv"));
    EXPECT_EQ(csv.rfind("# config_hash=" + hash + "\n", 0), 0u) << tag;
    EXPECT_NE(csv.find("# pfsi-energy-v1"), std::string::npos);
  }
}

TEST(Run, SameSeedIsBitIdentical) {
  RunConfig rc = parse_config(kConfigs + "/desk.ini");
  rc.driver.initial_noise = 1e-3;
  rc.schedule.stages.resize(1);
  rc.driver.grids.rho_nx = rc.driver.grids.rho_nz = rc.driver.grids.rho_nt = 0;
  std::ostringstream log;
  cli::RunOptions o;
  o.log_level = 0;
  o.seed = 42;
  const fs::path a = scratch("seed_a"), b = scratch("seed_b");
  o.out_dir = a.string();
  const int ca = cli::cmd_run(rc, o, log);
  o.out_dir = b.string();
  const int cb = cli::cmd_run(rc, o, log);
  EXPECT_EQ(ca, cb);
  EXPECT_EQ(ca, cli::kOk) << log.str();
  EXPECT_EQ(bytes_of(a / "stage0.pfsi"), bytes_of(b / "stage0.pfsi"));
  EXPECT_EQ(slurp(a / "stage0_energy.csv"), slurp(b / "stage0_energy.csv"));
}

TEST(Run, StageTagTruncatesAndUnknownTagIsRejected) {
  const RunConfig rc = parse_config(kConfigs + "/zero_forcing.ini");
  cli::RunOptions o;
  o.log_level = 0;
  o.out_dir = scratch("tag").string();
  o.stage_tag = "stage1";
  std::ostringstream log;
  EXPECT_EQ(cli::cmd_run(rc, o, log), cli::kOk);
  EXPECT_TRUE(fs::exists(fs::path(o.out_dir) / "stage1.pfsi"));
  EXPECT_FALSE(fs::exists(fs::path(o.out_dir) / "stage2.pfsi"));
  o.stage_tag = "nope";
  EXPECT_EQ(cli::cmd_run(rc, o, log), cli::kConfigError);
}

TEST(Run, MissingOrInvalidConfigExitsOne) {
  std::ostringstream log;
  cli::RunOptions o;
  o.log_level = 0;
  o.out_dir = scratch("bad_cfg").string();
  EXPECT_EQ(cli::cmd_run_file(kConfigs + "/does_not_exist.ini", o, log), cli::kConfigError);
  const fs::path f = fs::path(o.out_dir) / "g1.ini";
  std::ofstream(f) << "[physics]\ngamma = 1\n";
  EXPECT_EQ(cli::cmd_run_file(f.string(), o, log), cli::kConfigError);
  EXPECT_NE(log.str().find("let γ > 1"), std::string::npos);
}

TEST(Check, ReproducesRecordedDiagnostics) {
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_check((zero_run() / "stage2.pfsi").string(), out), cli::kOk) << out.str();
  EXPECT_NE(out.str().find(" 0 differing"), std::string::npos) << out.str();
  EXPECT_EQ(out.str().find("FLAGGED"), std::string::npos);
}

// Scaling a forced velocity and re-saving keeps the file consistent but
// breaks the energy identity, which the check must flag. A zero velocity
// would be unchanged by scaling, hence the forced run.
TEST(Check, EditedStateIsFlagged) {
  RunConfig rc = parse_config(kConfigs + "/desk.ini");
  rc.schedule.stages.resize(1);
  rc.driver.grids.rho_nx = rc.driver.grids.rho_nz = rc.driver.grids.rho_nt = 0;
  const fs::path d = scratch("edited");
  cli::RunOptions o;
  o.log_level = 0;
  o.out_dir = d.string();
  std::ostringstream log;
  ASSERT_EQ(cli::cmd_run(rc, o, log), cli::kOk) << log.str();
  Archive a = load_archive((d / "stage0.pfsi").string());
  a.state.u.coef *= 1.01;
  save_archive((d / "edited.pfsi").string(), a.config, a.state, a.diagnostics);
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_check((d / "edited.pfsi").string(), out), cli::kCheckFailed) << out.str();
  EXPECT_NE(out.str().find("FLAGGED"), std::string::npos);
}

TEST(Oracle, AllPassAndCapsAreEnforced) {
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_oracle("all", 0, -1, 0, out), cli::kOk) << out.str();
  std::ostringstream big;
  EXPECT_EQ(cli::cmd_oracle("gram-beam", 40, -1, 0, big), cli::kConfigError);
  EXPECT_NE(big.str().find("cap 16"), std::string::npos) << big.str();
  std::ostringstream unknown;
  EXPECT_EQ(cli::cmd_oracle("no-such-oracle", 0, -1, 0, unknown), cli::kConfigError);
}

TEST(Sweep, RunsEachConfigIntoItsOwnDirectory) {
  const fs::path root = scratch("sweep");
  const fs::path bad = root / "broken.ini";
  std::ofstream(bad) << "[physics]\nmu = -1\n";
  cli::RunOptions o;
  o.log_level = 0;
  std::ostringstream out;
  const int code = cli::cmd_sweep({kConfigs + "/zero_forcing.ini", kConfigs + "/minimal.ini", bad.string()}, (root / "out").string(), 2, o, out);
  EXPECT_EQ(code, cli::kConfigError) << out.str();
  EXPECT_TRUE(fs::exists(root / "out" / "zero_forcing" / "summary.json"));
  EXPECT_TRUE(fs::exists(root / "out" / "minimal" / "stage2.pfsi"));
  EXPECT_TRUE(fs::exists(root / "out" / "broken.log"));
  std::ostringstream dup;
  EXPECT_EQ(cli::cmd_sweep({kConfigs + "/minimal.ini", kConfigs + "/minimal.ini"}, (root / "dup").string(), 1, o, dup), cli::kConfigError);
}
