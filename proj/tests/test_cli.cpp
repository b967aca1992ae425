#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rydgate/cli.hpp"
#include "test_support.hpp"

using namespace rydgate;
using rydgate::test::database;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RYDGATE_CLI) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rydgate_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

RunConfig small_run() {
  RunConfig cfg;
  cfg.grid_points = 3;
  cfg.temperatures_uk = {10.0};
  return cfg;
}

}  // namespace

TEST(RunConfig, DefaultsAreTheRbWorkingPoint) {
  const RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  const auto wp = working_point(database(), cfg);
  EXPECT_NEAR(wp.params.ratio(), 2.4767, 0.001);
  EXPECT_NEAR(rad_per_s_to_mhz(wp.params.omega2), 1.29, 0.005);
  EXPECT_NEAR(wp.timing.t_gate * 1e6, 2.3, 0.05);
  EXPECT_EQ(cfg.protocols.size(), 2u);
}

TEST(RunConfig, ValidationRejectsBadValues) {
  auto bad = [](auto mutate) {
    RunConfig cfg;
    mutate(cfg);
    return cfg;
  };
  EXPECT_THROW(bad([](RunConfig& c) { c.omega1_mhz = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](RunConfig& c) { c.n_target = 3; }).validate(), ConfigError);
  EXPECT_THROW(bad([](RunConfig& c) { c.n_control = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](RunConfig& c) { c.grid_points = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](RunConfig& c) { c.temperatures_uk = {10, -1}; }).validate(), ConfigError);
  EXPECT_THROW(bad([](RunConfig& c) { c.spacing_um = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](RunConfig& c) { c.lifetimes_ms = {}; }).validate(), ConfigError);
  EXPECT_THROW(bad([](RunConfig& c) { c.protocols = {}; }).validate(), ConfigError);
  EXPECT_THROW(bad([](RunConfig& c) { c.kw_over_k = -2.5; }).validate(), ConfigError);
}

TEST(RunConfig, AppliesIniSection) {
  RunConfig cfg;
  apply_config(cfg, parse_ini_text("[run]\nspecies = cs133\ne1 = 6P1/2\ne2 = 7P3/2\nomega1_mhz = 1.1\n"
                                   "temperatures_uk = 5, 50\nprotocol = traditional\nc6_thz = 1, 2, 3\n"
                                   "format = json\n"));
  EXPECT_EQ(cfg.species, "cs133");
  EXPECT_EQ(cfg.scheme.e2, "7P3/2");
  EXPECT_DOUBLE_EQ(cfg.omega1_mhz, 1.1);
  EXPECT_EQ(cfg.temperatures_uk, (std::vector<double>{5, 50}));
  EXPECT_EQ(cfg.protocols, std::vector<Protocol>{Protocol::traditional});
  EXPECT_EQ(cfg.c6_thz[2], 3.0);
  EXPECT_EQ(cfg.format, OutputFormat::json);
  EXPECT_THROW(apply_config(cfg, parse_ini_text("[run]\nomega = 1\n")), ConfigError);
  EXPECT_THROW(apply_config(cfg, parse_ini_text("[other]\nspecies = rb87\n")), ConfigError);
  EXPECT_THROW(apply_config(cfg, parse_ini_text("[run]\nc6_thz = 1, 2\n")), ConfigError);
  EXPECT_EQ(parse_protocols("both").size(), 2u);
}

TEST(Commands, SchemeTable) {
  const auto r = cmd_scheme_table(database(), "cs133");
  const auto& t = r.table("schemes");
  ASSERT_EQ(t.rows.size(), 8u);
  EXPECT_NEAR(t.number(0, "kw_over_k"), 4.47, 0.02);
  EXPECT_THROW(cmd_scheme_table(database(), "na23"), LookupError);
}

TEST(Commands, ProtocolParameters) {
  const auto r = cmd_protocol_params(database(), RunConfig{});
  const auto& p = r.table("parameters");
  EXPECT_NEAR(p.number(0, "omega2_over_2pi"), 1.287, 5e-4);
  EXPECT_NEAR(p.number(0, "omega1_prime_over_2pi"), 1.994, 5e-4);
  EXPECT_NEAR(p.number(0, "omega2_prime_over_2pi"), 1.901, 5e-4);
  EXPECT_NEAR(p.number(0, "t_gate"), 2.2944378200982851, 1e-12);
  EXPECT_NEAR(p.number(0, "t_wait"), 1.554, 5e-4);
  RunConfig quoted;
  quoted.kw_over_k = 2.4767;
  const auto quoted_report = cmd_protocol_params(database(), quoted);
  const auto& q = quoted_report.table("parameters");
  EXPECT_NEAR(q.number(0, "kw_over_k"), 2.4767, 1e-15);
  EXPECT_NEAR(q.number(0, "t_gate"), 2.295, 5e-4);
  EXPECT_NEAR(q.number(0, "t_wait"), 1.554, 5e-4);
  const auto& d = r.table("diagnostics");
  ASSERT_EQ(d.rows.size(), 3u);
  const double want[] = {0.048, 0.15, 0.21};
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d.number(i, "kw_vrms_over_omega2"), want[i], 0.005);
}

TEST(Commands, ProtocolParametersInfeasibleScheme) {
  RunConfig cfg;
  cfg.species = "toy";
  cfg.scheme = {"A", "B"};
  EXPECT_THROW(cmd_protocol_params(rydgate::test::toy_database(), cfg), InfeasibleScheme);
}

TEST(Commands, Fig2ScanPopulationThreshold) {
  Fig2Options opt;
  opt.velocities = Fig2Options::default_velocities();
  const auto r = cmd_fig2_scan(database(), "rb87", "5P3/2", opt);
  const auto& t = r.table("pi_pulse");
  ASSERT_EQ(t.rows.size(), 60u);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    EXPECT_NEAR(t.number(i, "phase"), t.number(i, "phase_predicted"), 1e-8);
    EXPECT_NEAR(t.number(i, "population"), t.number(i, "population_closed_form"), 1e-9);
    EXPECT_EQ(t.number(i, "population") >= 0.99, t.number(i, "kv_over_omega1") <= 0.1) << i;
  }
}

TEST(Commands, GateErrorSmallGrid) {
  auto cfg = small_run();
  const auto out = cmd_gate_error(database(), cfg);
  const auto& t = out.report.table("gate_error");
  ASSERT_EQ(t.rows.size(), 2u);
  ASSERT_EQ(out.cells.size(), 2u);
  EXPECT_EQ(out.cells[0].first, "gate_error_cells_pipulse_10uK");
  const double e4 = t.number(0, "e_decay_tau_1.2ms"), e3 = t.number(0, "e_decay_tau_0.3ms");
  EXPECT_NEAR(e3 / e4, 4.0, 1e-12);
  EXPECT_NEAR(t.number(0, "e_total_tau_1.2ms"), t.number(0, "mean_e_ro") + e4, 1e-16);
}

TEST(Commands, SingleCellGridReturnsAtRestError) {
  auto cfg = small_run();
  cfg.grid_points = 1;
  cfg.v_max = 0.0;
  const auto out = cmd_gate_error(database(), cfg);
  const auto& t = out.report.table("gate_error");
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    EXPECT_DOUBLE_EQ(t.number(i, "mean_e_ro"), t.number(i, "e_ro_at_rest"));
}

TEST(Reports, CsvAndJsonCarryUnits) {
  const auto r = cmd_scheme_table(database(), "rb87");
  std::ostringstream csv;
  write_report(csv, r, OutputFormat::csv);
  EXPECT_EQ(csv.str().rfind("# command=scheme-table\n# species=87Rb\n# table=schemes\n", 0), 0u);
  EXPECT_NE(csv.str().find("kw_over_k=1"), std::string::npos);
  EXPECT_EQ(csv.str().find('\r'), std::string::npos);
  const auto j = nlohmann::json::parse([&] {
    std::ostringstream os;
    write_report(os, r, OutputFormat::json);
    return os.str();
  }());
  EXPECT_EQ(j["tables"][0]["units"]["k"], "rad/m");
  EXPECT_EQ(j["tables"][0]["rows"].size(), 8u);
  EXPECT_EQ(j["tables"][0]["rows"][0]["e1"], "5P1/2");
}

TEST_F(CliDir, SchemeTableIsDeterministic) {
  ASSERT_EQ(run_cli("scheme-table --species rb87 --out " + (dir_ / "a.csv").string()), 0);
  ASSERT_EQ(run_cli("scheme-table --species rb87 --out " + (dir_ / "b.csv").string()), 0);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_FALSE(slurp(dir_ / "a.csv").empty());
}

TEST_F(CliDir, ErrorsExitNonZeroAndWriteNothing) {
  EXPECT_EQ(run_cli("scheme-table --species xx99 --out " + (dir_ / "x.csv").string()), 1);
  EXPECT_FALSE(fs::exists(dir_ / "x.csv"));
  const std::string toy = std::string(RYDGATE_TEST_DATA_DIR);
  EXPECT_EQ(run_cli("protocol-params --data " + toy + "/toy_species.ini --config " + toy +
                    "/toy_run.ini --out " + (dir_ / "p.csv").string()),
            1);
  EXPECT_FALSE(fs::exists(dir_ / "p.csv"));
  EXPECT_NE(run_cli("gate-error --grid 0 --out " + (dir_ / "g.csv").string()), 0);
  EXPECT_FALSE(fs::exists(dir_ / "g.csv"));
  EXPECT_NE(run_cli("no-such-command"), 0);
}

TEST_F(CliDir, GateErrorWritesCellFiles) {
  const auto out = dir_ / "gate.csv";
  ASSERT_EQ(run_cli("gate-error --grid 3 --temp-uk 10,100 --protocol pipulse --workers 2 --out " + out.string()), 0);
  const auto text = slurp(out);
  EXPECT_NE(text.find("# command=gate-error"), std::string::npos);
  for (const char* stem : {"gate_error_cells_pipulse_10uK.csv", "gate_error_cells_pipulse_100uK.csv"}) {
    const auto cells = slurp(dir_ / stem);
    EXPECT_NE(cells.find("v_c,v_t,weight,e_ro\n"), std::string::npos) << stem;
    EXPECT_NE(cells.find("cells=9\n"), std::string::npos) << stem;
  }
  const auto again = dir_ / "again.csv";
  ASSERT_EQ(run_cli("gate-error --grid 3 --temp-uk 10,100 --protocol pipulse --workers 1 --cells-dir " +
                    (dir_ / "cells").string() + " --out " + again.string()),
            0);
  EXPECT_EQ(slurp(out), slurp(again));
  EXPECT_EQ(slurp(dir_ / "gate_error_cells_pipulse_10uK.csv"), slurp(dir_ / "cells" / "gate_error_cells_pipulse_10uK.csv"));
}

TEST_F(CliDir, ProtocolParamsJsonAndSchedule) {
  const auto out = dir_ / "p.json", sched = dir_ / "s.txt";
  ASSERT_EQ(run_cli("protocol-params --format json --out " + out.string() + " --schedule-out " + sched.string()), 0);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["command"], "protocol-params");
  EXPECT_EQ(j["tables"][0]["units"]["t_gate"], "us");
  std::ifstream in(sched);
  const auto s = read_schedule(in);
  EXPECT_EQ(s.control_segments.size(), 3u);
  EXPECT_EQ(s.target_segments.size(), 3u);
}

TEST_F(CliDir, Fig2ScanFromConfigFile) {
  const auto cfg = dir_ / "run.ini";
  std::ofstream(cfg) << "[run]\nspecies = rb87\ne1 = 5P1/2\n";
  const auto out = dir_ / "f.csv";
  ASSERT_EQ(run_cli("fig2-scan --config " + cfg.string() + " --omega1 1 --velocities 0.05,0.1 --out " + out.string()),
            0);
  const auto text = slurp(out);
  EXPECT_NE(text.find("# e1=5P1/2\n"), std::string::npos);
  std::size_t rows = 0;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) rows += line.rfind("87Rb,", 0) == 0;
  EXPECT_EQ(rows, 2u);
}
