// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("urllc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args, const std::string& env = "") {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" + URLLC_LAB_PATH + "' " + args +
                            " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int st = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  std::string out_flag() const { return "--out-dir '" + dir_.string() + "'"; }
  json read_json(const std::string& name) const { return json::parse(slurp(dir_ / name)); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, HelpNamesFigures) {
  EXPECT_EQ(run("fading covariance --help").code, 0);
  EXPECT_NE(run("fading covariance --help").out.find("Fig. 3a"), std::string::npos);
  EXPECT_NE(run("protocol tolerable-plink --help").out.find("Fig. 6a"), std::string::npos);
  EXPECT_NE(run("predict misprediction --help").out.find("Fig. 7a"), std::string::npos);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("fading warp").code, 2);
  const auto missing = run("predict coherence " + out_flag());
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("--reliability"), std::string::npos) << missing.err;
  EXPECT_EQ(run("fading cdf --n 0 " + out_flag()).code, 2);
  EXPECT_EQ(run("protocol outage --n 5 --scheme cow " + out_flag()).code, 2);
  EXPECT_EQ(run("protocol tolerable-plink --target 2 " + out_flag()).code, 2);
  EXPECT_EQ(run("fading cdf --n 3 --trials 10 " + out_flag(), "URLLC_LAB_SEED=abc").code, 2);
}

TEST_F(Cli, MinSnrFeasibility) {
  auto r = run("protocol min-snr --scheme occupy --poff 0.1 --n 13 " + out_flag());
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = read_json("fig8_min_snr.json");
  EXPECT_EQ(j["feasible"], false);
  EXPECT_EQ(j["cycle_time_s"], 2e-3);
  r = run("protocol min-snr --scheme occupy --poff 0.1 --n 14 " + out_flag());
  ASSERT_EQ(r.code, 0) << r.err;
  j = read_json("fig8_min_snr.json");
  EXPECT_EQ(j["feasible"], true);
  EXPECT_TRUE(j.contains("k1") && j.contains("k2") && j.contains("snr_db"));
}

TEST_F(Cli, TwoScattererWarning) {
  ASSERT_EQ(run("fading cdf --n 2 --trials 2000 " + out_flag()).code, 0);
  const auto csv = slurp(dir_ / "fig1b_energy_cdf.csv");
  EXPECT_EQ(csv.rfind("#", 0), 0u);
  EXPECT_NE(csv.find("two scatterers"), std::string::npos) << csv.substr(0, 300);
  ASSERT_EQ(run("fading cdf --n 3 --trials 2000 " + out_flag()).code, 0);
  EXPECT_EQ(slurp(dir_ / "fig1b_energy_cdf.csv").find("two scatterers"), std::string::npos);
}

TEST_F(Cli, CovarianceCsvAndManifest) {
  const auto r = run("fading covariance --n 100 --speed 10 --fc 3e9 --trials 200 --seed 1 " + out_flag());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "fig3a_covariance.csv");
  EXPECT_NE(csv.find("distance_wavelengths,empirical,empirical_imag,theoretical_J0"), std::string::npos);
  const auto m = read_json("fading_covariance.manifest.json");
  EXPECT_EQ(m["command"], "fading covariance");
  EXPECT_EQ(m["seed"], 1);
  ASSERT_FALSE(m["outputs"].empty());
  for (const auto& o : m["outputs"]) {
    ASSERT_TRUE(fs::exists(dir_ / o.get<std::string>()));
    EXPECT_GT(fs::file_size(dir_ / o.get<std::string>()), 0u);
  }
  for (const char* k : {"command_line", "config_hash", "versions", "wall_seconds"})
    EXPECT_TRUE(m.contains(k)) << k;
  EXPECT_NE(r.out.find("fig3a_covariance.csv"), std::string::npos);
}

TEST_F(Cli, ConfigHashTracksSemanticFlags) {
  auto hash = [&](const std::string& flags) {
    EXPECT_EQ(run("fading covariance --trials 50 " + flags + " " + out_flag()).code, 0);
    return read_json("fading_covariance.manifest.json")["config_hash"].get<std::string>();
  };
  const auto base = hash("--speed 10");
  EXPECT_EQ(hash("--speed 10 --threads 2"), base);
  EXPECT_EQ(hash("--speed 10.0"), base);
  EXPECT_NE(hash("--speed 11"), base);
  EXPECT_NE(hash("--speed 10 --seed 2"), base);
  EXPECT_NE(hash("--speed 10 --n 50"), base);
}

TEST_F(Cli, SeedEnvironmentOverride) {
  ASSERT_EQ(run("fading cdf --n 5 --trials 500 --seed 3 " + out_flag(), "URLLC_LAB_SEED=9").code, 0);
  const auto with_env = slurp(dir_ / "fig1b_energy_cdf.csv");
  EXPECT_EQ(read_json("fading_cdf.manifest.json")["seed"], 9);
  ASSERT_EQ(run("fading cdf --n 5 --trials 500 --seed 9 " + out_flag()).code, 0);
  EXPECT_EQ(slurp(dir_ / "fig1b_energy_cdf.csv"), with_env);
  ASSERT_EQ(run("fading cdf --n 5 --trials 500 --seed 3 " + out_flag()).code, 0);
  EXPECT_NE(slurp(dir_ / "fig1b_energy_cdf.csv"), with_env);
}

TEST_F(Cli, PacketVariationColumns) {
  const auto r = run("fading packet-variation --packet-us 50 --threshold-db -7 --trials 10000 " + out_flag());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(dir_ / "fig5_packet_variation.csv").find("ratio_db,ccdf_all,ccdf_conditioned"),
            std::string::npos);
}

TEST_F(Cli, CoherenceRecord) {
  auto r = run("predict coherence --reliability 1e-2 --trials 1000 " + out_flag());
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = read_json("fig7a_coherence.json");
  EXPECT_EQ(j["reachable"], true);
  EXPECT_GT(j["meters"].get<double>(), 0.0);
  EXPECT_NEAR(j["meters"].get<double>(), j["wavelengths"].get<double>() * 299792458.0 / 3e9, 1e-9);
  r = run("predict coherence --reliability 0.9 --trials 500 " + out_flag());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json("fig7a_coherence.json")["reachable"], false);
}

TEST_F(Cli, MispredictionCsv) {
  ASSERT_EQ(run("predict misprediction --snr-db 10 --past-ms 3 --sample-ms 1 --trials 500 --points 4 " +
                out_flag())
                .code,
            0);
  const auto csv = slurp(dir_ / "fig7a_misprediction.csv");
  EXPECT_NE(csv.find("horizon_wavelengths,misprediction,ci_low,ci_high"), std::string::npos);
}

TEST_F(Cli, TolerablePlinkCsv) {
  ASSERT_EQ(run("protocol tolerable-plink --target 1e-9 --n-min 2 --n-max 50 " + out_flag()).code, 0);
  std::istringstream is(slurp(dir_ / "fig6a_tolerable_plink.csv"));
  std::string line;
  int rows = 0;
  double prev = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
    const double p = std::stod(line.substr(line.find(',') + 1));
    EXPECT_GE(p, prev);
    prev = p;
    ++rows;
  }
  EXPECT_EQ(rows, 49);
}

TEST_F(Cli, OutageValidation) {
  const auto r = run("protocol outage --n 6 --snr-db 2 --trials 20000 --validate-mc " + out_flag());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = read_json("fig6b_outage.json");
  EXPECT_TRUE(j.contains("analytic"));
  EXPECT_TRUE(j.contains("monte_carlo"));
  EXPECT_TRUE(j.contains("analytic_in_ci"));
  ASSERT_EQ(run("protocol outage --n 6 --snr-db 2 --dynamics phase-refresh --trials 2000 " + out_flag()).code, 0);
  EXPECT_FALSE(read_json("fig6b_outage.json").contains("analytic"));
}

TEST_F(Cli, SweepWithValidation) {
  const auto scen = std::string(URLLC_SAMPLES_DIR) + "/scenarios/occupy_small.json";
  const auto r = run("protocol sweep '" + scen + "' --validate-mc " + out_flag());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "fig9_sweep.csv");
  EXPECT_NE(csv.find("analytic_in_ci"), std::string::npos);
  EXPECT_NE(csv.find("wall_seconds"), std::string::npos);
  std::istringstream is(csv);
  std::string line;
  int rows = 0;
  while (std::getline(is, line))
    if (line.rfind("occupy,", 0) == 0) ++rows;
  EXPECT_EQ(rows, 8);

  std::ofstream(dir_ / "bad.json") << "{\"n\": [4],\n \"snr_db\": oops}";
  const auto bad = run("protocol sweep '" + (dir_ / "bad.json").string() + "' " + out_flag());
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos) << bad.err;
}
