#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aptsim/analytics.hpp"
#include "aptsim/cpt_bloch.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code{-1};
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("aptsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunResult run(const std::string& args) {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string(APTSIM_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  static std::vector<std::vector<std::string>> csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) {
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cells;
      std::istringstream ls(line);
      for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
      if (line.back() == ',') cells.push_back("");
      rows.push_back(cells);
    }
    return rows;
  }

  fs::path dir_;
};

double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

TEST_F(Cli, EvolveMatchesLibraryBitForBit) {
  const auto r = run("evolve --j 0.06 --gamma 0.004 --tau-max 100 --steps 200");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 202u);
  EXPECT_EQ(rows[0][1], "rho00");
  const aptsim::SystemParams p{0.06, 0.004};
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double t = num(rows[k][0]);
    EXPECT_EQ(t, 100.0 * static_cast<double>(k - 1) / 200);
    const auto rho = aptsim::rho_closed(p, t);
    EXPECT_EQ(num(rows[k][1]), rho.rho00);
    EXPECT_EQ(num(rows[k][2]), rho.rho11);
    EXPECT_EQ(num(rows[k][3]), rho.rho01.real());
    EXPECT_EQ(num(rows[k][4]), rho.rho01.imag());
    EXPECT_EQ(num(rows[k][6]), aptsim::overlap_p(p, t));
  }
}

TEST_F(Cli, ZeroDurationGivesOneRow) {
  const auto r = run("evolve --j 0.06 --gamma 0.004 --tau-max 0");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][1], "1");
}

TEST_F(Cli, ConfigFileSuppliesMissingOptions) {
  const auto cfg = write("c.json", R"({"j": 0.06, "gamma": 0.004, "tau_max": 10, "steps": 4})");
  const auto a = run("evolve --config " + cfg.string());
  const auto b = run("evolve --j 0.06 --gamma 0.004 --tau-max 10 --steps 4");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto c = run("evolve --config " + cfg.string() + " --steps 2");
  EXPECT_EQ(csv(c.out).size(), 4u);  // command line wins
}

TEST_F(Cli, MalformedConfigIsConfigError) {
  const auto cfg = write("bad.json", "{\"j\": 0.06,");
  const auto r = run("evolve --config " + cfg.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_EQ(run("evolve --config " + write("u.json", R"({"jj": 1})").string()).code, 2);
  EXPECT_EQ(run("evolve --config " + (dir_ / "missing.json").string()).code, 2);
}

TEST_F(Cli, InvalidParametersAreConfigErrors) {
  EXPECT_EQ(run("evolve --j -1 --gamma 0.1").code, 2);
  EXPECT_EQ(run("evolve --gamma 0.1").code, 2);
  EXPECT_EQ(run("evolve --j 0.1 --gamma 0.1 --format xml").code, 2);
  EXPECT_EQ(run("evolve --j 0.1 --gamma 0.1 --no-such-flag").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST_F(Cli, UnwritableOutputIsIoError) {
  const auto r = run("evolve --j 0.1 --gamma 0.1 --output " + (dir_ / "no" / "such" / "f.csv").string());
  EXPECT_EQ(r.code, 3);
}

TEST_F(Cli, EigensweepZeroGammaRejected) {
  const auto r = run("eigensweep --gamma 0");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("normalized eigenvalues undefined"), std::string::npos);
}

TEST_F(Cli, EigensweepExactMatchesTheory) {
  const auto r = run("eigensweep --gamma 0.05 --exact");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 20u);
  EXPECT_EQ(rows[0][0], "ratio");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_NEAR(num(rows[k][1]), num(rows[k][5]), 1e-10);
    EXPECT_NEAR(num(rows[k][2]), num(rows[k][6]), 1e-10);
  }
  EXPECT_EQ(rows[9][0], "1");
  EXPECT_EQ(rows[9][2], "-1");
}

TEST_F(Cli, EigensweepDeterministicFiles) {
  const std::string args = "eigensweep --gamma 0.05 --repeats 3 --shots 1000 --seed 7 --output ";
  ASSERT_EQ(run(args + (dir_ / "a.csv").string()).code, 0);
  ASSERT_EQ(run(args + (dir_ / "b.csv").string()).code, 0);
  const auto a = slurp(dir_ / "a.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b.csv"));
  const auto rows = csv(a);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_FALSE(rows[k][3].empty());
}

TEST_F(Cli, EigensweepJsonSchema) {
  const auto r = run("eigensweep --gamma 0.05 --ratios 0.5 1.5 --format json --seed 9");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"params", "tau_us", "estimates", "seeds", "noise_model"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["estimates"].size(), 2u);
  EXPECT_EQ(j["seeds"]["per_point"][1], 9u ^ 1u);
}

TEST_F(Cli, TrajectoryRegimeGuard) {
  const auto r = run("trajectory --j 0.06 --gamma 0.12");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("r = Gamma/J < 1"), std::string::npos);
  const auto ok = run("trajectory --j 0.06 --gamma 0.12 --allow-continuation");
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.err.find("non-physical"), std::string::npos);
}

TEST_F(Cli, TrajectoryConstantTheta) {
  const auto r = run("trajectory --j 0.06 --gamma 0.03 --tau 50");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv(r.out);
  ASSERT_EQ(rows.size(), 202u);
  const double theta0 = num(rows[1][8]);
  for (std::size_t k = 2; k < rows.size(); ++k) EXPECT_NEAR(num(rows[k][8]), theta0, 1e-8);
}

TEST_F(Cli, TrajectoryEigenstateAtZeroGammaStaysPut) {
  const auto r = run("trajectory --j 0.06 --gamma 0 --initial eps-plus --tau 30 --steps 5");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv(r.out);
  for (std::size_t k = 2; k < rows.size(); ++k) {
    for (std::size_t c = 4; c <= 6; ++c) EXPECT_NEAR(num(rows[k][c]), num(rows[1][c]), 1e-12);
  }
}

TEST_F(Cli, TomographyJson) {
  const auto r = run("tomography --ratio 0.15 --tau 10 --shots 10000 --seed 1 --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j["fidelity"].get<double>(), 0.99);
  const auto exact = nlohmann::json::parse(run("tomography --exact --format json").out);
  EXPECT_NEAR(exact["fidelity"].get<double>(), 1.0, 1e-12);
}

TEST_F(Cli, TomographyDegenerateTrace) {
  EXPECT_EQ(run("tomography --j 1 --gamma 5 --tau 200 --exact").code, 4);
}

TEST_F(Cli, CalibrateReportsFit) {
  const auto r = run("calibrate --kind dissipation --gamma 0.05 --exact --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["fit"]["gamma"].get<double>(), 0.05, 1e-9);
  const auto rabi = nlohmann::json::parse(run("calibrate --kind rabi --j 0.065 --exact --format json").out);
  EXPECT_NEAR(rabi["fit"]["j"].get<double>(), 0.065, 1e-9);
  EXPECT_EQ(run("calibrate --kind rabi --gamma 0.05").code, 2);
}

TEST_F(Cli, ReproducePresetsCarryProvenance) {
  for (const char* preset : {"fig2a", "fig2b", "fig2c", "fig2d", "fig3", "cpt-sphere"}) {
    const auto r = run(std::string("reproduce ") + preset);
    ASSERT_EQ(r.code, 0) << preset << ": " << r.err;
    EXPECT_EQ(r.out.rfind("# preset " + std::string(preset), 0), 0u) << preset;
    EXPECT_GT(csv(r.out).size(), 2u);
  }
  EXPECT_EQ(run("reproduce fig9").code, 2);
}

TEST_F(Cli, HelpListsUnits) {
  for (const char* cmd : {"evolve", "eigensweep", "trajectory", "tomography", "calibrate", "reproduce"}) {
    const auto r = run(std::string(cmd) + " --help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("--shots"), std::string::npos) << cmd;
    if (std::string(cmd) != "reproduce") EXPECT_NE(r.out.find("μs"), std::string::npos) << cmd;
  }
}

}  // namespace
