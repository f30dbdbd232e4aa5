#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twqp/io.hpp"

namespace fs = std::filesystem;
using twqp::Json;

namespace {

struct CliRun {
  int status = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("twqp_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args, const std::string& env = "") {
    const auto err_path = dir_ / "stderr.txt";
    const std::string cmd = env + " '" + std::string(TWQP_CLI_PATH) + "' " + args + " 2> '" + err_path.string() + "'";
    CliRun r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    char buf[4096];
    for (std::size_t got; (got = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, got);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.err = slurp(err_path);
    return r;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::string fixture(const std::string& name) { return std::string(TWQP_FIXTURE_DIR) + "/" + name; }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SolveTrivialInstance) {
  auto r = run("solve " + fixture("one_variable.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  auto j = Json::parse(r.out);
  EXPECT_NEAR(j["objective"].get<double>(), -1.5, 1e-12);
  EXPECT_NEAR(j["x"][0].get<double>(), 2.0, 1e-12);
  EXPECT_TRUE(j.contains("diagnostics"));
}

TEST_F(CliTest, OracleAgreesWithPruneModes) {
  ASSERT_EQ(run("gen --family banded --n 12 --w 2 --seed 4 --out " + path("inst.json")).status, 0);
  auto oracle = Json::parse(run("oracle " + path("inst.json")).out)["objective"].get<double>();
  for (const char* mode : {"none", "exact", "path"}) {
    auto r = run("solve " + path("inst.json") + " --prune " + mode);
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NEAR(Json::parse(r.out)["objective"].get<double>(), oracle, 1e-9 * (1 + std::abs(oracle))) << mode;
  }
}

TEST_F(CliTest, TinyBoundNeverBeatsOptimum) {
  ASSERT_EQ(run("gen --family banded --n 10 --w 2 --seed 9 --out " + path("inst.json")).status, 0);
  auto exact = Json::parse(run("oracle " + path("inst.json")).out)["objective"].get<double>();
  auto r = run("solve " + path("inst.json") + " --u 0.01");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_GE(Json::parse(r.out)["objective"].get<double>(), exact - 1e-9 * (1 + std::abs(exact)));
}

TEST_F(CliTest, GivenDecompositionFile) {
  ASSERT_EQ(run("gen --family lowtw --n 30 --w 4 --omega 2 --seed 2 --out " + path("i.json") + " --decomp-out " +
                path("d.json"))
                .status,
            0);
  auto r = run("solve " + path("i.json") + " --decomp " + path("d.json"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["diagnostics"]["width"].get<int>(), 2);
}

TEST_F(CliTest, MissingFileIsInputError) {
  auto r = run("solve " + path("nope.json"));
  EXPECT_EQ(r.status, 2);
  auto j = Json::parse(r.err);
  EXPECT_EQ(j["error"]["kind"], "InputError");
}

TEST_F(CliTest, UnknownOptionIsInputError) {
  EXPECT_EQ(run("solve " + fixture("one_variable.json") + " --frobnicate").status, 2);
}

TEST_F(CliTest, IndefiniteMatrixIsNumericalError) {
  auto r = run("solve " + fixture("indefinite.json"));
  EXPECT_EQ(r.status, 3);
  EXPECT_EQ(Json::parse(r.err)["error"]["kind"], "NotPositiveDefinite");
}

TEST_F(CliTest, BenchIsByteStable) {
  const std::string args = "bench --family banded --n 40,80 --w 2 --trials 2 --seed 5 --omit-timing";
  auto a = run(args);
  auto b = run(args);
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "family,n,w,trial,seed,kappa2,avg_retained,max_retained,objective");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST_F(CliTest, GenRespectsSeedEnvironment) {
  auto a = run("gen --family banded --n 20", "TWQP_SEED=7");
  auto b = run("gen --family banded --n 20 --seed 7");
  auto c = run("gen --family banded --n 20", "TWQP_SEED=8");
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(run("gen --n 5", "TWQP_SEED=abc").status, 2);
}

TEST_F(CliTest, EsocWritesOutputs) {
  auto r = run("esoc " + fixture("tiny.csv") + " --beta-grid 0.3,0.6 --lambda-grid 0.01,0.1 --workers 1 --out " +
               path("out"));
  ASSERT_EQ(r.status, 0) << r.err;
  ASSERT_TRUE(fs::exists(path("out/result.csv")));
  auto summary = Json::parse(slurp(path("out/summary.json")));
  EXPECT_TRUE(summary["test_mse"].contains("esoc"));
  EXPECT_TRUE(summary["test_mse"].contains("ses"));
  std::istringstream in(slurp(path("out/result.csv")));
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 41);
}

TEST_F(CliTest, EsocBadCsvNamesLine) {
  std::ofstream(path("bad.csv")) << "timestamp,value\na,1\nb,x\n";
  auto r = run("esoc " + path("bad.csv"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}

TEST_F(CliTest, ExportBigM) {
  auto r = run("export-bigm " + fixture("one_variable.json") + " --u 3");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("ub1: x1 - 3 z1 <= 0"), std::string::npos);
  auto t = run("export-bigm " + fixture("one_variable.json") + " --u theory");
  ASSERT_EQ(t.status, 0) << t.err;
  EXPECT_NE(t.out.find("Binaries"), std::string::npos);
}
