#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mvlrt/cli.hpp"
#include "mvlrt/report.hpp"
#include "test_support.hpp"

using namespace mvlrt;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mvlrt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_csv(const std::string& name, const Matrix<double>& m, bool header = true) {
    const auto path = dir_ / name;
    std::ofstream os(path);
    if (header) {
      for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << "x" << j + 1;
      os << '\n';
    }
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
      os << '\n';
    }
    return path.string();
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const std::string& p) { return read_file(p); }

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_F(CliTest, TestCommandSucceeds) {
  const auto a = write_csv("a.csv", mvlrt::testing::gamma_matrix(26, 20, 1));
  const auto b = write_csv("b.csv", mvlrt::testing::gamma_matrix(36, 20, 2));
  const auto r = cli({"test", a, b, "--test", "both", "--beta1", "1.5", "--beta2", "1.5", "--json",
                      path("r.json"), "--csv", path("r.csv")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("Modified LRT"), std::string::npos);
  EXPECT_EQ(r.err.find("assuming Gaussian"), std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(path("r.json")));
  EXPECT_EQ(doc.at("reports").size(), 2u);
  EXPECT_EQ(doc.at("inputs").at(0).at("sha256"), sha256_hex(slurp(a)));
  EXPECT_EQ(doc.at("inputs").at(1).at("rows"), 36);
  EXPECT_EQ(count_lines(slurp(path("r.csv"))), 3u);
}

TEST_F(CliTest, IdenticalFilesTakeZeroMeanDifferenceBranch) {
  const auto a = write_csv("a.csv", mvlrt::testing::gamma_matrix(30, 10, 3));
  const auto b = write_csv("b.csv", mvlrt::testing::gamma_matrix(30, 10, 3));
  ASSERT_EQ(slurp(a), slurp(b));
  const auto r = cli({"test", a, b, "--json", path("r.json"), "--quiet"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("assuming Gaussian"), std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(path("r.json")));
  EXPECT_EQ(doc.at("reports").at(0).at("ml").at("t_n").get<double>(), 0.0);
}

TEST_F(CliTest, ColumnMismatchNamesBothCounts) {
  const auto a = write_csv("a.csv", mvlrt::testing::gaussian_matrix(30, 10, 4));
  const auto b = write_csv("b.csv", mvlrt::testing::gaussian_matrix(30, 12, 5));
  const auto r = cli({"test", a, b});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("10"), std::string::npos);
  EXPECT_NE(r.err.find("12"), std::string::npos);
}

TEST_F(CliTest, DimensionViolationIsAssumptionExit) {
  const auto a = write_csv("a.csv", mvlrt::testing::gaussian_matrix(101, 300, 6));
  const auto b = write_csv("b.csv", mvlrt::testing::gaussian_matrix(151, 300, 7));
  EXPECT_EQ(cli({"test", a, b}).code, kExitAssumption);
  // y1 = 1 exactly
  const auto c = write_csv("c.csv", mvlrt::testing::gaussian_matrix(11, 10, 8));
  const auto d = write_csv("d.csv", mvlrt::testing::gaussian_matrix(31, 10, 9));
  EXPECT_EQ(cli({"test", c, d}).code, kExitAssumption);
}

TEST_F(CliTest, NearUnityWarnsButSucceeds) {
  const auto a = write_csv("a.csv", mvlrt::testing::gaussian_matrix(40, 38, 10));
  const auto b = write_csv("b.csv", mvlrt::testing::gaussian_matrix(90, 38, 11));
  const auto r = cli({"test", a, b, "--quiet"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, InputErrors) {
  const auto a = write_csv("a.csv", mvlrt::testing::gaussian_matrix(30, 5, 12));
  EXPECT_EQ(cli({"test", a, path("missing.csv")}).code, kExitInput);
  EXPECT_EQ(cli({"test", a}).code, kExitInput);
  EXPECT_EQ(cli({"test", a, a, "--alpha", "1.5"}).code, kExitInput);
  EXPECT_EQ(cli({"test", a, a, "--beta1", "1", "--estimate-moments"}).code, kExitInput);
  EXPECT_EQ(cli({"bogus"}).code, kExitInput);
  EXPECT_EQ(cli({}).code, kExitInput);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST_F(CliTest, UnwritableOutputIsIoExit) {
  const auto a = write_csv("a.csv", mvlrt::testing::gaussian_matrix(30, 5, 13));
  const auto b = write_csv("b.csv", mvlrt::testing::gaussian_matrix(30, 5, 14));
  EXPECT_EQ(cli({"test", a, b, "--json", path("no/such/dir/r.json")}).code, kExitIo);
  EXPECT_EQ(cli({"nulldist", "--n1", "25", "--n2", "35", "--p", "20", "--reps", "3", "--seed", "1",
                 "--out", path("no/such/dir/z.csv")})
                .code,
            kExitIo);
  write_csv("blocker", Matrix<double>::Ones(1, 1), false);
  EXPECT_EQ(cli({"reproduce", "--table", "1", "--reps", "1", "--seed", "1", "--out",
                 path("blocker/sub")})
                .code,
            kExitIo);
}

TEST_F(CliTest, SimulateRequiresSeedAndPositiveReps) {
  const std::vector<std::string> base = {"simulate", "--n1", "25", "--n2", "35", "--p", "20"};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  EXPECT_EQ(with({"--reps", "5"}).code, kExitInput);
  EXPECT_EQ(with({"--reps", "0", "--seed", "1"}).code, kExitInput);
  EXPECT_EQ(with({"--reps", "5", "--seed", "1", "--model", "II", "--a", "3"}).code, kExitInput);
  EXPECT_EQ(with({"--reps", "5", "--seed", "1", "--model", "III"}).code, kExitInput);
  const auto ok = with({"--reps", "5", "--seed", "1"});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_EQ(count_lines(ok.out), 3u);
  EXPECT_EQ(ok.out.rfind("n1,n2,p,a,test,reps,seed,rate\n", 0), 0u);
  EXPECT_NE(ok.err.find("runtime_ms="), std::string::npos);
}

TEST_F(CliTest, SimulateIsByteIdenticalAcrossRunsAndThreads) {
  auto run = [&](const std::string& tag, const std::string& threads) {
    const auto r = cli({"simulate", "--model", "I", "--a", "10", "--n1", "25", "--n2", "35", "--p",
                        "40", "--reps", "40", "--seed", "42", "--threads", threads, "--csv",
                        path(tag + ".csv"), "--json", path(tag + ".json")});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return slurp(path(tag + ".csv")) + slurp(path(tag + ".json"));
  };
  const auto a = run("a", "1");
  EXPECT_EQ(a, run("b", "1"));
  EXPECT_EQ(a, run("c", "8"));
}

TEST_F(CliTest, ReproduceWritesTableAndSidecar) {
  const auto r = cli({"reproduce", "--table", "3", "--reps", "2", "--seed", "5", "--out", path("t3")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto csv = slurp(path("t3/table_3.csv"));
  EXPECT_EQ(count_lines(csv), 33u);  // header + 16 cells x 2 tests
  const auto side = nlohmann::json::parse(slurp(path("t3/table_3.json")));
  EXPECT_EQ(side.at("cells").size(), 16u);
  EXPECT_NE(r.err.find("[16/16]"), std::string::npos);
}

TEST_F(CliTest, NulldistLineCount) {
  const auto r = cli({"nulldist", "--n1", "25", "--n2", "35", "--p", "20", "--reps", "25", "--seed",
                      "3", "--out", path("z.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto z = slurp(path("z.csv"));
  EXPECT_EQ(count_lines(z), 26u);
  EXPECT_EQ(z.rfind("z\n", 0), 0u);
  const auto summary = nlohmann::json::parse(slurp(path("z.summary.json")));
  EXPECT_TRUE(summary.contains("sup_distance"));
  EXPECT_EQ(cli({"nulldist", "--n1", "25", "--n2", "35", "--p", "25", "--reps", "3", "--seed", "1",
                 "--out", path("y.csv")})
                .code,
            kExitAssumption);
}
