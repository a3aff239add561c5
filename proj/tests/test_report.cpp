#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mvlrt/hn_test.hpp"
#include "mvlrt/report.hpp"
#include "test_support.hpp"

using namespace mvlrt;

namespace {

ErrorKind parse_error_kind(const std::string& text) {
  try {
    parse_sample_csv(text, "s");
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST(Csv, PlainNumbers) {
  const auto s = parse_sample_csv("1,2,3\n4,5,6\n", "s");
  ASSERT_EQ(s.size(), 2);
  ASSERT_EQ(s.dim(), 3);
  EXPECT_EQ(s.observations(1, 2), 6.0);
  EXPECT_EQ(s.label, "s");
}

TEST(Csv, HeaderBomCrlfAndBlankLines) {
  const auto s = parse_sample_csv("\xEF\xBB\xBFx1,x2\r\n 1.5 , -2e-3\r\n\r\n+3,4\r\n", "s");
  ASSERT_EQ(s.size(), 2);
  EXPECT_EQ(s.observations(0, 0), 1.5);
  EXPECT_EQ(s.observations(0, 1), -2e-3);
  EXPECT_EQ(s.observations(1, 0), 3.0);
}

TEST(Csv, NoTrailingNewline) {
  const auto s = parse_sample_csv("1,2\n3,4", "s");
  EXPECT_EQ(s.size(), 2);
}

TEST(Csv, Errors) {
  EXPECT_EQ(parse_error_kind("1,2\n3\n"), ErrorKind::Input);
  EXPECT_EQ(parse_error_kind("a,b\n1,2\n3,x\n"), ErrorKind::Input);
  EXPECT_EQ(parse_error_kind("a,b\n"), ErrorKind::Input);
  EXPECT_EQ(parse_error_kind(""), ErrorKind::Input);
  EXPECT_EQ(parse_error_kind("1,,2\n"), ErrorKind::Input);
  try {
    parse_sample_csv("1,2\n3,4,5\n", "left");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("left"), std::string::npos);
  }
}

TEST(Csv, MissingFile) {
  EXPECT_THROW(read_sample_csv("/nonexistent/dir/x.csv", "s"), Error);
}

TEST(Digest, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.05), "0.05");
  EXPECT_EQ(format_double(0.0639), "0.0639");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(20.0), "20");
  std::mt19937_64 engine(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(engine) * std::pow(10.0, (i % 40) - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Json, ReportRoundTrip) {
  const auto x1 = mvlrt::testing::gamma_matrix(26, 20, 1);
  const auto x2 = mvlrt::testing::gamma_matrix(36, 20, 2);
  TestConfig cfg;
  cfg.moment_mode = EstimateMoments{};
  for (const auto& report : {run_ml_test(mvlrt::testing::sample(x1), mvlrt::testing::sample(x2), cfg),
                             run_hn_test(mvlrt::testing::sample(x1), mvlrt::testing::sample(x2), cfg)}) {
    const auto j = to_json(report);
    const auto text = j.dump();
    const auto back = report_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.statistic, report.statistic);
    EXPECT_EQ(back.z_score, report.z_score);
    EXPECT_EQ(back.p_value, report.p_value);
    EXPECT_EQ(back.warnings, report.warnings);
    EXPECT_EQ(back.ml.has_value(), report.ml.has_value());
    if (report.ml) {
      EXPECT_EQ(back.ml->centering.nu_n2, report.ml->centering.nu_n2);
      EXPECT_EQ(back.ml->ratios.c1, report.ml->ratios.c1);
      EXPECT_EQ(back.ml->betas_used.source, MomentSource::Estimated);
    }
    if (report.hn) {
      EXPECT_EQ(back.hn->sigma20_2, report.hn->sigma20_2);
    }
  }
}

TEST(Json, DocumentCarriesVersionAndDigests) {
  InputDigest d{"sample1", "a.csv", sha256_hex("x"), 10, 3};
  const auto doc = test_document({}, {d});
  EXPECT_EQ(doc.at("tool"), kToolName);
  EXPECT_EQ(doc.at("version"), kToolVersion);
  EXPECT_EQ(doc.at("inputs").at(0).at("rows"), 10);
  EXPECT_TRUE(doc.at("reports").empty());
}

TEST(Table, RowFormatAndModelII) {
  std::ostringstream os;
  write_table_header(os);
  sim::SimulationModel m{sim::ModelKind::II, 0.0, 25, 35, 40, sim::Distribution::Gamma};
  sim::ScenarioResult r;
  r.rate_ml = 0.5;
  r.rate_hn = 0.1234;
  r.replications = 100;
  r.seed = 9;
  write_scenario_rows(os, m, r);
  EXPECT_EQ(os.str(),
            "n1,n2,p,a,test,reps,seed,rate\n"
            "25,35,40,NA,ml,100,9,0.5\n"
            "25,35,40,NA,hn,100,9,0.1234\n");
}

TEST(Summary, MentionsDecision) {
  const auto x1 = mvlrt::testing::gamma_matrix(26, 20, 1);
  const auto x2 = mvlrt::testing::gamma_matrix(36, 20, 2);
  std::ostringstream os;
  write_summary(os, run_ml_test(mvlrt::testing::sample(x1), mvlrt::testing::sample(x2), TestConfig{}));
  EXPECT_NE(os.str().find("decision"), std::string::npos);
  EXPECT_NE(os.str().find("eigenvalues"), std::string::npos);
}
