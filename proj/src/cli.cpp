#include "mvlrt/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "mvlrt/hn_test.hpp"
#include "mvlrt/ml_test.hpp"
#include "mvlrt/report.hpp"
#include "mvlrt/simulation.hpp"

namespace mvlrt {

namespace {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension:
    case ErrorKind::Assumption:
      return kExitAssumption;
    case ErrorKind::Io:
      return kExitIo;
    default:
      return kExitInput;
  }
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct TestArgs {
  std::string sample1;
  std::string sample2;
  double alpha = 0.05;
  double beta1 = 0.0;
  double beta2 = 0.0;
  bool estimate = false;
  bool betas_given = false;
  std::string test = "ml";
  std::string json_path;
  std::string csv_path;
  bool quiet = false;
};

struct SimulateArgs {
  std::string model = "I";
  Index n1 = 0;
  Index n2 = 0;
  Index p = 0;
  double a = 0.0;
  Index reps = 10000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::string distribution = "gamma";
  std::string tests = "both";
  unsigned threads = 0;
  std::string csv_path;
  std::string json_path;
};

struct ReproduceArgs {
  int table = 1;
  Index reps = 10000;
  std::uint64_t seed = 0;
  std::string out_dir;
  unsigned threads = 0;
};

struct NulldistArgs {
  Index n1 = 0;
  Index n2 = 0;
  Index p = 0;
  Index reps = 10000;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string summary_path;
  unsigned threads = 0;
};

int cmd_test(const TestArgs& args, std::ostream& out, std::ostream& err) {
  const std::string bytes1 = read_file(args.sample1);
  const std::string bytes2 = read_file(args.sample2);
  const auto s1 = parse_sample_csv(bytes1, "sample1");
  const auto s2 = parse_sample_csv(bytes2, "sample2");
  if (s1.dim() != s2.dim()) {
    std::ostringstream os;
    os << "sample files have different column counts: " << s1.dim() << " (sample1) vs "
       << s2.dim() << " (sample2)";
    throw Error(ErrorKind::Input, os.str());
  }

  TestConfig cfg;
  cfg.alpha = args.alpha;
  if (args.estimate) {
    cfg.moment_mode = EstimateMoments{};
  } else {
    cfg.moment_mode = KnownMoments{args.beta1, args.beta2};
    if (!args.betas_given && args.test != "hn") {
      err << "warning: no --beta1/--beta2 or --estimate-moments given; assuming Gaussian "
             "fourth cumulants (0, 0)\n";
    }
  }

  std::vector<TestReport<double>> reports;
  if (args.test == "ml" || args.test == "both") {
    reports.push_back(run_ml_test(s1, s2, cfg));
  }
  if (args.test == "hn" || args.test == "both") {
    reports.push_back(run_hn_test(s1, s2, cfg));
  }

  for (const auto& r : reports) {
    for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  }
  if (!args.quiet) {
    for (const auto& r : reports) write_summary(out, r);
  }

  if (!args.json_path.empty()) {
    const std::vector<InputDigest> inputs = {
        {"sample1", args.sample1, sha256_hex(bytes1), s1.size(), s1.dim()},
        {"sample2", args.sample2, sha256_hex(bytes2), s2.size(), s2.dim()}};
    write_text_file(args.json_path, test_document(reports, inputs).dump(2) + "\n");
  }
  if (!args.csv_path.empty()) {
    std::ostringstream csv;
    csv << "test,statistic,z_score,p_value,reject,alpha\n";
    for (const auto& r : reports) {
      csv << to_string(r.test) << ',' << format_double(r.statistic) << ','
          << format_double(r.z_score) << ',' << format_double(r.p_value) << ','
          << (r.reject ? 1 : 0) << ',' << format_double(r.alpha) << '\n';
    }
    write_text_file(args.csv_path, csv.str());
  }
  return kExitOk;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  sim::SimulationModel model;
  model.kind = args.model == "II" ? sim::ModelKind::II : sim::ModelKind::I;
  if (model.kind == sim::ModelKind::II && args.a != 0.0) {
    throw Error(ErrorKind::Input, "--a applies to Model I only");
  }
  model.a = args.a;
  model.n1 = args.n1;
  model.n2 = args.n2;
  model.p = args.p;
  model.distribution =
      args.distribution == "gaussian" ? sim::Distribution::Gaussian : sim::Distribution::Gamma;

  sim::TestSelection tests{args.tests != "hn", args.tests != "ml"};
  TestConfig cfg;
  cfg.alpha = args.alpha;
  // Replications need a valid calibration; fail fast before spinning workers.
  if (tests.ml) dimension_ratios<double>(model.n1, model.n2, model.p);

  sim::RunOptions options;
  options.threads = args.threads == 0 ? default_threads() : args.threads;
  const auto result = sim::run_replications(model, args.reps, args.seed, cfg, tests, options);

  std::ostringstream csv;
  write_table_header(csv);
  write_scenario_rows(csv, model, result);
  if (!args.csv_path.empty()) write_text_file(args.csv_path, csv.str());
  if (!args.json_path.empty()) {
    write_text_file(args.json_path, scenario_json(model, result, cfg.alpha).dump(2) + "\n");
  }
  if (args.csv_path.empty() && args.json_path.empty()) out << csv.str();
  err << "runtime_ms=" << result.runtime_ms << '\n';
  return kExitOk;
}

int cmd_reproduce(const ReproduceArgs& args, std::ostream& /*out*/, std::ostream& err) {
  const sim::Table table =
      args.table == 1 ? sim::Table::T1 : args.table == 2 ? sim::Table::T2 : sim::Table::T3;
  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec || !fs::is_directory(args.out_dir)) {
    throw Error(ErrorKind::Io, "cannot create output directory '" + args.out_dir + "'");
  }
  sim::RunOptions options;
  options.threads = args.threads == 0 ? default_threads() : args.threads;
  const auto rows = sim::reproduce_table(
      table, args.reps, args.seed, options,
      [&err](std::size_t done, std::size_t total, const sim::TableRow& row) {
        err << "[" << done << "/" << total << "] (" << row.cell.n1 << ", " << row.cell.n2 << ", "
            << row.cell.p << ") a=" << format_double(row.cell.a)
            << " ml=" << format_double(*row.result.rate_ml)
            << " hn=" << format_double(*row.result.rate_hn) << " (" << row.result.runtime_ms
            << " ms)\n";
      });

  const std::string stem = "table_" + std::to_string(args.table);
  std::ostringstream csv;
  write_table_csv(csv, rows);
  write_text_file(fs::path(args.out_dir) / (stem + ".csv"), csv.str());
  write_text_file(fs::path(args.out_dir) / (stem + ".json"),
                  table_sidecar_json(table, args.reps, args.seed, rows).dump(2) + "\n");
  return kExitOk;
}

int cmd_nulldist(const NulldistArgs& args, std::ostream& /*out*/, std::ostream& err) {
  dimension_ratios<double>(args.n1, args.n2, args.p);
  sim::RunOptions options;
  options.threads = args.threads == 0 ? default_threads() : args.threads;
  const auto dist = sim::null_histogram(args.n1, args.n2, args.p, args.reps, args.seed, options);

  std::ostringstream csv;
  csv << "z\n";
  for (double z : dist.z_scores) csv << format_double(z) << '\n';
  write_text_file(args.out_path, csv.str());

  fs::path summary = args.summary_path;
  if (summary.empty()) {
    summary = fs::path(args.out_path);
    summary.replace_extension(".summary.json");
  }
  write_text_file(summary,
                  null_summary_json(args.n1, args.n2, args.p, args.reps, args.seed, dist).dump(2) +
                      "\n");
  err << "mean=" << format_double(dist.mean) << " variance=" << format_double(dist.variance)
      << " sup_distance=" << format_double(dist.sup_distance) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simultaneous two-sample test of mean vectors and covariance matrices"};
  app.name(kToolName);
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "Test two samples stored as CSV files");
  test->add_option("sample1", test_args.sample1, "CSV file, rows are observations")->required();
  test->add_option("sample2", test_args.sample2, "CSV file, rows are observations")->required();
  test->add_option("--alpha", test_args.alpha, "Significance level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  auto* beta1 = test->add_option("--beta1", test_args.beta1, "Known fourth cumulant of sample 1")
                    ->check(CLI::Range(-2.0, std::numeric_limits<double>::max()));
  auto* beta2 = test->add_option("--beta2", test_args.beta2, "Known fourth cumulant of sample 2")
                    ->check(CLI::Range(-2.0, std::numeric_limits<double>::max()));
  test->add_flag("--estimate-moments", test_args.estimate, "Estimate fourth cumulants from the data")
      ->excludes(beta1)
      ->excludes(beta2);
  test->add_option("--test", test_args.test, "Which test to run")
      ->check(CLI::IsMember({"ml", "hn", "both"}))
      ->capture_default_str();
  test->add_option("--json", test_args.json_path, "Write the JSON report here");
  test->add_option("--csv", test_args.csv_path, "Write a one-row-per-test CSV here");
  test->add_flag("--quiet", test_args.quiet, "Suppress the text summary");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo size or power for one scenario");
  simulate->add_option("--model", sim_args.model, "Simulation model")
      ->check(CLI::IsMember({"I", "II"}))
      ->capture_default_str();
  simulate->add_option("--n1", sim_args.n1, "Degrees of freedom of sample 1")->required();
  simulate->add_option("--n2", sim_args.n2, "Degrees of freedom of sample 2")->required();
  simulate->add_option("--p", sim_args.p, "Dimension")->required();
  simulate->add_option("--a", sim_args.a, "Model I covariance inflation")->capture_default_str();
  simulate->add_option("--reps", sim_args.reps, "Replications")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--seed", sim_args.seed, "Base seed")->required();
  simulate->add_option("--alpha", sim_args.alpha, "Significance level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  simulate->add_option("--distribution", sim_args.distribution, "Entry distribution")
      ->check(CLI::IsMember({"gamma", "gaussian"}))
      ->capture_default_str();
  simulate->add_option("--tests", sim_args.tests, "Tests to run")
      ->check(CLI::IsMember({"ml", "hn", "both"}))
      ->capture_default_str();
  simulate->add_option("--threads", sim_args.threads, "Worker cap (0 = all cores)");
  simulate->add_option("--csv", sim_args.csv_path, "Write the CSV rows here instead of stdout");
  simulate->add_option("--json", sim_args.json_path, "Write a JSON result here");

  ReproduceArgs rep_args;
  auto* reproduce = app.add_subcommand("reproduce", "Regenerate a size or power table");
  reproduce->add_option("--table", rep_args.table, "Table number")
      ->check(CLI::IsMember({1, 2, 3}))
      ->required();
  reproduce->add_option("--reps", rep_args.reps, "Replications per cell")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  reproduce->add_option("--seed", rep_args.seed, "Base seed")->required();
  reproduce->add_option("--out", rep_args.out_dir, "Output directory")->required();
  reproduce->add_option("--threads", rep_args.threads, "Worker cap (0 = all cores)");

  NulldistArgs null_args;
  auto* nulldist = app.add_subcommand("nulldist", "Standardized ML scores under the null");
  nulldist->add_option("--n1", null_args.n1, "Degrees of freedom of sample 1")->required();
  nulldist->add_option("--n2", null_args.n2, "Degrees of freedom of sample 2")->required();
  nulldist->add_option("--p", null_args.p, "Dimension")->required();
  nulldist->add_option("--reps", null_args.reps, "Replications")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  nulldist->add_option("--seed", null_args.seed, "Base seed")->required();
  nulldist->add_option("--out", null_args.out_path, "CSV file of z scores")->required();
  nulldist->add_option("--summary", null_args.summary_path,
                       "Summary JSON (default: <out>.summary.json)");
  nulldist->add_option("--threads", null_args.threads, "Worker cap (0 = all cores)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  test_args.betas_given = beta1->count() + beta2->count() > 0;
  try {
    if (*test) return cmd_test(test_args, out, err);
    if (*simulate) return cmd_simulate(sim_args, out, err);
    if (*reproduce) return cmd_reproduce(rep_args, out, err);
    if (*nulldist) return cmd_nulldist(null_args, out, err);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace mvlrt
