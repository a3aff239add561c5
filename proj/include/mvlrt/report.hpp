#ifndef MVLRT_REPORT_HPP
#define MVLRT_REPORT_HPP

// CSV ingestion and JSON / CSV / text rendering of results.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvlrt/ml_test.hpp"
#include "mvlrt/simulation.hpp"

namespace mvlrt {

inline constexpr const char* kToolName = "mvlrt";
inline constexpr const char* kToolVersion = "1.0.0";

/// Fixed column order of every scenario table.
inline constexpr const char* kTableHeader = "n1,n2,p,a,test,reps,seed,rate";

struct InputDigest {
  std::string label;
  std::string path;
  std::string sha256;
  Index rows = 0;
  Index columns = 0;
};

/// Rows are observations, columns are variables, comma separated. A first
/// line containing any non-numeric field is treated as a header.
SampleSet<double> read_sample_csv(const std::filesystem::path& path, const std::string& label);

/// Same rules, from an in-memory document.
SampleSet<double> parse_sample_csv(const std::string& text, const std::string& label);

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

nlohmann::json to_json(const TestReport<double>& report);
TestReport<double> report_from_json(const nlohmann::json& j);

nlohmann::json test_document(const std::vector<TestReport<double>>& reports,
                             const std::vector<InputDigest>& inputs);

void write_summary(std::ostream& os, const TestReport<double>& report);

void write_table_header(std::ostream& os);
void write_table_row(std::ostream& os, Index n1, Index n2, Index p, const std::string& a,
                     TestKind test, Index reps, std::uint64_t seed, double rate);
void write_scenario_rows(std::ostream& os, const sim::SimulationModel& model,
                         const sim::ScenarioResult& result);
void write_table_csv(std::ostream& os, const std::vector<sim::TableRow>& rows);

nlohmann::json scenario_json(const sim::SimulationModel& model, const sim::ScenarioResult& result,
                             double alpha);
nlohmann::json table_sidecar_json(sim::Table table, Index reps, std::uint64_t seed,
                                  const std::vector<sim::TableRow>& rows);
nlohmann::json null_summary_json(Index n1, Index n2, Index p, Index reps, std::uint64_t seed,
                                 const sim::NullDistribution& dist);

}  // namespace mvlrt

#endif  // MVLRT_REPORT_HPP
