#ifndef MVLRT_SIMULATION_HPP
#define MVLRT_SIMULATION_HPP

// Monte Carlo harness: the two simulation models, seeded data generation and
// a replication engine whose results do not depend on the worker count.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mvlrt/errors.hpp"
#include "mvlrt/ml_test.hpp"
#include "mvlrt/spectral.hpp"

namespace mvlrt::sim {

enum class ModelKind { I, II };
enum class Distribution { Gamma, Gaussian };

const char* to_string(ModelKind kind);
const char* to_string(Distribution dist);

/// Model I:  mu1 = mu2 = 0, Sigma2 = diag(p^2, 1, ..., 1), Sigma1 = (1 + a/n1) Sigma2.
/// Model II: Sigma1 = Sigma2 = diag(p^2, 1, ..., 1), mu1 = (1, p, ..., p),
///           mu2 = (1, p + 1, ..., p + 1).
/// n1, n2 are degrees of freedom; n_t + 1 observations are drawn per sample.
struct SimulationModel {
  ModelKind kind = ModelKind::I;
  double a = 0.0;
  Index n1 = 0;
  Index n2 = 0;
  Index p = 0;
  Distribution distribution = Distribution::Gamma;

  /// Fourth cumulant of the standardized entries: 6/4 for Gamma(4, rate 2), 0 for Gaussian.
  double beta_true() const { return distribution == Distribution::Gamma ? 1.5 : 0.0; }
  void validate() const;
};

/// Counter-based seed for stream `index` derived from `seed`.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

/// i.i.d. G - 2 with G ~ Gamma(shape 4, rate 2): mean 0, variance 1, fourth cumulant 1.5.
class StandardizedGamma {
 public:
  explicit StandardizedGamma(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return dist_(engine_) - 2.0; }

 private:
  std::mt19937_64 engine_;
  std::gamma_distribution<double> dist_{4.0, 0.5};
};

std::pair<SampleSet<double>, SampleSet<double>> generate_pair(const SimulationModel& model,
                                                              std::uint64_t rep_seed);

struct TestSelection {
  bool ml = true;
  bool hn = true;
};

struct RunOptions {
  unsigned threads = 1;
  bool keep_z_scores = false;
};

struct ScenarioResult {
  std::optional<double> rate_ml;
  std::optional<double> rate_hn;
  Index rejections_ml = 0;
  Index rejections_hn = 0;
  std::vector<double> z_scores;    // ML scores in replication order, when kept
  std::vector<double> t_values;    // T_n per replication, when kept
  Index replications = 0;
  std::uint64_t seed = 0;
  std::int64_t runtime_ms = 0;
};

/// Replication r uses data from split_seed(seed, r). The result is identical
/// for any thread count.
ScenarioResult run_replications(const SimulationModel& model, Index reps, std::uint64_t seed,
                                const TestConfig& cfg, TestSelection tests,
                                const RunOptions& options = {});

enum class Table { T1, T2, T3 };

struct TableCell {
  ModelKind model = ModelKind::I;
  Index n1 = 0;
  Index n2 = 0;
  Index p = 0;
  double a = 0.0;
  std::string regime;  // e.g. "y1>1,y2<1"
};

/// Cells in reference order: regime blocks, sizes, then a.
std::vector<TableCell> table_grid(Table table);

struct TableRow {
  TableCell cell;
  std::uint64_t seed = 0;
  ScenarioResult result;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total, const TableRow&)>;

std::vector<TableRow> reproduce_table(Table table, Index reps, std::uint64_t seed,
                                      const RunOptions& options = {},
                                      const ProgressFn& progress = {});

struct NullDistribution {
  std::vector<double> z_scores;
  double mean = 0.0;
  double variance = 0.0;
  double sup_distance = 0.0;
};

NullDistribution null_histogram(Index n1, Index n2, Index p, Index reps, std::uint64_t seed,
                                const RunOptions& options = {});

/// sup_x |F_n(x) - Phi(x)| of the empirical CDF of `values`.
double ks_distance_to_normal(std::vector<double> values);

}  // namespace mvlrt::sim

#endif  // MVLRT_SIMULATION_HPP
