#include "mvlrt/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "mvlrt/hn_test.hpp"
#include "mvlrt/normal.hpp"

namespace mvlrt::sim {

const char* to_string(ModelKind kind) { return kind == ModelKind::I ? "I" : "II"; }

const char* to_string(Distribution dist) {
  return dist == Distribution::Gamma ? "gamma" : "gaussian";
}

void SimulationModel::validate() const {
  if (n1 < 2 || n2 < 2 || p < 1) {
    std::ostringstream os;
    os << "invalid model sizes (n1, n2, p) = (" << n1 << ", " << n2 << ", " << p << ")";
    throw Error(ErrorKind::Input, os.str());
  }
  if (kind == ModelKind::I && !(1.0 + a / static_cast<double>(n1) > 0.0)) {
    throw Error(ErrorKind::Input, "Model I needs 1 + a/n1 > 0");
  }
  if (!std::isfinite(a)) {
    throw Error(ErrorKind::Input, "a must be finite");
  }
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename Draw>
void fill(Matrix<double>& m, Draw& draw) {
  // Row-major fill order is part of the reproducibility contract.
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = draw();
  }
}

struct RepOutcome {
  double z_ml = 0.0;
  double t_n = 0.0;
  bool reject_ml = false;
  bool reject_hn = false;
};

}  // namespace

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) + (index + 1) * 0x9e3779b97f4a7c15ULL);
}

std::pair<SampleSet<double>, SampleSet<double>> generate_pair(const SimulationModel& model,
                                                              std::uint64_t rep_seed) {
  model.validate();
  const Index p = model.p;
  SampleSet<double> s1{Matrix<double>(model.n1 + 1, p), "sample1"};
  SampleSet<double> s2{Matrix<double>(model.n2 + 1, p), "sample2"};
  if (model.distribution == Distribution::Gamma) {
    StandardizedGamma draw(rep_seed);
    fill(s1.observations, draw);
    fill(s2.observations, draw);
  } else {
    std::mt19937_64 engine(rep_seed);
    std::normal_distribution<double> normal;
    auto draw = [&] { return normal(engine); };
    fill(s1.observations, draw);
    fill(s2.observations, draw);
  }

  // Sigma^{1/2} = diag(p, 1, ..., 1)
  Vector<double> sd = Vector<double>::Ones(p);
  sd(0) = static_cast<double>(p);
  if (model.kind == ModelKind::I) {
    const Vector<double> sd1 = sd * std::sqrt(1.0 + model.a / static_cast<double>(model.n1));
    s1.observations = s1.observations * sd1.asDiagonal();
    s2.observations = s2.observations * sd.asDiagonal();
  } else {
    Vector<double> mu1 = Vector<double>::Constant(p, static_cast<double>(p));
    Vector<double> mu2 = Vector<double>::Constant(p, static_cast<double>(p) + 1.0);
    mu1(0) = 1.0;
    mu2(0) = 1.0;
    s1.observations = (s1.observations * sd.asDiagonal()).rowwise() + mu1.transpose();
    s2.observations = (s2.observations * sd.asDiagonal()).rowwise() + mu2.transpose();
  }
  return {std::move(s1), std::move(s2)};
}

ScenarioResult run_replications(const SimulationModel& model, Index reps, std::uint64_t seed,
                                const TestConfig& cfg, TestSelection tests,
                                const RunOptions& options) {
  model.validate();
  cfg.validate();
  if (reps < 1) throw Error(ErrorKind::Input, "reps must be at least 1");
  if (!tests.ml && !tests.hn) throw Error(ErrorKind::Input, "no test selected");

  TestConfig rep_cfg = cfg;
  if (std::holds_alternative<KnownMoments>(rep_cfg.moment_mode)) {
    rep_cfg.moment_mode = KnownMoments{model.beta_true(), model.beta_true()};
  }
  rep_cfg.warn_near_one = false;

  const auto start = std::chrono::steady_clock::now();
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));
  std::atomic<Index> next{0};
  std::atomic<bool> stop{false};
  std::mutex failure_mutex;
  Index failed_index = reps;
  std::string failure_message;
  ErrorKind failure_kind = ErrorKind::Internal;

  auto worker = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const Index r = next.fetch_add(1);
      if (r >= reps) return;
      const std::uint64_t rep_seed = split_seed(seed, static_cast<std::uint64_t>(r));
      try {
        const auto [s1, s2] = generate_pair(model, rep_seed);
        RepOutcome& out = outcomes[static_cast<std::size_t>(r)];
        if (tests.ml) {
          const auto report = run_ml_test(s1, s2, rep_cfg);
          out.z_ml = report.z_score;
          out.t_n = report.ml->t_n;
          out.reject_ml = report.reject;
        }
        if (tests.hn) {
          out.reject_hn = run_hn_test(s1, s2, rep_cfg).reject;
        }
      } catch (const Error& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (r < failed_index) {
          failed_index = r;
          failure_message = e.what();
          failure_kind = e.kind();
        }
        stop.store(true);
      }
    }
  };

  const unsigned threads =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(reps)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  if (failed_index < reps) {
    std::ostringstream os;
    os << "replication " << failed_index << " (rep_seed "
       << split_seed(seed, static_cast<std::uint64_t>(failed_index)) << ") failed: " << failure_message;
    throw Error(failure_kind, os.str());
  }

  ScenarioResult result;
  result.replications = reps;
  result.seed = seed;
  for (const auto& o : outcomes) {
    result.rejections_ml += o.reject_ml ? 1 : 0;
    result.rejections_hn += o.reject_hn ? 1 : 0;
  }
  const double denom = static_cast<double>(reps);
  if (tests.ml) result.rate_ml = static_cast<double>(result.rejections_ml) / denom;
  if (tests.hn) result.rate_hn = static_cast<double>(result.rejections_hn) / denom;
  if (options.keep_z_scores && tests.ml) {
    result.z_scores.reserve(outcomes.size());
    result.t_values.reserve(outcomes.size());
    for (const auto& o : outcomes) {
      result.z_scores.push_back(o.z_ml);
      result.t_values.push_back(o.t_n);
    }
  }
  result.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return result;
}

std::vector<TableCell> table_grid(Table table) {
  struct Block {
    const char* regime;
    Index sizes[4][3];
  };
  static const Block blocks[4] = {
      {"y1>1,y2>1", {{25, 35, 40}, {50, 70, 80}, {100, 140, 160}, {200, 280, 320}}},
      {"y1>1,y2<1", {{25, 35, 30}, {50, 70, 60}, {100, 140, 120}, {200, 280, 240}}},
      {"y1<1,y2>1", {{35, 25, 30}, {70, 50, 60}, {140, 100, 120}, {280, 200, 240}}},
      {"y1<1,y2<1", {{25, 35, 20}, {50, 70, 40}, {100, 140, 80}, {200, 280, 160}}},
  };
  std::vector<TableCell> cells;
  for (int b = 0; b < 4; ++b) {
    for (const auto& s : blocks[b].sizes) {
      TableCell cell;
      cell.n1 = s[0];
      cell.n2 = s[1];
      cell.p = s[2];
      cell.regime = blocks[b].regime;
      switch (table) {
        case Table::T1:
          cells.push_back(cell);
          break;
        case Table::T2: {
          // The both-below-one block uses a larger alternative grid.
          const double base = b == 3 ? 20.0 : 5.0;
          for (int k = 1; k <= 4; ++k) {
            cell.a = base * k;
            cells.push_back(cell);
          }
          break;
        }
        case Table::T3:
          cell.model = ModelKind::II;
          cells.push_back(cell);
          break;
      }
    }
  }
  return cells;
}

std::vector<TableRow> reproduce_table(Table table, Index reps, std::uint64_t seed,
                                      const RunOptions& options, const ProgressFn& progress) {
  const auto cells = table_grid(table);
  std::vector<TableRow> rows;
  rows.reserve(cells.size());
  TestConfig cfg;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    SimulationModel model{cell.model, cell.a, cell.n1, cell.n2, cell.p, Distribution::Gamma};
    TableRow row{cell, split_seed(seed, i), {}};
    try {
      row.result = run_replications(model, reps, row.seed, cfg, {}, options);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "cell (" << cell.n1 << ", " << cell.n2 << ", " << cell.p << ", a = " << cell.a << ")";
      rethrow_with_context(e, os.str());
    }
    rows.push_back(std::move(row));
    if (progress) progress(rows.size(), cells.size(), rows.back());
  }
  return rows;
}

double ks_distance_to_normal(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = normal_cdf(values[i]);
    sup = std::max({sup, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return sup;
}

NullDistribution null_histogram(Index n1, Index n2, Index p, Index reps, std::uint64_t seed,
                                const RunOptions& options) {
  SimulationModel model{ModelKind::I, 0.0, n1, n2, p, Distribution::Gamma};
  RunOptions opts = options;
  opts.keep_z_scores = true;
  auto result = run_replications(model, reps, seed, TestConfig{}, {true, false}, opts);

  NullDistribution out;
  out.z_scores = std::move(result.z_scores);
  const double n = static_cast<double>(out.z_scores.size());
  double sum = 0.0;
  for (double z : out.z_scores) sum += z;
  out.mean = sum / n;
  double ss = 0.0;
  for (double z : out.z_scores) ss += (z - out.mean) * (z - out.mean);
  out.variance = n > 1 ? ss / (n - 1.0) : 0.0;
  out.sup_distance = ks_distance_to_normal(out.z_scores);
  return out;
}

}  // namespace mvlrt::sim
