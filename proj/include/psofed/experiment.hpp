#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "psofed/data_gen.hpp"
#include "psofed/fed.hpp"
#include "psofed/selection.hpp"

namespace psofed {

/// Full description of one experiment: algorithm, sharing scheme, scenario
/// sizes, and averaging setup. Every run derives its own seeds from `seed`
/// and the run index, so results are reproducible and runs can execute
/// concurrently.
struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kPsoFed;
  MaskScheme scheme = MaskScheme::kCoordinated;
  int clients = 100;        // K
  int feature_dim = 200;    // regression-space dimension
  int window = 4;           // raw input taps per sample
  int shared = 40;          // coordinates exchanged per round (mask cardinality)
  int shift = 0;            // mask rotation per round; 0 means "use `shared`"
  int participants = 4;     // clients selected per round
  int rounds = 2000;
  int runs = 500;           // independent experiments averaged
  double step = 0.75;
  double bandwidth = 1.0;
  int test_per_client = 20;
  bool noisy_test = false;  // add observation noise to test targets
  std::uint64_t seed = 1;
  ParamRanges ranges;
  int workers = 0;          // concurrent runs; 0 means hardware default

  int effective_shift() const { return shift > 0 ? shift : (shared > 0 ? shared : 1); }
  /// Column/label tag, e.g. "pso-fed-M40-coordinated" or "online-fed".
  std::string label() const;
};

void validate(const ExperimentConfig& config);

/// CI-sized profile: K=20, D=64, 50 runs of 1000 rounds.
ExperimentConfig desk_preset();
/// Full-scale profile: K=100, D=200, 500 runs, step 0.75, 4 participants.
ExperimentConfig paper_preset();

const char* algorithm_name(Algorithm algorithm);
const char* scheme_name(MaskScheme scheme);
Algorithm parse_algorithm(const std::string& name);
MaskScheme parse_scheme(const std::string& name);

/// Mean squared residual of `model` over the test set.
double eval_mse(const Eigen::VectorXd& model, const TestSet& test);

/// Per-round averaged metrics. Communication counters are cumulative scalar
/// counts and identical across runs of one config.
struct MetricsRecord {
  int round = 0;
  double mse = 0.0;     // linear, averaged across runs
  double mse_db = 0.0;  // 10 log10(mse), computed after averaging
  std::uint64_t scalars_up = 0;
  std::uint64_t scalars_down = 0;
};

/// Raw trajectory of a single run.
struct RunTrace {
  std::vector<double> mse;            // per round
  std::vector<std::uint64_t> up;      // cumulative
  std::vector<std::uint64_t> down;    // cumulative
  double initial_mse = 0.0;           // zero model on this run's test set
  bool diverged = false;
  long diverged_round = -1;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<MetricsRecord> rounds;  // index 0 <-> round 1
  double initial_mse = 0.0;           // averaged across surviving runs
  int excluded_runs = 0;
};

/// One deterministic run (fresh parameters, streams, mapper, masks).
/// A diverging run is reported via the trace, not an exception.
RunTrace run_single(const ExperimentConfig& config, int run_index);

/// Averages surviving runs (linear MSE first, then dB). Throws if every run
/// diverged.
ExperimentResult aggregate_runs(const ExperimentConfig& config,
                                const std::vector<RunTrace>& traces);

/// Runs `config.runs` independent runs (concurrently up to `workers`) and
/// aggregates them.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// CSV with header round,mse_db,scalars_up,scalars_down; round starts at 1.
void write_csv(const ExperimentResult& result, const std::string& path);
/// JSON sidecar with the full config, seed, excluded-run count and the
/// zero-model baseline MSE.
void write_metadata(const ExperimentResult& result, const std::string& path);

struct ResultTable {
  std::string label;
  std::vector<MetricsRecord> rounds;
};

/// Reads a CSV produced by write_csv. The label comes from the sidecar
/// `<path>.meta.json` when present, otherwise from the file name.
ResultTable load_csv(const std::string& path);

/// Wide CSV: one shared round column, then one column group per table.
/// Tables must cover the same rounds.
std::string merge_tables(const std::vector<ResultTable>& tables);

}  // namespace psofed
