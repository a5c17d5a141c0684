// psofed command line: run experiments, analyze convergence, merge result
// tables, and dump raw data streams.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "psofed/analysis.hpp"
#include "psofed/data_gen.hpp"
#include "psofed/experiment.hpp"
#include "psofed/rng.hpp"

namespace {

void add_scenario_flags(CLI::App* cmd, psofed::ExperimentConfig& cfg, std::string& algorithm,
                        std::string& scheme) {
  cmd->add_option("--algorithm", algorithm, "online-fed | pso-fed")
      ->check(CLI::IsMember({"online-fed", "pso-fed"}));
  cmd->add_option("--scheme", scheme, "coordinated | uncoordinated")
      ->check(CLI::IsMember({"coordinated", "uncoordinated"}));
  cmd->add_option("-K,--clients", cfg.clients, "number of clients");
  cmd->add_option("-D,--feature-dim", cfg.feature_dim, "regression-space dimension");
  cmd->add_option("-L,--window", cfg.window, "raw input taps per sample");
  cmd->add_option("-M,--shared", cfg.shared, "coordinates exchanged per round");
  cmd->add_option("--shift", cfg.shift, "mask rotation per round (default: same as --shared)");
  cmd->add_option("--participants", cfg.participants, "clients selected per round");
  cmd->add_option("--step", cfg.step, "SGD learning rate");
  cmd->add_option("-N,--rounds", cfg.rounds, "global iterations");
  cmd->add_option("--runs", cfg.runs, "independent experiments to average");
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--bandwidth", cfg.bandwidth, "kernel bandwidth of the feature map");
  cmd->add_option("--test-per-client", cfg.test_per_client, "held-out examples per client");
  cmd->add_flag("--noisy-test", cfg.noisy_test, "add observation noise to test targets");
  cmd->add_option("--workers", cfg.workers, "concurrent runs (0 = hardware)");
}

int cmd_run(const psofed::ExperimentConfig& cfg, const std::string& out_path) {
  psofed::ExperimentResult result = psofed::run_experiment(cfg);
  psofed::write_csv(result, out_path);
  psofed::write_metadata(result, out_path + ".meta.json");

  const auto& last = result.rounds.back();
  std::printf("%s: %d rounds x %d runs (%d excluded)\n", cfg.label().c_str(), cfg.rounds,
              cfg.runs, result.excluded_runs);
  std::printf("  initial MSE %.4f dB, final MSE %.4f dB\n",
              10.0 * std::log10(result.initial_mse), last.mse_db);
  std::printf("  cumulative traffic: %llu up + %llu down scalars\n",
              static_cast<unsigned long long>(last.scalars_up),
              static_cast<unsigned long long>(last.scalars_down));
  std::printf("  wrote %s and %s.meta.json\n", out_path.c_str(), out_path.c_str());
  if (result.excluded_runs > 0)
    std::fprintf(stderr, "warning: %d run(s) diverged and were excluded\n", result.excluded_runs);
  return 0;
}

int cmd_analyze(const psofed::AnalysisConfig& cfg, double step_factor, double step_override,
                int trials) {
  std::vector<Eigen::MatrixXd> r_blocks;
  {
    // Correlation blocks double as the bound input and the recursion matrix.
    psofed::AnalysisConfig probe = cfg;
    psofed::RffMapper mapper(probe.window, probe.feature_dim, probe.bandwidth,
                             psofed::mix_seed(probe.seed, 11));
    psofed::ParamRanges ranges = probe.input_ranges;
    ranges.noise_var = {probe.noise_var, probe.noise_var};
    auto params =
        psofed::draw_client_params(probe.clients, psofed::mix_seed(probe.seed, 12), ranges);
    for (int k = 0; k < probe.clients; ++k) {
      psofed::ClientDataSource src(params[k], probe.window, psofed::mix_seed(probe.seed, 100 + k));
      r_blocks.push_back(psofed::estimate_correlation(src, mapper, probe.correlation_samples));
    }
  }
  const double bound = psofed::step_size_bound(r_blocks);
  const double step = step_override > 0.0 ? step_override : step_factor * bound;

  std::printf("step-size bound:       %.6f\n", bound);
  std::printf("step under test:       %.6f (%.3f x bound)\n", step, step / bound);

  auto [ea, eb] = psofed::expected_matrices(cfg.scheme, cfg.feature_dim, cfg.shared, cfg.shift,
                                            cfg.clients, cfg.participants);
  const Eigen::MatrixXd corr = psofed::extended_correlation(r_blocks);
  const Eigen::MatrixXd recursion =
      eb * (Eigen::MatrixXd::Identity(corr.rows(), corr.cols()) - step * corr) * ea;
  std::printf("expected recursion:    spectral radius %.6f, 2-norm %.6f\n",
              psofed::spectral_radius(recursion), psofed::matrix_two_norm(recursion));

  const psofed::ConvergenceReport report = psofed::verify_mean_convergence(cfg, step, trials);
  const char* verdict = report.verdict == psofed::ConvergenceVerdict::kConverged ? "converged"
                        : report.verdict == psofed::ConvergenceVerdict::kDiverged ? "diverged"
                                                                                  : "indeterminate";
  std::printf("empirical mean error:  %.3e -> %.3e (ratio %.3e)\n", report.initial_norm,
              report.final_norm, report.ratio);
  std::printf("verdict:               %s (%d trials, %d rounds, %d diverged)\n", verdict,
              report.trials, report.rounds, report.diverged_trials);
  return 0;
}

int cmd_compare(const std::vector<std::string>& inputs, const std::string& out_path) {
  std::vector<psofed::ResultTable> tables;
  tables.reserve(inputs.size());
  for (const auto& path : inputs) tables.push_back(psofed::load_csv(path));
  const std::string merged = psofed::merge_tables(tables);
  if (out_path.empty() || out_path == "-") {
    std::cout << merged;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    out << merged;
    std::printf("wrote %s (%zu tables)\n", out_path.c_str(), tables.size());
  }
  return 0;
}

int cmd_dump(int clients, int rounds, int window, std::uint64_t seed, const std::string& out_path) {
  auto params = psofed::draw_client_params(clients, psofed::mix_seed(seed, 1));
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  out << "client,n,x,y\n";
  out.precision(12);
  for (int k = 0; k < clients; ++k) {
    psofed::ClientDataSource src(params[k], window, psofed::mix_seed(psofed::mix_seed(seed, 5), k));
    for (int n = 1; n <= rounds; ++n) {
      psofed::Sample s = src.next_sample(psofed::nonlinear_target);
      out << k << ',' << n << ',' << s.input(0) << ',' << s.target << '\n';
    }
  }
  std::printf("wrote %s (%d clients x %d rounds)\n", out_path.c_str(), clients, rounds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulator for partial-sharing online federated kernel regression"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "run an experiment and write per-round metrics");
  psofed::ExperimentConfig run_cfg;
  std::string preset, run_algorithm, run_scheme, run_out = "results.csv";
  run->add_option("--preset", preset, "start from a named profile: paper | desk")
      ->check(CLI::IsMember({"paper", "desk"}));
  add_scenario_flags(run, run_cfg, run_algorithm, run_scheme);
  run->add_option("-o,--out", run_out, "output CSV path");

  // --- analyze ---
  auto* analyze = app.add_subcommand("analyze", "desk-scale mean-convergence analysis");
  psofed::AnalysisConfig an_cfg;
  std::string an_scheme = "coordinated";
  double step_factor = 0.5, step_override = 0.0;
  int trials = 200;
  analyze->add_option("-K,--clients", an_cfg.clients, "number of clients");
  analyze->add_option("-D,--feature-dim", an_cfg.feature_dim, "regression-space dimension");
  analyze->add_option("-L,--window", an_cfg.window, "raw input taps per sample");
  analyze->add_option("-M,--shared", an_cfg.shared, "coordinates exchanged per round");
  analyze->add_option("--shift", an_cfg.shift, "mask rotation per round");
  analyze->add_option("--participants", an_cfg.participants, "clients selected per round");
  analyze->add_option("--scheme", an_scheme, "coordinated | uncoordinated")
      ->check(CLI::IsMember({"coordinated", "uncoordinated"}));
  analyze->add_option("--bandwidth", an_cfg.bandwidth, "kernel bandwidth");
  analyze->add_option("--noise-var", an_cfg.noise_var, "observation noise variance");
  analyze->add_option("-N,--rounds", an_cfg.rounds, "rounds per trial");
  analyze->add_option("--trials", trials, "independent trials to average");
  analyze->add_option("--correlation-samples", an_cfg.correlation_samples,
                      "samples per client for correlation estimates");
  analyze->add_option("--seed", an_cfg.seed, "master seed");
  analyze->add_option("--step-factor", step_factor, "step as a fraction of the bound");
  analyze->add_option("--step", step_override, "absolute step (overrides --step-factor)");

  // --- compare ---
  auto* compare = app.add_subcommand("compare", "merge result CSVs into one wide table");
  std::vector<std::string> compare_inputs;
  std::string compare_out;
  compare->add_option("inputs", compare_inputs, "result CSV files")->required()->expected(-1);
  compare->add_option("-o,--out", compare_out, "merged CSV path (default: stdout)");

  // --- dump-data ---
  auto* dump = app.add_subcommand("dump-data", "write raw generated streams as CSV");
  int dump_clients = 5, dump_rounds = 1000, dump_window = 4;
  std::uint64_t dump_seed = 1;
  std::string dump_out = "streams.csv";
  dump->add_option("-K,--clients", dump_clients, "number of clients");
  dump->add_option("-N,--rounds", dump_rounds, "samples per client");
  dump->add_option("-L,--window", dump_window, "raw input taps per sample");
  dump->add_option("--seed", dump_seed, "master seed");
  dump->add_option("-o,--out", dump_out, "output CSV path");

  // Apply preset before parsing so explicit flags win.
  for (int i = 1; i < argc - 1; ++i) {
    if (std::string(argv[i]) == "--preset") {
      run_cfg = std::string(argv[i + 1]) == "desk" ? psofed::desk_preset() : psofed::paper_preset();
      break;
    }
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!run_algorithm.empty()) run_cfg.algorithm = psofed::parse_algorithm(run_algorithm);
      if (!run_scheme.empty()) run_cfg.scheme = psofed::parse_scheme(run_scheme);
      return cmd_run(run_cfg, run_out);
    }
    if (analyze->parsed()) {
      an_cfg.scheme = psofed::parse_scheme(an_scheme);
      return cmd_analyze(an_cfg, step_factor, step_override, trials);
    }
    if (compare->parsed()) return cmd_compare(compare_inputs, compare_out);
    if (dump->parsed()) return cmd_dump(dump_clients, dump_rounds, dump_window, dump_seed, dump_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
