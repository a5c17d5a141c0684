#include "psofed/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "psofed/errors.hpp"
#include "psofed/rff.hpp"
#include "psofed/rng.hpp"

namespace psofed {

namespace {

// Substream tags for deriving per-run component seeds.
enum : std::uint64_t {
  kTagParams = 1,
  kTagMapper = 2,
  kTagTest = 3,
  kTagMasks = 4,
  kTagSources = 5,
  kTagSelector = 6,
};

std::uint64_t run_seed(const ExperimentConfig& cfg, int run_index) {
  return mix_seed(cfg.seed, 0x52554eull + static_cast<std::uint64_t>(run_index));
}

}  // namespace

std::string ExperimentConfig::label() const {
  if (algorithm == Algorithm::kOnlineFed) return "online-fed";
  return std::string("pso-fed-M") + std::to_string(shared) + "-" + scheme_name(scheme);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.clients < 1) throw std::invalid_argument("config: clients must be >= 1");
  if (cfg.feature_dim < 1) throw std::invalid_argument("config: feature_dim must be >= 1");
  if (cfg.window < 4) throw std::invalid_argument("config: window must be >= 4");
  if (cfg.shared < 0 || cfg.shared > cfg.feature_dim)
    throw std::invalid_argument("config: shared must be in [0, feature_dim]");
  if (cfg.shift < 0 || cfg.shift > cfg.feature_dim)
    throw std::invalid_argument("config: shift must be in [0, feature_dim]");
  if (cfg.participants < 1 || cfg.participants > cfg.clients)
    throw std::invalid_argument("config: participants must be in [1, clients]");
  if (cfg.rounds < 1) throw std::invalid_argument("config: rounds must be >= 1");
  if (cfg.runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (!(cfg.step > 0.0)) throw std::invalid_argument("config: step must be > 0");
  if (!(cfg.bandwidth > 0.0)) throw std::invalid_argument("config: bandwidth must be > 0");
  if (cfg.test_per_client < 1)
    throw std::invalid_argument("config: test_per_client must be >= 1");
  if (cfg.workers < 0) throw std::invalid_argument("config: workers must be >= 0");
}

ExperimentConfig desk_preset() {
  ExperimentConfig cfg;
  cfg.clients = 20;
  cfg.feature_dim = 64;
  cfg.shared = 13;
  cfg.participants = 1;
  cfg.rounds = 1000;
  cfg.runs = 50;
  return cfg;
}

ExperimentConfig paper_preset() {
  return ExperimentConfig{};  // defaults are the full-scale profile
}

const char* algorithm_name(Algorithm algorithm) {
  return algorithm == Algorithm::kOnlineFed ? "online-fed" : "pso-fed";
}

const char* scheme_name(MaskScheme scheme) {
  return scheme == MaskScheme::kCoordinated ? "coordinated" : "uncoordinated";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "online-fed") return Algorithm::kOnlineFed;
  if (name == "pso-fed") return Algorithm::kPsoFed;
  throw std::invalid_argument("unknown algorithm: " + name);
}

MaskScheme parse_scheme(const std::string& name) {
  if (name == "coordinated") return MaskScheme::kCoordinated;
  if (name == "uncoordinated") return MaskScheme::kUncoordinated;
  throw std::invalid_argument("unknown scheme: " + name);
}

double eval_mse(const Eigen::VectorXd& model, const TestSet& test) {
  if (test.features.cols() != model.size())
    throw dimension_error("eval_mse: model length does not match test features");
  if (test.features.rows() != test.targets.size())
    throw dimension_error("eval_mse: test set rows/targets mismatch");
  return (test.targets - test.features * model).squaredNorm() /
         static_cast<double>(test.targets.size());
}

RunTrace run_single(const ExperimentConfig& cfg, int run_index) {
  validate(cfg);
  const std::uint64_t rs = run_seed(cfg, run_index);
  const int tau = cfg.effective_shift();

  const auto params = draw_client_params(cfg.clients, mix_seed(rs, kTagParams), cfg.ranges);
  const RffMapper mapper(cfg.window, cfg.feature_dim, cfg.bandwidth, mix_seed(rs, kTagMapper));
  const TestSet test = build_test_set(params, cfg.window, mapper, cfg.test_per_client,
                                      !cfg.noisy_test, mix_seed(rs, kTagTest));

  auto masks = cfg.scheme == MaskScheme::kCoordinated
                   ? coordinated_init(cfg.feature_dim, cfg.shared, tau, cfg.clients)
                   : uncoordinated_init(cfg.feature_dim, cfg.shared, tau, cfg.clients,
                                        mix_seed(rs, kTagMasks));

  ServerState server{Eigen::VectorXd::Zero(cfg.feature_dim), 0, mix_seed(rs, kTagSelector)};
  std::vector<ClientState> states;
  std::vector<ClientDataSource> sources;
  states.reserve(cfg.clients);
  sources.reserve(cfg.clients);
  for (int k = 0; k < cfg.clients; ++k) {
    states.push_back({k, Eigen::VectorXd::Zero(cfg.feature_dim), masks[k], cfg.step, 0.0});
    sources.emplace_back(params[k], cfg.window, mix_seed(mix_seed(rs, kTagSources), k));
  }

  RunTrace trace;
  trace.initial_mse = eval_mse(server.model, test);
  trace.mse.reserve(cfg.rounds);
  trace.up.reserve(cfg.rounds);
  trace.down.reserve(cfg.rounds);

  std::uint64_t up = 0, down = 0;
  std::vector<FeatureSample> samples(cfg.clients);
  for (int n = 1; n <= cfg.rounds; ++n) {
    for (int k = 0; k < cfg.clients; ++k) {
      Sample s = sources[k].next_sample(nonlinear_target);
      samples[k].features = mapper.map(s.input);
      samples[k].target = s.target;
    }
    try {
      const RoundResult rr = run_round(server, states, samples, cfg.algorithm, cfg.participants);
      up += rr.scalars_up;
      down += rr.scalars_down;
    } catch (const divergence_error& e) {
      trace.diverged = true;
      trace.diverged_round = e.round();
      return trace;
    }
    trace.mse.push_back(eval_mse(server.model, test));
    trace.up.push_back(up);
    trace.down.push_back(down);
  }
  return trace;
}

ExperimentResult aggregate_runs(const ExperimentConfig& cfg, const std::vector<RunTrace>& traces) {
  ExperimentResult result;
  result.config = cfg;

  const RunTrace* reference = nullptr;
  int survivors = 0;
  for (const auto& t : traces) {
    if (t.diverged) {
      result.excluded_runs += 1;
      continue;
    }
    if (!reference) reference = &t;
    survivors += 1;
  }
  if (!reference)
    throw std::runtime_error("all runs diverged; nothing to average (step size too large?)");

  const int rounds = static_cast<int>(reference->mse.size());
  result.rounds.resize(rounds);
  for (int n = 0; n < rounds; ++n) {
    MetricsRecord& rec = result.rounds[n];
    rec.round = n + 1;
    // Counters do not depend on the data, only on the config; take them from
    // the first surviving run.
    rec.scalars_up = reference->up[n];
    rec.scalars_down = reference->down[n];
  }

  for (const auto& t : traces) {
    if (t.diverged) continue;
    if (static_cast<int>(t.mse.size()) != rounds)
      throw std::logic_error("aggregate_runs: traces have different lengths");
    for (int n = 0; n < rounds; ++n) result.rounds[n].mse += t.mse[n];
    result.initial_mse += t.initial_mse;
  }
  result.initial_mse /= survivors;
  for (auto& rec : result.rounds) {
    rec.mse /= survivors;
    rec.mse_db = 10.0 * std::log10(rec.mse);
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.runs));

  std::vector<RunTrace> traces(cfg.runs);
  if (workers <= 1) {
    for (int r = 0; r < cfg.runs; ++r) traces[r] = run_single(cfg, r);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
      for (int r = next.fetch_add(1); r < cfg.runs; r = next.fetch_add(1)) {
        try {
          traces[r] = run_single(cfg, r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return aggregate_runs(cfg, traces);
}

void write_csv(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "round,mse_db,scalars_up,scalars_down\n";
  out.precision(12);
  for (const auto& rec : result.rounds)
    out << rec.round << ',' << rec.mse_db << ',' << rec.scalars_up << ',' << rec.scalars_down
        << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_metadata(const ExperimentResult& result, const std::string& path) {
  const ExperimentConfig& cfg = result.config;
  nlohmann::json meta{
      {"label", cfg.label()},
      {"algorithm", algorithm_name(cfg.algorithm)},
      {"scheme", scheme_name(cfg.scheme)},
      {"clients", cfg.clients},
      {"feature_dim", cfg.feature_dim},
      {"window", cfg.window},
      {"shared", cfg.shared},
      {"shift", cfg.effective_shift()},
      {"participants", cfg.participants},
      {"rounds", cfg.rounds},
      {"runs", cfg.runs},
      {"step", cfg.step},
      {"bandwidth", cfg.bandwidth},
      {"test_per_client", cfg.test_per_client},
      {"noisy_test", cfg.noisy_test},
      {"seed", cfg.seed},
      {"param_ranges",
       {{"ar_coeff", {cfg.ranges.ar_coeff.lo, cfg.ranges.ar_coeff.hi}},
        {"innovation_mean", {cfg.ranges.innovation_mean.lo, cfg.ranges.innovation_mean.hi}},
        {"innovation_var", {cfg.ranges.innovation_var.lo, cfg.ranges.innovation_var.hi}},
        {"noise_var", {cfg.ranges.noise_var.lo, cfg.ranges.noise_var.hi}}}},
      {"excluded_runs", result.excluded_runs},
      {"initial_mse", result.initial_mse},
      {"initial_mse_db", 10.0 * std::log10(result.initial_mse)},
  };
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << meta.dump(2) << '\n';
}

ResultTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  ResultTable table;

  std::ifstream meta_in(path + ".meta.json");
  if (meta_in) {
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    table.label = meta.value("label", path);
  } else {
    auto slash = path.find_last_of('/');
    std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
    table.label = stem;
  }

  std::string line;
  if (!std::getline(in, line) || line != "round,mse_db,scalars_up,scalars_down")
    throw std::runtime_error("unexpected CSV header in " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    MetricsRecord rec;
    char c1, c2, c3;
    if (!(row >> rec.round >> c1 >> rec.mse_db >> c2 >> rec.scalars_up >> c3 >>
          rec.scalars_down) ||
        c1 != ',' || c2 != ',' || c3 != ',')
      throw std::runtime_error("malformed CSV row in " + path + ": " + line);
    rec.mse = std::pow(10.0, rec.mse_db / 10.0);
    table.rounds.push_back(rec);
  }
  return table;
}

std::string merge_tables(const std::vector<ResultTable>& tables) {
  if (tables.empty()) throw std::invalid_argument("merge_tables: no tables");
  const std::size_t rounds = tables.front().rounds.size();
  for (const auto& t : tables) {
    if (t.rounds.size() != rounds)
      throw std::invalid_argument("merge_tables: tables cover different round counts");
    for (std::size_t n = 0; n < rounds; ++n)
      if (t.rounds[n].round != tables.front().rounds[n].round)
        throw std::invalid_argument("merge_tables: round indices disagree");
  }

  std::ostringstream out;
  out.precision(12);
  out << "round";
  for (const auto& t : tables)
    out << ",mse_db[" << t.label << "],scalars_up[" << t.label << "],scalars_down[" << t.label
        << "]";
  out << '\n';
  for (std::size_t n = 0; n < rounds; ++n) {
    out << tables.front().rounds[n].round;
    for (const auto& t : tables)
      out << ',' << t.rounds[n].mse_db << ',' << t.rounds[n].scalars_up << ','
          << t.rounds[n].scalars_down;
    out << '\n';
  }
  return out.str();
}

}  // namespace psofed
