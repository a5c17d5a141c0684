#include "psofed/analysis.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "psofed/errors.hpp"
#include "psofed/fed.hpp"
#include "psofed/rng.hpp"

namespace psofed {

namespace {

int checked_extended_dim(int clients, int dim) {
  const long total = static_cast<long>(clients + 1) * dim;
  if (total > kMaxExtendedDim)
    throw std::invalid_argument(
        "extended matrices are desk-scale verification tools; (clients+1)*dim must be <= " +
        std::to_string(kMaxExtendedDim));
  return static_cast<int>(total);
}

void check_mask_set(const std::vector<SelectionMask>& masks,
                    const std::vector<bool>& participation) {
  if (masks.empty()) throw std::invalid_argument("extended matrices: no client masks");
  if (participation.size() != masks.size())
    throw dimension_error("extended matrices: participation size must match mask count");
  for (const auto& m : masks)
    if (m.dim() != masks.front().dim())
      throw dimension_error("extended matrices: masks must share one dimension");
}

}  // namespace

Eigen::MatrixXd build_extended_A(const std::vector<SelectionMask>& masks,
                                 const std::vector<bool>& participation) {
  check_mask_set(masks, participation);
  const int clients = static_cast<int>(masks.size());
  const int dim = masks.front().dim();
  const int total = checked_extended_dim(clients, dim);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(total, total);
  a.topLeftCorner(dim, dim).setIdentity();
  for (int k = 0; k < clients; ++k) {
    const int base = (k + 1) * dim;
    for (int i = 0; i < dim; ++i) {
      const bool shared = participation[k] && masks[k].contains(i);
      if (shared) a(base + i, i) = 1.0;       // coordinate adopted from the server
      a(base + i, base + i) = shared ? 0.0 : 1.0;  // otherwise kept locally
    }
  }
  return a;
}

Eigen::MatrixXd build_extended_B(const std::vector<SelectionMask>& masks,
                                 const std::vector<bool>& participation, int participant_count) {
  check_mask_set(masks, participation);
  if (participant_count < 1)
    throw std::invalid_argument("build_extended_B: participant_count must be >= 1");
  const int clients = static_cast<int>(masks.size());
  const int dim = masks.front().dim();
  const int total = checked_extended_dim(clients, dim);
  const double weight = 1.0 / participant_count;

  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(total, total);
  for (int i = 0; i < dim; ++i) {
    double pulled = 0.0;
    for (int k = 0; k < clients; ++k) {
      if (!participation[k] || !masks[k].contains(i)) continue;
      b(i, (k + 1) * dim + i) = weight;
      pulled += weight;
    }
    b(i, i) = 1.0 - pulled;  // the server keeps what nobody shared
  }
  return b;
}

Eigen::MatrixXd extended_correlation(const std::vector<Eigen::MatrixXd>& r_blocks) {
  if (r_blocks.empty()) throw std::invalid_argument("extended_correlation: no blocks");
  const int dim = static_cast<int>(r_blocks.front().rows());
  for (const auto& r : r_blocks)
    if (r.rows() != dim || r.cols() != dim)
      throw dimension_error("extended_correlation: blocks must be square and equally sized");
  const int clients = static_cast<int>(r_blocks.size());
  const int total = checked_extended_dim(clients, dim);

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(total, total);
  for (int k = 0; k < clients; ++k)
    out.block((k + 1) * dim, (k + 1) * dim, dim, dim) = r_blocks[k];
  return out;
}

double largest_eigenvalue(const Eigen::MatrixXd& sym, double rel_tol) {
  if (sym.rows() != sym.cols()) throw dimension_error("largest_eigenvalue: matrix must be square");
  if (sym.rows() == 0) throw std::invalid_argument("largest_eigenvalue: empty matrix");
  if (sym.lpNorm<Eigen::Infinity>() == 0.0) return 0.0;

  std::mt19937_64 rng(0x9e1ull);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(sym.rows());
  for (int i = 0; i < v.size(); ++i) v(i) = dist(rng);
  v.normalize();

  double prev = 0.0;
  constexpr int kMaxIters = 100000;
  for (int it = 0; it < kMaxIters; ++it) {
    Eigen::VectorXd w = sym * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;  // started in the null space
    v = w / norm;
    const double lambda = v.dot(sym * v);
    if (it > 0 && std::abs(lambda - prev) <= rel_tol * std::max(std::abs(lambda), 1e-300))
      return lambda;
    prev = lambda;
  }
  return prev;
}

double step_size_bound(const std::vector<Eigen::MatrixXd>& r_blocks) {
  if (r_blocks.empty()) throw std::invalid_argument("step_size_bound: no correlation blocks");
  double max_eig = 0.0;
  for (const auto& r : r_blocks) max_eig = std::max(max_eig, largest_eigenvalue(r));
  if (max_eig <= 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 / max_eig;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> expected_matrices(MaskScheme /*scheme*/, int dim,
                                                              int shared, int shift, int clients,
                                                              int participant_count) {
  if (dim < 1) throw std::invalid_argument("expected_matrices: dim must be >= 1");
  if (shared < 0 || shared > dim)
    throw std::invalid_argument("expected_matrices: shared must be in [0, dim]");
  if (shift < 1 || shift > dim)
    throw std::invalid_argument("expected_matrices: shift must be in [1, dim]");
  if (clients < 1) throw std::invalid_argument("expected_matrices: clients must be >= 1");
  if (participant_count < 1 || participant_count > clients)
    throw std::invalid_argument("expected_matrices: participant_count must be in [1, clients]");
  const int total = checked_extended_dim(clients, dim);

  // P(selected) * P(coordinate shared), independent by assumption.
  const double participate = static_cast<double>(participant_count) / clients;
  const double share = static_cast<double>(shared) / dim;
  const double adopt = participate * share;

  Eigen::MatrixXd ea = Eigen::MatrixXd::Zero(total, total);
  ea.topLeftCorner(dim, dim).setIdentity();
  for (int k = 0; k < clients; ++k) {
    const int base = (k + 1) * dim;
    for (int i = 0; i < dim; ++i) {
      ea(base + i, i) = adopt;
      ea(base + i, base + i) = 1.0 - adopt;
    }
  }

  Eigen::MatrixXd eb = Eigen::MatrixXd::Identity(total, total);
  const double pull = share / clients;  // E[(a_k/|selected|) s_k,i]
  for (int i = 0; i < dim; ++i) {
    for (int k = 0; k < clients; ++k) eb(i, (k + 1) * dim + i) = pull;
    eb(i, i) = 1.0 - share;
  }
  return {std::move(ea), std::move(eb)};
}

Eigen::VectorXd mean_recursion_step(const Eigen::MatrixXd& expected_a,
                                    const Eigen::MatrixXd& expected_b,
                                    const Eigen::MatrixXd& extended_corr, double step,
                                    const Eigen::VectorXd& err) {
  const auto n = err.size();
  if (expected_a.rows() != n || expected_a.cols() != n || expected_b.rows() != n ||
      expected_b.cols() != n || extended_corr.rows() != n || extended_corr.cols() != n)
    throw dimension_error("mean_recursion_step: inconsistent dimensions");
  Eigen::VectorXd blended = expected_a * err;
  blended -= step * (extended_corr * blended);
  return expected_b * blended;
}

Eigen::MatrixXd estimate_correlation(ClientDataSource& source, const RffMapper& mapper,
                                     int samples) {
  if (samples < 1) throw std::invalid_argument("estimate_correlation: samples must be >= 1");
  const int dim = mapper.feature_dim();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXd z = mapper.map(source.advance());
    acc.selfadjointView<Eigen::Lower>().rankUpdate(z);
  }
  acc /= static_cast<double>(samples);
  return acc.selfadjointView<Eigen::Lower>();
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw dimension_error("spectral_radius: matrix must be square");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double matrix_two_norm(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

namespace {

struct Scenario {
  RffMapper mapper;
  std::vector<ClientParams> params;
  Eigen::VectorXd w_star;
};

// Shared setup: frozen mapper, client input parameters, and a unit-norm
// target drawn inside the excited span (w* proportional to R_bar g).
Scenario build_scenario(const AnalysisConfig& cfg, std::vector<Eigen::MatrixXd>* r_blocks_out) {
  if (cfg.clients < 1 || cfg.feature_dim < 1 || cfg.window < 4)
    throw std::invalid_argument("analysis config: clients/feature_dim/window out of range");
  checked_extended_dim(cfg.clients, cfg.feature_dim);

  RffMapper mapper(cfg.window, cfg.feature_dim, cfg.bandwidth, mix_seed(cfg.seed, 11));
  ParamRanges ranges = cfg.input_ranges;
  ranges.noise_var = {cfg.noise_var, cfg.noise_var};
  std::vector<ClientParams> params = draw_client_params(cfg.clients, mix_seed(cfg.seed, 12), ranges);

  Eigen::MatrixXd r_mean = Eigen::MatrixXd::Zero(cfg.feature_dim, cfg.feature_dim);
  for (int k = 0; k < cfg.clients; ++k) {
    ClientDataSource src(params[k], cfg.window, mix_seed(cfg.seed, 100 + k));
    Eigen::MatrixXd r = estimate_correlation(src, mapper, cfg.correlation_samples);
    r_mean += r;
    if (r_blocks_out) r_blocks_out->push_back(std::move(r));
  }
  r_mean /= static_cast<double>(cfg.clients);

  std::mt19937_64 rng(mix_seed(cfg.seed, 13));
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd g(cfg.feature_dim);
  for (int i = 0; i < g.size(); ++i) g(i) = dist(rng);
  Eigen::VectorXd w_star = r_mean * g;
  const double norm = w_star.norm();
  if (norm > 0.0) w_star /= norm;

  return {std::move(mapper), std::move(params), std::move(w_star)};
}

}  // namespace

double step_size_bound_for(const AnalysisConfig& config) {
  std::vector<Eigen::MatrixXd> r_blocks;
  build_scenario(config, &r_blocks);
  return step_size_bound(r_blocks);
}

ConvergenceReport verify_mean_convergence(const AnalysisConfig& cfg, double step, int trials) {
  if (trials < 1) throw std::invalid_argument("verify_mean_convergence: trials must be >= 1");
  if (cfg.rounds < 1) throw std::invalid_argument("verify_mean_convergence: rounds must be >= 1");
  if (step < 0.0) throw std::invalid_argument("verify_mean_convergence: step must be >= 0");

  const Scenario scenario = build_scenario(cfg, nullptr);
  const int dim = cfg.feature_dim;
  const int clients = cfg.clients;
  const int ext = (clients + 1) * dim;

  ConvergenceReport report;
  report.trials = trials;
  report.rounds = cfg.rounds;
  report.step = step;

  // Mean error trajectory: sum of extended error vectors across trials.
  Eigen::MatrixXd err_sum = Eigen::MatrixXd::Zero(cfg.rounds + 1, ext);
  Eigen::MatrixXd err_trial(cfg.rounds + 1, ext);
  int completed = 0;

  for (int t = 0; t < trials; ++t) {
    std::vector<SelectionMask> masks =
        cfg.scheme == MaskScheme::kCoordinated
            ? coordinated_init(dim, cfg.shared, cfg.shift, clients)
            : uncoordinated_init(dim, cfg.shared, cfg.shift, clients, mix_seed(cfg.seed, 5000 + t));

    ServerState server{Eigen::VectorXd::Zero(dim), 0, mix_seed(cfg.seed, 6000 + t)};
    std::vector<ClientState> states;
    std::vector<ClientDataSource> sources;
    states.reserve(clients);
    sources.reserve(clients);
    for (int k = 0; k < clients; ++k) {
      states.push_back({k, Eigen::VectorXd::Zero(dim), masks[k], step, 0.0});
      sources.emplace_back(scenario.params[k], cfg.window,
                           mix_seed(mix_seed(cfg.seed, 7000 + t), k));
    }

    auto record = [&](int round) {
      err_trial.row(round).segment(0, dim) = (scenario.w_star - server.model).transpose();
      for (int k = 0; k < clients; ++k)
        err_trial.row(round).segment((k + 1) * dim, dim) =
            (scenario.w_star - states[k].model).transpose();
    };
    record(0);

    bool diverged = false;
    for (int n = 1; n <= cfg.rounds; ++n) {
      std::vector<FeatureSample> samples;
      samples.reserve(clients);
      for (int k = 0; k < clients; ++k) {
        Eigen::VectorXd z = scenario.mapper.map(sources[k].advance());
        const double y = scenario.w_star.dot(z) + sources[k].draw_noise();
        samples.push_back({std::move(z), y});
      }
      try {
        run_round(server, states, samples, Algorithm::kPsoFed, cfg.participants);
      } catch (const divergence_error&) {
        diverged = true;
        break;
      }
      record(n);
    }

    if (diverged) {
      report.diverged_trials += 1;
    } else {
      err_sum += err_trial;
      completed += 1;
    }
  }

  if (report.diverged_trials > 0 || completed == 0) {
    report.verdict = ConvergenceVerdict::kDiverged;
    return report;
  }

  report.initial_norm = err_sum.row(0).norm() / completed;
  report.final_norm = err_sum.row(cfg.rounds).norm() / completed;
  report.ratio = report.initial_norm > 0.0 ? report.final_norm / report.initial_norm : 0.0;
  if (report.ratio < 0.01)
    report.verdict = ConvergenceVerdict::kConverged;
  else if (report.ratio > 10.0)
    report.verdict = ConvergenceVerdict::kDiverged;
  else
    report.verdict = ConvergenceVerdict::kIndeterminate;
  return report;
}

}  // namespace psofed
