#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "psofed/rff.hpp"

namespace psofed {

/// Per-client distribution parameters for the synthetic non-IID streams.
struct ClientParams {
  double ar_coeff = 0.5;        // AR(1) coefficient, in (-1, 1)
  double innovation_mean = 0.0;
  double innovation_var = 1.0;
  double noise_var = 0.01;      // observation noise variance
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Uniform draw ranges for ClientParams.
struct ParamRanges {
  Range ar_coeff{0.2, 0.9};
  Range innovation_mean{-0.2, 0.2};
  Range innovation_var{0.2, 1.2};
  Range noise_var{0.005, 0.03};
};

/// K independent parameter tuples, uniform within `ranges`, deterministic
/// given `seed`.
std::vector<ClientParams> draw_client_params(int clients, std::uint64_t seed,
                                             const ParamRanges& ranges = {});

/// The 4-tap nonlinear benchmark target
///   f(x) = sqrt(x1^2 + sin^2(pi x4)) + (0.8 - 0.5 exp(-x2^2)) x3,
/// with x1 the newest sample in the window. Requires window length >= 4.
double nonlinear_target(const Eigen::VectorXd& window);

using TargetFn = std::function<double(const Eigen::VectorXd&)>;

struct Sample {
  Eigen::VectorXd input;  // raw window, newest first
  double target = 0.0;
};

/// Streaming AR(1) input source for one client:
///   x_n = theta x_{n-1} + sqrt(1 - theta^2) u_n,  u_n ~ N(mean, var).
/// The sqrt(1 - theta^2) factor makes the stationary variance equal the
/// innovation variance for any theta. The constructor runs a 100-step warmup
/// so the stream starts stationary; afterwards the window always holds the
/// last `window_len` samples, newest first.
class ClientDataSource {
 public:
  ClientDataSource(const ClientParams& params, int window_len, std::uint64_t seed);

  /// Advances the recursion one step and returns the refreshed window.
  const Eigen::VectorXd& advance();

  /// One observation-noise draw, N(0, noise_var).
  double draw_noise();

  /// Advances once and returns (window, f(window) + noise).
  Sample next_sample(const TargetFn& f);

  const Eigen::VectorXd& window() const { return window_; }
  const ClientParams& params() const { return params_; }

  static constexpr int kWarmupSteps = 100;

 private:
  ClientParams params_;
  Eigen::VectorXd window_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> innovation_;
  std::normal_distribution<double> noise_;
};

/// Held-out evaluation data: one feature row per example.
struct TestSet {
  Eigen::MatrixXd features;  // n_examples x feature_dim
  Eigen::VectorXd targets;
};

/// Draws `per_client` fresh samples from every client's distribution
/// (independent of any training stream) and maps them through `mapper`.
/// With `noiseless` set the targets are f(x) with no observation noise.
TestSet build_test_set(const std::vector<ClientParams>& params, int window_len,
                       const RffMapper& mapper, int per_client, bool noiseless,
                       std::uint64_t seed, const TargetFn& f = nonlinear_target);

}  // namespace psofed
