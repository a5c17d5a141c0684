#include "psofed/data_gen.hpp"

#include <cmath>
#include <stdexcept>

#include "psofed/errors.hpp"
#include "psofed/rng.hpp"

namespace psofed {

std::vector<ClientParams> draw_client_params(int clients, std::uint64_t seed,
                                             const ParamRanges& ranges) {
  if (clients < 1) throw std::invalid_argument("draw_client_params: clients must be >= 1");
  auto check = [](const Range& r, const char* name) {
    if (!(r.lo <= r.hi)) throw std::invalid_argument(std::string("draw_client_params: bad range for ") + name);
  };
  check(ranges.ar_coeff, "ar_coeff");
  check(ranges.innovation_mean, "innovation_mean");
  check(ranges.innovation_var, "innovation_var");
  check(ranges.noise_var, "noise_var");
  if (ranges.ar_coeff.lo <= -1.0 || ranges.ar_coeff.hi >= 1.0)
    throw std::invalid_argument("draw_client_params: ar_coeff range must lie inside (-1, 1)");
  if (ranges.innovation_var.lo < 0.0 || ranges.noise_var.lo < 0.0)
    throw std::invalid_argument("draw_client_params: variances must be non-negative");

  std::mt19937_64 rng(seed);
  auto uniform = [&rng](const Range& r) {
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
  };
  std::vector<ClientParams> out(clients);
  for (auto& p : out) {
    p.ar_coeff = uniform(ranges.ar_coeff);
    p.innovation_mean = uniform(ranges.innovation_mean);
    p.innovation_var = uniform(ranges.innovation_var);
    p.noise_var = uniform(ranges.noise_var);
  }
  return out;
}

double nonlinear_target(const Eigen::VectorXd& window) {
  if (window.size() < 4) throw dimension_error("nonlinear_target: window must have >= 4 taps");
  const double x1 = window(0), x2 = window(1), x3 = window(2), x4 = window(3);
  const double s = std::sin(M_PI * x4);
  return std::sqrt(x1 * x1 + s * s) + (0.8 - 0.5 * std::exp(-x2 * x2)) * x3;
}

ClientDataSource::ClientDataSource(const ClientParams& params, int window_len, std::uint64_t seed)
    : params_(params),
      window_(Eigen::VectorXd::Zero(window_len)),
      rng_(mix_seed(seed, 0)),
      innovation_(params.innovation_mean, std::sqrt(params.innovation_var)),
      noise_(0.0, std::sqrt(params.noise_var)) {
  if (window_len < 1) throw std::invalid_argument("ClientDataSource: window_len must be >= 1");
  if (!(params.ar_coeff > -1.0 && params.ar_coeff < 1.0))
    throw std::invalid_argument("ClientDataSource: ar_coeff must lie in (-1, 1)");
  if (params.innovation_var < 0.0 || params.noise_var < 0.0)
    throw std::invalid_argument("ClientDataSource: variances must be non-negative");
  for (int i = 0; i < kWarmupSteps + window_len; ++i) advance();
}

const Eigen::VectorXd& ClientDataSource::advance() {
  const double theta = params_.ar_coeff;
  const double x = theta * window_(0) + std::sqrt(1.0 - theta * theta) * innovation_(rng_);
  for (int i = static_cast<int>(window_.size()) - 1; i > 0; --i) window_(i) = window_(i - 1);
  window_(0) = x;
  return window_;
}

double ClientDataSource::draw_noise() { return params_.noise_var > 0.0 ? noise_(rng_) : 0.0; }

Sample ClientDataSource::next_sample(const TargetFn& f) {
  Sample s;
  s.input = advance();
  s.target = f(s.input) + draw_noise();
  return s;
}

TestSet build_test_set(const std::vector<ClientParams>& params, int window_len,
                       const RffMapper& mapper, int per_client, bool noiseless,
                       std::uint64_t seed, const TargetFn& f) {
  if (per_client < 1) throw std::invalid_argument("build_test_set: per_client must be >= 1");
  if (params.empty()) throw std::invalid_argument("build_test_set: no client params");
  if (mapper.input_dim() != window_len)
    throw dimension_error("build_test_set: mapper input_dim does not match window_len");

  const int n = static_cast<int>(params.size()) * per_client;
  TestSet set;
  set.features.resize(n, mapper.feature_dim());
  set.targets.resize(n);
  int row = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    ClientDataSource src(params[k], window_len, mix_seed(seed, 0x7e570000ull + k));
    for (int j = 0; j < per_client; ++j, ++row) {
      const Eigen::VectorXd& x = src.advance();
      set.features.row(row) = mapper.map(x).transpose();
      set.targets(row) = f(x) + (noiseless ? 0.0 : src.draw_noise());
    }
  }
  return set;
}

}  // namespace psofed
