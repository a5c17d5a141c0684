#include "psofed/rff.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "psofed/errors.hpp"

namespace psofed {

RffMapper::RffMapper(int input_dim, int feature_dim, double bandwidth, std::uint64_t seed)
    : bandwidth_(bandwidth) {
  if (input_dim < 1) throw std::invalid_argument("RffMapper: input_dim must be >= 1");
  if (feature_dim < 1) throw std::invalid_argument("RffMapper: feature_dim must be >= 1");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("RffMapper: bandwidth must be > 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> freq_dist(0.0, 1.0 / bandwidth);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * M_PI);

  frequencies_.resize(input_dim, feature_dim);
  for (int i = 0; i < input_dim; ++i)
    for (int j = 0; j < feature_dim; ++j) frequencies_(i, j) = freq_dist(rng);

  phases_.resize(feature_dim);
  for (int j = 0; j < feature_dim; ++j) phases_(j) = phase_dist(rng);

  scale_ = std::sqrt(2.0 / feature_dim);
}

RffMapper::RffMapper(Eigen::MatrixXd frequencies, Eigen::VectorXd phases, double bandwidth)
    : frequencies_(std::move(frequencies)), phases_(std::move(phases)), bandwidth_(bandwidth) {
  if (frequencies_.rows() < 1 || frequencies_.cols() < 1)
    throw std::invalid_argument("RffMapper: empty frequency matrix");
  if (phases_.size() != frequencies_.cols())
    throw dimension_error("RffMapper: phases length must match feature_dim");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("RffMapper: bandwidth must be > 0");
  scale_ = std::sqrt(2.0 / static_cast<double>(frequencies_.cols()));
}

Eigen::VectorXd RffMapper::map(const Eigen::VectorXd& x) const {
  if (x.size() != frequencies_.rows())
    throw dimension_error("RffMapper::map: input length does not match input_dim");
  if (!x.allFinite()) throw std::invalid_argument("RffMapper::map: non-finite input");
  return scale_ * ((frequencies_.transpose() * x + phases_).array().cos()).matrix();
}

}  // namespace psofed
