#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace psofed {

/// Random Fourier feature map approximating a Gaussian kernel
/// exp(-|x - y|^2 / (2 bandwidth^2)). Frequencies and phases are frozen at
/// construction; the same mapper is shared by every client and the server so
/// that model coordinates mean the same thing everywhere.
class RffMapper {
 public:
  /// Draws frequencies i.i.d. N(0, bandwidth^-2) and phases U[0, 2pi),
  /// deterministically from `seed`.
  RffMapper(int input_dim, int feature_dim, double bandwidth, std::uint64_t seed);

  /// Builds a mapper from explicit matrices (frequencies is input_dim x
  /// feature_dim, phases has feature_dim entries).
  RffMapper(Eigen::MatrixXd frequencies, Eigen::VectorXd phases, double bandwidth);

  /// z_i = sqrt(2/D) * cos(w_i . x + b_i). Every coordinate is bounded by
  /// scale(), so |z|^2 <= 2.
  Eigen::VectorXd map(const Eigen::VectorXd& x) const;

  int input_dim() const { return static_cast<int>(frequencies_.rows()); }
  int feature_dim() const { return static_cast<int>(frequencies_.cols()); }
  double bandwidth() const { return bandwidth_; }
  double scale() const { return scale_; }
  const Eigen::MatrixXd& frequencies() const { return frequencies_; }
  const Eigen::VectorXd& phases() const { return phases_; }

 private:
  Eigen::MatrixXd frequencies_;  // input_dim x feature_dim
  Eigen::VectorXd phases_;       // feature_dim
  double bandwidth_;
  double scale_;
};

}  // namespace psofed
