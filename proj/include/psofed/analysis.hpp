#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "psofed/data_gen.hpp"
#include "psofed/rff.hpp"
#include "psofed/selection.hpp"

namespace psofed {

// The extended system stacks the server model on top of all K client models
// into one (K+1)*D vector. Two block matrices describe a round: one applies
// the download/blend step (participants overwrite their shared coordinates
// with the server's), the other the upload/aggregation step. Both leave any
// consensus vector (the same model replicated K+1 times) untouched, which is
// what the fixed-point tests exercise.
//
// Dense block matrices are a verification tool; builders reject systems
// larger than kMaxExtendedDim rather than materialize them.
inline constexpr int kMaxExtendedDim = 4096;

/// Download/blend block matrix for one round. `masks` are the clients'
/// current masks, `participation[k]` says whether client k was selected.
Eigen::MatrixXd build_extended_A(const std::vector<SelectionMask>& masks,
                                 const std::vector<bool>& participation);

/// Upload/aggregation block matrix. `masks` are the post-shift masks and
/// `participant_count` the number of selected clients (>= 1).
Eigen::MatrixXd build_extended_B(const std::vector<SelectionMask>& masks,
                                 const std::vector<bool>& participation, int participant_count);

/// blockdiag{0, R_1, ..., R_K} for the extended error recursion.
Eigen::MatrixXd extended_correlation(const std::vector<Eigen::MatrixXd>& r_blocks);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration,
/// to relative tolerance `rel_tol`.
double largest_eigenvalue(const Eigen::MatrixXd& sym, double rel_tol = 1e-8);

/// First-order stability ceiling 2 / max_k lambda_max(R_k). Returns +inf when
/// every block is zero (no excitation constrains the step).
double step_size_bound(const std::vector<Eigen::MatrixXd>& r_blocks);

/// Expectations of the round matrices under independent client selection
/// (probability participant_count/clients) and coordinate selection
/// (probability shared/dim). The scheme and shift do not change the
/// marginals; they are accepted to mirror the sampling interface.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> expected_matrices(MaskScheme scheme, int dim,
                                                              int shared, int shift, int clients,
                                                              int participant_count);

/// One step of the deterministic mean-error recursion:
/// err <- E[B] (I - step * R_e) E[A] err.
Eigen::VectorXd mean_recursion_step(const Eigen::MatrixXd& expected_a,
                                    const Eigen::MatrixXd& expected_b,
                                    const Eigen::MatrixXd& extended_corr, double step,
                                    const Eigen::VectorXd& err);

/// Sample estimate of E[z z^T] from `samples` fresh draws of one client's
/// stream mapped through `mapper`. Symmetric PSD up to roundoff.
Eigen::MatrixXd estimate_correlation(ClientDataSource& source, const RffMapper& mapper,
                                     int samples);

double spectral_radius(const Eigen::MatrixXd& m);
double matrix_two_norm(const Eigen::MatrixXd& m);

/// Desk-scale scenario for the empirical mean-convergence check. Targets are
/// linear in the feature space: y = w* . z + noise, with w* drawn inside the
/// well-excited span of the average feature correlation (directions the data
/// never excites cannot converge in any finite horizon). Defaults are sized
/// so the stochastic recursion is also mean-square stable at half the
/// first-order step ceiling.
struct AnalysisConfig {
  int clients = 10;
  int feature_dim = 16;
  int window = 4;
  int shared = 8;        // mask cardinality
  int shift = 8;         // mask rotation per round
  int participants = 5;  // selected per round
  MaskScheme scheme = MaskScheme::kCoordinated;
  double bandwidth = 1.5;
  double noise_var = 1e-4;
  int rounds = 2000;
  int correlation_samples = 100000;  // per client, for R_k estimates
  std::uint64_t seed = 1;
  ParamRanges input_ranges;  // AR parameter draw ranges
};

enum class ConvergenceVerdict { kConverged, kDiverged, kIndeterminate };

struct ConvergenceReport {
  ConvergenceVerdict verdict = ConvergenceVerdict::kIndeterminate;
  double initial_norm = 0.0;  // |mean extended error| at round 0
  double final_norm = 0.0;    // same at the last round
  double ratio = 0.0;         // final / initial
  int diverged_trials = 0;
  int trials = 0;
  int rounds = 0;
  double step = 0.0;
};

/// Runs `trials` independent PSO-Fed simulations with a known linear target,
/// averages the extended error vector across trials round by round, and
/// reports converged when the final mean-error norm falls below 1% of the
/// initial one, diverged when it exceeds 10x (or any trial trips the norm
/// guard), indeterminate otherwise.
ConvergenceReport verify_mean_convergence(const AnalysisConfig& config, double step, int trials);

/// Step ceiling for `config`, from per-client correlation estimates.
double step_size_bound_for(const AnalysisConfig& config);

}  // namespace psofed
