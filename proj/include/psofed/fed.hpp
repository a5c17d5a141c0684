#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "psofed/selection.hpp"

namespace psofed {

enum class Algorithm { kOnlineFed, kPsoFed };

/// One client's local state. The model always has the shared feature
/// dimension; updates that leave it non-finite or past the norm guard raise
/// divergence_error.
struct ClientState {
  int id = 0;
  Eigen::VectorXd model;
  SelectionMask mask;
  double step = 0.0;        // SGD learning rate
  double last_error = 0.0;  // most recent prediction error, diagnostic only
};

/// Server-side state. Client selection is a pure function of
/// (selector_seed, round), so a round can be replayed in isolation.
struct ServerState {
  Eigen::VectorXd model;
  long round = 0;
  std::uint64_t selector_seed = 0;
};

/// Mapped training sample: features in the regression space plus the target.
struct FeatureSample {
  Eigen::VectorXd features;
  double target = 0.0;
};

/// Masked model upload: `values` carries the client model restricted to
/// `mask` (inactive coordinates zero / ignored).
struct MaskedUpload {
  SelectionMask mask;
  Eigen::VectorXd values;
};

/// Uniformly random subset of `count` distinct ids from [0, total), sorted
/// ascending. Deterministic given (server.selector_seed, server.round).
std::vector<int> select_clients(const ServerState& server, int total, int count);

/// err = y - w_global . z;  w_local <- w_global + step * z * err.
void online_fed_client_update(ClientState& client, const Eigen::VectorXd& global_model,
                              const Eigen::VectorXd& features, double target);

/// w_global <- mean of the uploaded models; round advances by one.
void online_fed_aggregate(ServerState& server, const std::vector<Eigen::VectorXd>& updates);

/// Selected-client rule: blend the shared part of the global model with the
/// kept part of the local model, then take one SGD step from the blend.
/// `masked_global` is what the server sent, i.e. the global model restricted
/// to the client's current mask (only active coordinates are read).
void psofed_participant_update(ClientState& client, const Eigen::VectorXd& masked_global,
                               const Eigen::VectorXd& features, double target);

/// Non-selected clients still learn from their fresh sample, purely locally.
void psofed_nonparticipant_update(ClientState& client, const Eigen::VectorXd& features,
                                  double target);

/// w_global <- (1/n) sum_k [shared part of upload k + previous global values
/// on the coordinates upload k did not share]. All complement fills use the
/// pre-round global model. Round advances by one.
void psofed_aggregate(ServerState& server, const std::vector<MaskedUpload>& uploads);

/// Outcome of one global iteration.
struct RoundResult {
  std::vector<int> selected;        // ids, ascending
  std::uint64_t scalars_up = 0;     // model scalars sent client -> server
  std::uint64_t scalars_down = 0;   // model scalars sent server -> client
};

/// Runs one synchronous round: select participants, send them the (masked)
/// global model, update every client (participants blend+step, and under
/// PSO-Fed non-participants take a local step), advance all masks, collect
/// (masked) uploads from participants, aggregate.
///
/// `samples` holds one fresh sample per client, indexed by client id.
/// Traffic counters record exactly the scalars that cross the network:
/// mask-count each way per participant for PSO-Fed, the full model dimension
/// each way for Online-Fed. Divergence errors carry the client id and round.
RoundResult run_round(ServerState& server, std::vector<ClientState>& clients,
                      const std::vector<FeatureSample>& samples, Algorithm algorithm,
                      int participant_count);

}  // namespace psofed
