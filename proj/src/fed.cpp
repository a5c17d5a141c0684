#include "psofed/fed.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "psofed/errors.hpp"
#include "psofed/rng.hpp"

namespace psofed {

namespace {

void check_model(const Eigen::VectorXd& model, int client_id) {
  if (!model.allFinite() || model.norm() >= kDivergenceNormGuard)
    throw divergence_error(client_id);
}

void sgd_step(ClientState& client, const Eigen::VectorXd& base, const Eigen::VectorXd& features,
              double target) {
  if (features.size() != base.size())
    throw dimension_error("client update: feature length does not match model");
  const double err = target - base.dot(features);
  client.last_error = err;
  client.model = base + client.step * err * features;
  check_model(client.model, client.id);
}

}  // namespace

std::vector<int> select_clients(const ServerState& server, int total, int count) {
  if (total < 1) throw std::invalid_argument("select_clients: total must be >= 1");
  if (count < 1 || count > total)
    throw std::invalid_argument("select_clients: count must be in [1, total]");
  std::mt19937_64 rng(mix_seed(server.selector_seed, static_cast<std::uint64_t>(server.round)));
  std::vector<int> ids(total);
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, total - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void online_fed_client_update(ClientState& client, const Eigen::VectorXd& global_model,
                              const Eigen::VectorXd& features, double target) {
  sgd_step(client, global_model, features, target);
}

void online_fed_aggregate(ServerState& server, const std::vector<Eigen::VectorXd>& updates) {
  if (updates.empty()) throw std::invalid_argument("online_fed_aggregate: no updates");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(server.model.size());
  for (const auto& u : updates) {
    if (u.size() != server.model.size())
      throw dimension_error("online_fed_aggregate: update length mismatch");
    acc += u;
  }
  server.model = acc / static_cast<double>(updates.size());
  check_model(server.model, -1);
  server.round += 1;
}

void psofed_participant_update(ClientState& client, const Eigen::VectorXd& masked_global,
                               const Eigen::VectorXd& features, double target) {
  const Eigen::VectorXd blend =
      client.mask.apply(masked_global) + client.mask.apply_complement(client.model);
  sgd_step(client, blend, features, target);
}

void psofed_nonparticipant_update(ClientState& client, const Eigen::VectorXd& features,
                                  double target) {
  sgd_step(client, client.model, features, target);
}

void psofed_aggregate(ServerState& server, const std::vector<MaskedUpload>& uploads) {
  if (uploads.empty()) throw std::invalid_argument("psofed_aggregate: no uploads");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(server.model.size());
  for (const auto& up : uploads) {
    if (up.mask.dim() != server.model.size() || up.values.size() != server.model.size())
      throw dimension_error("psofed_aggregate: upload dimension mismatch");
    // Coordinates the client shared, filled out with the server's previous
    // values everywhere else.
    acc += up.mask.apply(up.values) + up.mask.apply_complement(server.model);
  }
  server.model = acc / static_cast<double>(uploads.size());
  check_model(server.model, -1);
  server.round += 1;
}

RoundResult run_round(ServerState& server, std::vector<ClientState>& clients,
                      const std::vector<FeatureSample>& samples, Algorithm algorithm,
                      int participant_count) {
  const int total = static_cast<int>(clients.size());
  if (samples.size() != clients.size())
    throw std::invalid_argument("run_round: need one sample per client");

  RoundResult result;
  result.selected = select_clients(server, total, participant_count);

  const auto dim = static_cast<std::uint64_t>(server.model.size());

  try {
    if (algorithm == Algorithm::kOnlineFed) {
      // Non-selected clients sit the round out entirely.
      std::vector<Eigen::VectorXd> updates;
      updates.reserve(result.selected.size());
      for (int id : result.selected) {
        online_fed_client_update(clients[id], server.model, samples[id].features,
                                 samples[id].target);
        updates.push_back(clients[id].model);
        result.scalars_down += dim;
        result.scalars_up += dim;
      }
      online_fed_aggregate(server, updates);
      return result;
    }

    // PSO-Fed: every client updates; only the selected exchange coordinates.
    std::vector<bool> is_selected(total, false);
    for (int id : result.selected) is_selected[id] = true;

    for (int id = 0; id < total; ++id) {
      if (is_selected[id]) {
        const Eigen::VectorXd masked_global = clients[id].mask.apply(server.model);
        psofed_participant_update(clients[id], masked_global, samples[id].features,
                                  samples[id].target);
        result.scalars_down += static_cast<std::uint64_t>(clients[id].mask.count());
      } else {
        psofed_nonparticipant_update(clients[id], samples[id].features, samples[id].target);
      }
    }

    // Masks advance once per round for every client, selected or not, so
    // coordinated schedules stay aligned across rounds.
    for (auto& client : clients) client.mask = client.mask.advanced();

    std::vector<MaskedUpload> uploads;
    uploads.reserve(result.selected.size());
    for (int id : result.selected) {
      uploads.push_back({clients[id].mask, clients[id].mask.apply(clients[id].model)});
      result.scalars_up += static_cast<std::uint64_t>(clients[id].mask.count());
    }
    psofed_aggregate(server, uploads);
  } catch (const divergence_error& e) {
    throw divergence_error(e.client(), server.round);
  }
  return result;
}

}  // namespace psofed
