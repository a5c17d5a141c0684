#pragma once

#include <stdexcept>
#include <string>

namespace psofed {

/// Wrong vector/matrix size passed to an operation.
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Norm guard applied after every model update; exceeding it (or producing a
// non-finite value) raises divergence_error instead of propagating NaNs.
inline constexpr double kDivergenceNormGuard = 1e9;

/// A model update produced non-finite values or blew past the norm guard.
class divergence_error : public std::runtime_error {
 public:
  explicit divergence_error(int client, long round = -1)
      : std::runtime_error(format(client, round)), client_(client), round_(round) {}

  /// Client id, or -1 when the server aggregate diverged.
  int client() const { return client_; }
  /// Global iteration index, or -1 when unknown at throw site.
  long round() const { return round_; }

 private:
  static std::string format(int client, long round) {
    std::string msg = "model diverged at ";
    msg += client < 0 ? "server" : "client " + std::to_string(client);
    if (round >= 0) msg += ", round " + std::to_string(round);
    return msg;
  }

  int client_;
  long round_;
};

}  // namespace psofed
