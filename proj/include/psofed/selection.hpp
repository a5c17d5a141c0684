#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace psofed {

enum class MaskScheme { kCoordinated, kUncoordinated };

/// Diagonal 0/1 selection matrix, stored as the sorted set of active
/// coordinate indices. A mask picks which of the D model coordinates travel
/// between a client and the server in one round; advancing it applies a right
/// circular shift by `shift` positions.
class SelectionMask {
 public:
  SelectionMask() = default;

  /// `active` holds distinct indices in [0, dim); 1 <= shift <= dim.
  SelectionMask(int dim, int shift, std::vector<int> active);

  /// New mask with every active index moved to (i + shift) mod dim.
  SelectionMask advanced() const;

  /// Copies active coordinates of `w`, zeroes the rest.
  Eigen::VectorXd apply(const Eigen::VectorXd& w) const;

  /// Copies inactive coordinates of `w`, zeroes the active ones.
  /// apply(w) + apply_complement(w) == w coordinate for coordinate.
  Eigen::VectorXd apply_complement(const Eigen::VectorXd& w) const;

  bool contains(int index) const;

  int dim() const { return dim_; }
  int shift() const { return shift_; }
  int count() const { return static_cast<int>(active_.size()); }
  const std::vector<int>& active() const { return active_; }

  friend bool operator==(const SelectionMask&, const SelectionMask&) = default;

 private:
  int dim_ = 0;
  int shift_ = 1;
  std::vector<int> active_;  // sorted
};

/// All K clients get the same mask: the contiguous block {0, ..., count-1}.
std::vector<SelectionMask> coordinated_init(int dim, int count, int shift, int clients);

/// Each client gets the contiguous block rotated by an independent uniform
/// offset in [0, dim). Deterministic given `seed`.
std::vector<SelectionMask> uncoordinated_init(int dim, int count, int shift, int clients,
                                              std::uint64_t seed);

}  // namespace psofed
