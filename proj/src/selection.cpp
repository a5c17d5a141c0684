#include "psofed/selection.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <utility>

#include "psofed/errors.hpp"
#include "psofed/rng.hpp"

namespace psofed {

SelectionMask::SelectionMask(int dim, int shift, std::vector<int> active)
    : dim_(dim), shift_(shift), active_(std::move(active)) {
  if (dim < 1) throw std::invalid_argument("SelectionMask: dim must be >= 1");
  if (shift < 1 || shift > dim)
    throw std::invalid_argument("SelectionMask: shift must be in [1, dim]");
  std::sort(active_.begin(), active_.end());
  if (std::adjacent_find(active_.begin(), active_.end()) != active_.end())
    throw std::invalid_argument("SelectionMask: duplicate active index");
  if (!active_.empty() && (active_.front() < 0 || active_.back() >= dim))
    throw std::invalid_argument("SelectionMask: active index out of range");
}

SelectionMask SelectionMask::advanced() const {
  std::vector<int> next(active_.size());
  for (std::size_t i = 0; i < active_.size(); ++i) next[i] = (active_[i] + shift_) % dim_;
  return SelectionMask(dim_, shift_, std::move(next));
}

Eigen::VectorXd SelectionMask::apply(const Eigen::VectorXd& w) const {
  if (w.size() != dim_) throw dimension_error("SelectionMask::apply: length mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
  for (int i : active_) out(i) = w(i);
  return out;
}

Eigen::VectorXd SelectionMask::apply_complement(const Eigen::VectorXd& w) const {
  if (w.size() != dim_) throw dimension_error("SelectionMask::apply_complement: length mismatch");
  Eigen::VectorXd out = w;
  for (int i : active_) out(i) = 0.0;
  return out;
}

bool SelectionMask::contains(int index) const {
  return std::binary_search(active_.begin(), active_.end(), index);
}

namespace {

std::vector<int> rotated_block(int dim, int count, int offset) {
  std::vector<int> idx(count);
  for (int i = 0; i < count; ++i) idx[i] = (offset + i) % dim;
  return idx;
}

void check_init_args(int dim, int count, int shift, int clients) {
  if (dim < 1) throw std::invalid_argument("mask init: dim must be >= 1");
  if (count < 0 || count > dim)
    throw std::invalid_argument("mask init: count must be in [0, dim]");
  if (shift < 1 || shift > dim)
    throw std::invalid_argument("mask init: shift must be in [1, dim]");
  if (clients < 1) throw std::invalid_argument("mask init: clients must be >= 1");
}

}  // namespace

std::vector<SelectionMask> coordinated_init(int dim, int count, int shift, int clients) {
  check_init_args(dim, count, shift, clients);
  SelectionMask mask(dim, shift, rotated_block(dim, count, 0));
  return std::vector<SelectionMask>(clients, mask);
}

std::vector<SelectionMask> uncoordinated_init(int dim, int count, int shift, int clients,
                                              std::uint64_t seed) {
  check_init_args(dim, count, shift, clients);
  std::mt19937_64 rng(mix_seed(seed, 0));
  std::uniform_int_distribution<int> offset_dist(0, dim - 1);
  std::vector<SelectionMask> masks;
  masks.reserve(clients);
  for (int k = 0; k < clients; ++k)
    masks.emplace_back(dim, shift, rotated_block(dim, count, offset_dist(rng)));
  return masks;
}

}  // namespace psofed
