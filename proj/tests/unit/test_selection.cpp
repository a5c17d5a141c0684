#include <doctest.h>

#include <Eigen/Dense>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "psofed/errors.hpp"
#include "psofed/selection.hpp"

using psofed::SelectionMask;
using psofed::coordinated_init;
using psofed::uncoordinated_init;

TEST_CASE("coordinated_init gives identical contiguous blocks") {
  auto masks = coordinated_init(4, 2, 1, 3);
  REQUIRE(masks.size() == 3);
  for (const auto& m : masks) {
    CHECK(m.active() == std::vector<int>{0, 1});
    CHECK(m == masks.front());
  }

  auto full = coordinated_init(4, 4, 1, 2);
  CHECK(full[0].active() == std::vector<int>{0, 1, 2, 3});

  auto empty = coordinated_init(4, 0, 1, 1);
  CHECK(empty[0].count() == 0);
  CHECK(empty[0].apply(Eigen::Vector4d(1, 2, 3, 4)) == Eigen::Vector4d::Zero());
}

TEST_CASE("mask init rejects bad arguments") {
  CHECK_THROWS_AS(coordinated_init(4, 5, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(coordinated_init(4, 2, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(coordinated_init(4, 2, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(coordinated_init(4, 2, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(uncoordinated_init(4, 5, 1, 1, 0), std::invalid_argument);
}

TEST_CASE("uncoordinated_init is deterministic and full masks stay full") {
  auto a = uncoordinated_init(200, 40, 40, 100, 12345);
  auto b = uncoordinated_init(200, 40, 40, 100, 12345);
  CHECK(a == b);

  auto full = uncoordinated_init(4, 4, 1, 20, 99);
  for (const auto& m : full) CHECK(m.count() == 4);
}

TEST_CASE("uncoordinated offsets are close to uniform") {
  // D=4, M=2: four possible rotations of the block. Chi-squared against the
  // uniform law over 10^4 draws, 1% critical value for 3 dof.
  const int draws = 10000;
  auto masks = uncoordinated_init(4, 2, 1, draws, 777);
  std::map<std::vector<int>, int> counts;
  for (const auto& m : masks) counts[m.active()] += 1;
  REQUIRE(counts.size() == 4);
  double chi2 = 0.0;
  const double expected = draws / 4.0;
  for (const auto& [active, n] : counts) chi2 += (n - expected) * (n - expected) / expected;
  CHECK(chi2 < 11.345);
}

TEST_CASE("advance shifts circularly and preserves cardinality") {
  SelectionMask m(4, 1, {0, 1});
  CHECK(m.advanced().active() == std::vector<int>{1, 2});

  SelectionMask wrap(4, 2, {2, 3});
  CHECK(wrap.advanced().active() == std::vector<int>{0, 1});

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 16);
    const int count = static_cast<int>(rng() % (dim + 1));
    const int shift = 1 + static_cast<int>(rng() % dim);
    SelectionMask mask =
        uncoordinated_init(dim, count, shift, 1, rng()).front();
    // advancing dim/gcd(dim, shift) times walks the full cycle back to start
    const int cycle = dim / std::gcd(dim, shift);
    SelectionMask walked = mask;
    for (int i = 0; i < cycle; ++i) {
      walked = walked.advanced();
      CHECK(walked.count() == count);
    }
    CHECK(walked == mask);
  }
}

TEST_CASE("every coordinate is active M times over D consecutive rounds") {
  for (int start = 0; start < 6; ++start) {
    std::vector<int> block(2);
    for (int i = 0; i < 2; ++i) block[i] = (start + i) % 6;
    SelectionMask mask(6, 1, block);
    std::vector<int> hits(6, 0);
    for (int n = 0; n < 6; ++n) {
      for (int i : mask.active()) hits[i] += 1;
      mask = mask.advanced();
    }
    for (int i = 0; i < 6; ++i) CHECK(hits[i] == 2);
  }
}

TEST_CASE("apply and complement partition the vector exactly") {
  SelectionMask single(2, 1, {0});
  Eigen::Vector2d w(3, 5);
  CHECK(single.apply(w) == Eigen::Vector2d(3, 0));
  CHECK(single.apply_complement(w) == Eigen::Vector2d(0, 5));

  SelectionMask full(2, 1, {0, 1});
  CHECK(full.apply(w) == w);
  CHECK(full.apply_complement(w) == Eigen::Vector2d::Zero());

  std::mt19937_64 rng(21);
  std::normal_distribution<double> dist(0.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + static_cast<int>(rng() % 40);
    const int count = static_cast<int>(rng() % (dim + 1));
    SelectionMask mask = uncoordinated_init(dim, count, 1, 1, rng()).front();
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = dist(rng);
    CHECK(mask.apply(v) + mask.apply_complement(v) == v);  // bit-exact
  }
}

TEST_CASE("apply rejects mismatched lengths") {
  SelectionMask mask(4, 1, {1, 2});
  CHECK_THROWS_AS(mask.apply(Eigen::Vector3d::Zero()), psofed::dimension_error);
  CHECK_THROWS_AS(mask.apply_complement(Eigen::Vector2d::Zero()), psofed::dimension_error);
}

TEST_CASE("mask constructor rejects bad active sets") {
  CHECK_THROWS_AS(SelectionMask(4, 1, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(SelectionMask(4, 1, {4}), std::invalid_argument);
  CHECK_THROWS_AS(SelectionMask(4, 1, {-1}), std::invalid_argument);
}
