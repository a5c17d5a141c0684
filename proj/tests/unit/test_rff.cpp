#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "psofed/errors.hpp"
#include "psofed/rff.hpp"

using psofed::RffMapper;

TEST_CASE("rff: construction validates arguments") {
  CHECK_THROWS_AS(RffMapper(0, 10, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(RffMapper(4, 0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(RffMapper(4, 10, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(RffMapper(4, 10, -2.0, 1), std::invalid_argument);
}

TEST_CASE("rff: same seed gives bitwise-identical mappers") {
  RffMapper a(4, 64, 1.0, 42);
  RffMapper b(4, 64, 1.0, 42);
  CHECK(a.frequencies() == b.frequencies());
  CHECK(a.phases() == b.phases());

  RffMapper c(4, 64, 1.0, 43);
  CHECK(a.frequencies() != c.frequencies());
}

TEST_CASE("rff: scale is sqrt(2/D)") {
  RffMapper mapper(4, 200, 1.0, 7);
  CHECK(mapper.scale() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("rff: zero input with zero phases maps to the scale everywhere") {
  const int dim = 16;
  RffMapper mapper(Eigen::MatrixXd::Ones(3, dim), Eigen::VectorXd::Zero(dim), 1.0);
  Eigen::VectorXd z = mapper.map(Eigen::VectorXd::Zero(3));
  for (int i = 0; i < dim; ++i) CHECK(z(i) == doctest::Approx(std::sqrt(2.0 / dim)));
}

TEST_CASE("rff: outputs are bounded by the scale") {
  RffMapper mapper(4, 50, 0.8, 5);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> dist(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = dist(rng);
    Eigen::VectorXd z = mapper.map(x);
    CHECK(z.cwiseAbs().maxCoeff() <= mapper.scale() + 1e-15);
    CHECK(z.squaredNorm() <= 2.0 + 1e-12);
  }
}

TEST_CASE("rff: map validates input") {
  RffMapper mapper(4, 8, 1.0, 1);
  CHECK_THROWS_AS(mapper.map(Eigen::VectorXd::Zero(3)), psofed::dimension_error);
  Eigen::VectorXd bad(4);
  bad << 1.0, 2.0, std::numeric_limits<double>::quiet_NaN(), 0.0;
  CHECK_THROWS_AS(mapper.map(bad), std::invalid_argument);
}

TEST_CASE("rff: map is deterministic") {
  RffMapper a(2, 32, 1.0, 11);
  RffMapper b(2, 32, 1.0, 11);
  Eigen::Vector2d x(0.3, -1.2);
  CHECK(a.map(x) == b.map(x));
}

// Monte-Carlo check against the exact Gaussian kernel: at D=2000 the feature
// inner product z(x).z(y) stays within 0.05 of exp(-|x-y|^2/(2 bw^2)) on
// inputs with norm <= 2.
TEST_CASE("rff: feature inner products approximate the Gaussian kernel") {
  const int dim = 2000;
  const double bandwidth = 1.0;

  auto worst_error = [&](int input_dim, std::uint64_t mapper_seed, std::uint64_t pair_seed) {
    RffMapper mapper(input_dim, dim, bandwidth, mapper_seed);
    std::mt19937_64 rng(pair_seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    auto bounded_draw = [&] {
      Eigen::VectorXd v(input_dim);
      do {
        for (int i = 0; i < input_dim; ++i) v(i) = dist(rng);
      } while (v.norm() > 2.0);
      return v;
    };
    double worst = 0.0;
    for (int p = 0; p < 100; ++p) {
      const Eigen::VectorXd x = bounded_draw();
      const Eigen::VectorXd y = bounded_draw();
      const double kernel = std::exp(-(x - y).squaredNorm() / (2.0 * bandwidth * bandwidth));
      const double approx = mapper.map(x).dot(mapper.map(y));
      worst = std::max(worst, std::abs(approx - kernel));
    }
    return worst;
  };

  CHECK(worst_error(1, 3, 100) < 0.05);  // scalar inputs
  CHECK(worst_error(4, 3, 100) < 0.05);  // window-sized inputs
}
