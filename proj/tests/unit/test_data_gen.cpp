#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "psofed/data_gen.hpp"
#include "psofed/rff.hpp"

using namespace psofed;

TEST_CASE("draw_client_params respects ranges and is deterministic") {
  auto a = draw_client_params(50, 99);
  auto b = draw_client_params(50, 99);
  for (int k = 0; k < 50; ++k) {
    CHECK(a[k].ar_coeff == b[k].ar_coeff);
    CHECK(a[k].ar_coeff >= 0.2);
    CHECK(a[k].ar_coeff <= 0.9);
    CHECK(a[k].innovation_mean >= -0.2);
    CHECK(a[k].innovation_mean <= 0.2);
    CHECK(a[k].innovation_var >= 0.2);
    CHECK(a[k].innovation_var <= 1.2);
    CHECK(a[k].noise_var >= 0.005);
    CHECK(a[k].noise_var <= 0.03);
  }
}

TEST_CASE("client parameters differ across clients") {
  auto params = draw_client_params(10, 3);
  for (int i = 1; i < 10; ++i) {
    CHECK(params[i].ar_coeff != params[0].ar_coeff);
    CHECK(params[i].innovation_var != params[0].innovation_var);
  }
}

TEST_CASE("ar-coefficient sample mean within 3 sigma of the uniform mean") {
  auto params = draw_client_params(10000, 1234);
  double mean = 0.0;
  for (const auto& p : params) mean += p.ar_coeff;
  mean /= params.size();
  const double sigma_mean = (0.7 / std::sqrt(12.0)) / 100.0;
  CHECK(std::abs(mean - 0.55) < 3.0 * sigma_mean);
}

TEST_CASE("nonlinear target matches an independently coded oracle") {
  // Oracle written with a different operation order and std::hypot.
  auto oracle = [](double x1, double x2, double x3, double x4) {
    const double lhs = std::hypot(x1, std::sin(M_PI * x4));
    const double gate = 0.8 - 0.5 / std::exp(x2 * x2);
    return lhs + x3 * gate;
  };
  CHECK(nonlinear_target(Eigen::Vector4d::Zero()) == 0.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist(0.0, 1.5);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = dist(rng);
    CHECK(nonlinear_target(x) ==
          doctest::Approx(oracle(x(0), x(1), x(2), x(3))).epsilon(1e-12));
  }
  CHECK_THROWS(nonlinear_target(Eigen::Vector3d::Zero()));
}

TEST_CASE("stationary variance equals the innovation variance") {
  // Var(x) = theta^2 Var(x) + (1-theta^2) var_u  =>  Var(x) = var_u.
  for (double theta : {0.0, 0.5, 0.9}) {
    ClientParams p;
    p.ar_coeff = theta;
    p.innovation_mean = 0.0;
    p.innovation_var = 0.8;
    p.noise_var = 0.0;
    ClientDataSource src(p, 4, 42);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = src.advance()(0);
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(var - 0.8) < 0.05 * 0.8);
  }
}

TEST_CASE("theta zero gives a white sequence") {
  ClientParams p;
  p.ar_coeff = 0.0;
  p.innovation_var = 1.0;
  ClientDataSource src(p, 4, 7);
  const int n = 50000;
  double prev = src.advance()(0);
  double lag1 = 0.0, var = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = src.advance()(0);
    lag1 += x * prev;
    var += x * x;
    prev = x;
  }
  CHECK(std::abs(lag1 / var) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("window shifts newest-first") {
  ClientParams p;
  ClientDataSource src(p, 4, 11);
  Eigen::VectorXd w0 = src.window();
  Eigen::VectorXd w1 = src.advance();
  CHECK(w1.segment(1, 3) == w0.segment(0, 3));
}

TEST_CASE("streams are reproducible from the seed") {
  ClientParams p = draw_client_params(1, 5)[0];
  ClientDataSource a(p, 4, 77), b(p, 4, 77);
  for (int i = 0; i < 100; ++i) {
    Sample sa = a.next_sample(nonlinear_target);
    Sample sb = b.next_sample(nonlinear_target);
    CHECK(sa.input == sb.input);
    CHECK(sa.target == sb.target);
  }
}

TEST_CASE("build_test_set sizes, bounds, and noiseless flag") {
  auto params = draw_client_params(3, 8);
  RffMapper mapper(4, 32, 1.0, 8);

  TestSet one = build_test_set(params, 4, mapper, 1, true, 9);
  CHECK(one.features.rows() == 3);

  TestSet set = build_test_set(params, 4, mapper, 10, true, 9);
  CHECK(set.features.rows() == 30);
  CHECK(set.features.cols() == 32);
  CHECK(set.features.cwiseAbs().maxCoeff() <= mapper.scale() + 1e-15);

  // Noiseless targets are a deterministic function of the inputs; a second
  // build with the same seed reproduces them, a noisy build does not.
  TestSet again = build_test_set(params, 4, mapper, 10, true, 9);
  CHECK(set.targets == again.targets);
  TestSet noisy = build_test_set(params, 4, mapper, 10, false, 9);
  CHECK(set.targets != noisy.targets);
}

TEST_CASE("data source validates parameters") {
  ClientParams p;
  p.ar_coeff = 1.0;
  CHECK_THROWS_AS(ClientDataSource(p, 4, 1), std::invalid_argument);
  p.ar_coeff = 0.5;
  CHECK_THROWS_AS(ClientDataSource(p, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(draw_client_params(0, 1), std::invalid_argument);
}
