#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "gradcheck.hpp"
#include "mixmate/numkernel.hpp"

using namespace mixmate;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("soft_threshold examples") {
  const Vector a = soft_threshold(vec({1.2, -0.3, 0.5}), 0.5);
  CHECK(a[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(a[1] == 0.0);
  CHECK(a[2] == 0.0);
  CHECK(soft_threshold(vec({3, -7}), 0.0) == vec({3, -7}));
  CHECK(soft_threshold(vec({0, 0}), 1.0) == vec({0, 0}));
  CHECK_THROWS_AS(soft_threshold(vec({1}), -0.1), std::invalid_argument);
}

TEST_CASE("soft_threshold is odd and nonexpansive") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector u = testing::random_matrix(9, 1, rng, 2.0);
    const Vector v = testing::random_matrix(9, 1, rng, 2.0);
    const double alpha = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    CHECK(soft_threshold(-u, alpha) == -soft_threshold(u, alpha));
    CHECK((soft_threshold(u, alpha) - soft_threshold(v, alpha)).norm() <= (u - v).norm() + 1e-15);
  }
}

TEST_CASE("soft_threshold_inplace matches the vector form") {
  std::mt19937_64 rng(3);
  Matrix m = testing::random_matrix(4, 5, rng);
  Matrix copy = m;
  soft_threshold_inplace(m, 0.4);
  for (Eigen::Index r = 0; r < 4; ++r) CHECK(Vector(m.row(r).transpose()) == soft_threshold(copy.row(r).transpose(), 0.4));
}

TEST_CASE("logsumexp") {
  CHECK(logsumexp(vec({0, 0})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(logsumexp(vec({1000, 1000})) == doctest::Approx(1000 + std::log(2.0)).epsilon(1e-15));
  CHECK(logsumexp(vec({0})) == 0.0);
  CHECK(std::isfinite(logsumexp(vec({-1e308, 1e308}))));
  CHECK_THROWS_AS(logsumexp(Vector()), std::invalid_argument);
}

TEST_CASE("softmax_neg examples") {
  const Vector a = softmax_neg(vec({1, 1}));
  CHECK(a[0] == doctest::Approx(0.5));
  CHECK(a[1] == doctest::Approx(0.5));
  const Vector b = softmax_neg(vec({0, std::log(3.0)}));
  CHECK(b[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(b[1] == doctest::Approx(0.25).epsilon(1e-14));
  const Vector c = softmax_neg(vec({0, 1e6}));
  CHECK(c[0] == 1.0);
  CHECK(c[1] < 1e-300);
  CHECK(c.allFinite());
}

TEST_CASE("softmax_neg is a probability vector and shift invariant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> shift(-1e4, 1e4);
  for (int trial = 0; trial < 200; ++trial) {
    const double scale = std::pow(10.0, std::uniform_int_distribution<int>(-3, 5)(rng));
    const Vector v = testing::random_matrix(6, 1, rng, scale);
    const Vector w = softmax_neg(v);
    CHECK((w.array() >= 0.0).all());
    CHECK(std::fabs(w.sum() - 1.0) < 1e-12);
    const Vector shifted = softmax_neg((v.array() + shift(rng)).matrix());
    CHECK((shifted - w).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("products and norms") {
  const Matrix eye = Matrix::Identity(2, 2);
  CHECK(matvec(eye, vec({4, -5})) == vec({4, -5}));
  Matrix a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  CHECK(matvec(a, vec({1, 0, -1})) == vec({-2, -2}));
  CHECK(matvec_transpose(a, vec({1, 1})) == vec({5, 7, 9}));
  CHECK_THROWS_AS(matvec(a, vec({1, 2})), std::invalid_argument);
  CHECK_THROWS_AS(matvec_transpose(a, vec({1, 2, 3})), std::invalid_argument);
  CHECK(l1_norm(vec({1, -2, 0})) == 3.0);
  CHECK(l2_sq(vec({3, 4})) == 25.0);
  CHECK(frobenius(a) == doctest::Approx(std::sqrt(91.0)));
}

TEST_CASE("spectral_norm_sq agrees with the SVD") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testing::random_matrix(7, 4, rng);
    const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()[0];
    CHECK(spectral_norm_sq(a) == doctest::Approx(sigma * sigma).epsilon(1e-8));
  }
}
