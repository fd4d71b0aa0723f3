#include <gtest/gtest.h>

#include <random>

#include "conavg/hilbert.hpp"
#include "test_util.hpp"

using namespace conavg;

TEST(Vector, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(make_vector({}), ParameterError);
  EXPECT_THROW(make_vector({1.0, std::nan("")}), ParameterError);
  EXPECT_THROW(make_vector({std::numeric_limits<double>::infinity()}), ParameterError);
  EXPECT_EQ(make_vector({1.0, 2.0, 3.0}).size(), 3);
}

TEST(Inner, Examples) {
  EXPECT_EQ(inner(make_vector({1, 2}), make_vector({3, 4})), 11.0);
  EXPECT_EQ(inner(make_vector({0, 0}), make_vector({5, -7})), 0.0);
  EXPECT_THROW(inner(make_vector({1, 2}), make_vector({1})), DimensionError);
}

TEST(Inner, SelfMatchesNormAndIsBilinear) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> s(-3, 3);
  for (int k = 0; k < 100; ++k) {
    const Vector a = testutil::random_vector(rng, 1 + k % 8);
    double sum = 0;
    for (double v : a) sum += v * v;
    EXPECT_NEAR(inner(a, a), sum, 1e-12 * sum);
    EXPECT_GE(inner(a, a), 0.0);

    const Vector b = testutil::random_vector(rng, a.size());
    const Vector c = testutil::random_vector(rng, a.size());
    const double t = s(rng);
    EXPECT_EQ(inner(a, b), inner(b, a));
    const double lhs = inner(Vector(t * a + c), b);
    const double rhs = t * inner(a, b) + inner(c, b);
    EXPECT_NEAR(lhs, rhs, 1e-10 * (1 + std::abs(lhs)));
  }
}

TEST(Identity1, Examples) {
  const Vector s = make_vector({1.5, -2});
  const Vector t = make_vector({0.3, 7});
  EXPECT_NEAR(identity_residual(1, 0, s, t), 0.0, 1e-12);
  // 2s − t = [2,−1]: 5 = 2·1·1 + (−1)·1·1 − (−2)·2 = 2 − 1 + 4.
  EXPECT_NEAR(identity_residual(2, -1, make_vector({1, 0}), make_vector({0, 1})), 0.0, 1e-12);
  EXPECT_THROW(identity_residual(1, 1, s, make_vector({1})), DimensionError);
}

TEST(Identity1, RandomRelativeBound) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> coef(-10, 10);
  for (int k = 0; k < 10000; ++k) {
    const Eigen::Index dim = 1 + k % 16;
    const Vector s = testutil::random_vector(rng, dim);
    const Vector t = testutil::random_vector(rng, dim);
    const double sigma = coef(rng), tau = coef(rng);
    const double scale = (1 + s.squaredNorm() + t.squaredNorm()) * (1 + sigma * sigma + tau * tau);
    ASSERT_LT(identity_residual(sigma, tau, s, t), 1e-9 * scale);
  }
}

TEST(Identity2, Examples) {
  const Vector s = make_vector({0.5, -4, 2});
  EXPECT_NEAR(identity2_residual(1, 1, s, s), 0.0, 1e-12);
  // 3·5 − 1·1 = 14;  ‖[3,5]‖²/2 + (−3)·‖[1,1]‖²/2 = 17 − 3 = 14.
  EXPECT_NEAR(identity2_residual(3, -1, make_vector({1, 2}), make_vector({0, 1})), 0.0, 1e-10);
  EXPECT_THROW(identity2_residual(2, -2, s, s), ParameterError);
  EXPECT_THROW(identity2_residual(1, -1 + 1e-16, s, s), ParameterError);
}
