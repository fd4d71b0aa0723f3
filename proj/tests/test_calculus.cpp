#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "conavg/calculus.hpp"
#include "conavg/oracle.hpp"
#include "conavg/resolvents.hpp"

using namespace conavg;

namespace {

bool conical(const Map& T, double theta, Eigen::Index dim = 2) {
  oracle::SampleConfig c;
  c.dim = dim;
  c.samples = 10000;
  c.tol = 1e-8;
  const auto rep = oracle::sample_conical_check(T, theta, c);
  EXPECT_TRUE(rep.forms_agree);
  return rep.pass;
}

// x ↦ (1−2θ)x is conically θ-averaged and no better.
Map tight(double theta) {
  return [theta](const Vector& x) -> Vector { return (1.0 - 2.0 * theta) * x; };
}

const FunctionSpec kL1 = FunctionSpec::l1(1.0);
const FunctionSpec kBox = FunctionSpec::box_indicator(make_vector({-1, -2}), make_vector({2, 0.5}));

}  // namespace

TEST(Cert, RejectsNonPositive) {
  EXPECT_THROW(ConicalCert(0.0), ParameterError);
  EXPECT_THROW(ConicalCert(-1.0), ParameterError);
  EXPECT_THROW(ScaledConicalCert(0.0, 1.0), ParameterError);
}

TEST(Relax, Examples) {
  EXPECT_EQ(relax(0.5, 2), 1.0);
  EXPECT_EQ(relax(0.37, 1), 0.37);
  EXPECT_DOUBLE_EQ(relax(1.0 / 3, 1.5), 0.5);
  EXPECT_THROW(relax(0, 1), ParameterError);
  EXPECT_THROW(relax(1, 0), ParameterError);
}

TEST(ConvexCombination, Examples) {
  const std::vector<double> w2{0.5, 0.5};
  EXPECT_EQ(convex_combination(std::vector<double>{1, 1}, w2), 1.0);
  EXPECT_EQ(convex_combination(std::vector<double>{0.5, 1.5}, w2), 1.0);
  const std::vector<double> th{2, 0.5, 0.5}, w{0.2, 0.4, 0.4};
  const double theta = convex_combination(th, w);
  EXPECT_NEAR(theta, 0.8, 1e-15);

  // 0.2·(−3x) + 0.4·Prox_{l1} + 0.4·P_box
  Map T = [](const Vector& x) -> Vector {
    return 0.2 * (-3.0 * x) + 0.4 * prox(kL1, 1.0, x) + 0.4 * prox(kBox, 1.0, x);
  };
  EXPECT_TRUE(conical(T, theta));
}

TEST(ConvexCombination, Errors) {
  EXPECT_THROW(convex_combination(std::vector<double>{1, 1}, std::vector<double>{0.5, 0.6}), ParameterError);
  EXPECT_THROW(convex_combination(std::vector<double>{1, 1}, std::vector<double>{1.0}), ParameterError);
  EXPECT_THROW(convex_combination(std::vector<double>{}, std::vector<double>{}), ParameterError);
  EXPECT_THROW(convex_combination(std::vector<double>{1, 1}, std::vector<double>{1.5, -0.5}), ParameterError);
}

TEST(Compose2, Examples) {
  EXPECT_EQ(compose2(1, 1), 1.0);

  const double t = compose2(0.5, 0.5);
  EXPECT_NEAR(t, 2.0 / 3.0, 1e-15);
  Map T = [](const Vector& x) -> Vector { return prox(kBox, 1.0, prox(kL1, 1.0, x)); };
  EXPECT_TRUE(conical(T, t));

  const double t2 = compose2(2, 0.25);
  EXPECT_NEAR(t2, 2.5, 1e-15);
  const Map a = tight(2), b = tight(0.25);
  EXPECT_TRUE(conical([&](const Vector& x) { return b(a(x)); }, t2));
  EXPECT_TRUE(conical([&](const Vector& x) { return a(b(x)); }, t2));
}

TEST(Compose2, BoundaryRejected) {
  EXPECT_THROW(compose2(2, 0.5), NotCoveredError);
  EXPECT_THROW(compose2(3, 1), NotCoveredError);
  EXPECT_THROW(compose2(0, 0.5), ParameterError);
}

TEST(Compose2, SymmetricAndClassification) {
  for (int i = 1; i <= 300; ++i) {
    for (int j = 1; j <= 300; ++j) {
      const double a = i / 100.0, b = j / 100.0;
      const bool one = std::abs(a - 1) < 1e-12 || std::abs(b - 1) < 1e-12;
      const bool both_one = std::abs(a - 1) < 1e-12 && std::abs(b - 1) < 1e-12;
      if (!both_one && !(a * b < 1)) continue;
      const double t = compose2(a, b);
      ASSERT_EQ(t, compose2(b, a));
      ASSERT_EQ(std::abs(t - 1) < 1e-12, one) << a << " " << b;
      ASSERT_EQ(t < 1 - 1e-12, a < 1 && b < 1) << a << " " << b;
    }
  }
}

TEST(ComposeScaled, Examples) {
  const auto c = compose_scaled({-1, 0.5}, {-1, 0.5});
  EXPECT_EQ(c.omega, 1.0);
  EXPECT_NEAR(c.theta, 2.0 / 3.0, 1e-15);
  // T₁ = −Prox_{l1}, T₂ = −P_box.
  Map T = [](const Vector& x) -> Vector { return -prox(kBox, 1.0, Vector(-prox(kL1, 1.0, x))); };
  EXPECT_TRUE(conical([&](const Vector& x) -> Vector { return c.omega * T(x); }, c.theta));

  const auto n = compose_scaled({2, 1}, {0.5, 1});
  EXPECT_EQ(n.omega, 1.0);
  EXPECT_EQ(n.theta, 1.0);

  const auto d = compose_scaled({3, 1.0 / 3}, {1.0 / 3, 2});
  EXPECT_NEAR(d.omega, 1.0, 1e-15);
  EXPECT_NEAR(d.theta, 3.0, 1e-12);
  // T₁ = (1/3)·tight(1/3) = x/9, T₂ = 3·tight(2) = −9x.
  const Map T1 = [](const Vector& x) -> Vector { return x / 9.0; };
  const Map T2 = [](const Vector& x) -> Vector { return -9.0 * x; };
  EXPECT_TRUE(conical([&](const Vector& x) -> Vector { return d.omega * T2(T1(x)); }, d.theta));
  EXPECT_TRUE(conical([&](const Vector& x) -> Vector { return d.omega * T1(T2(x)); }, d.theta));
}

TEST(ComposeMany, Examples) {
  const auto r = compose_many(std::vector<double>{0.5, 0.5, 0.5});
  EXPECT_NEAR(r.theta, 0.75, 1e-15);
  EXPECT_FALSE(r.nonexpansive_only);
  EXPECT_NEAR(r.theta, compose2(compose2(0.5, 0.5), 0.5), 1e-15);

  const auto ones = compose_many(std::vector<double>{1, 1, 1});
  EXPECT_EQ(ones.theta, 1.0);
  EXPECT_TRUE(ones.nonexpansive_only);

  const auto mixed = compose_many(std::vector<double>{0.5, 1, 0.2});
  EXPECT_TRUE(mixed.nonexpansive_only);

  const auto c = compose_many(std::vector<double>{1.5, 0.25});
  EXPECT_NEAR(c.theta, 1.6, 1e-14);
  EXPECT_NEAR(c.theta, compose2(1.5, 0.25), 1e-14);
}

TEST(ComposeMany, Errors) {
  try {
    compose_many(std::vector<double>{1.5, 1.5});
    FAIL() << "expected chain failure";
  } catch (const ChainConditionError& e) {
    EXPECT_EQ(e.position(), 2u);
  }
  try {
    compose_many(std::vector<double>{0.5, 0.5, 0.5, 1.4});
    FAIL() << "expected chain failure";
  } catch (const ChainConditionError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
  EXPECT_THROW(compose_many(std::vector<double>{1, 1.5}), NotCoveredError);
  EXPECT_THROW(compose_many(std::vector<double>{0.5}), ParameterError);
}

TEST(ComposeMany, FoldAndAdditivity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 2.5);
  std::uniform_int_distribution<int> m(2, 6);
  int checked = 0;
  while (checked < 1000) {
    std::vector<double> th(m(rng));
    for (auto& t : th) t = u(rng);
    CompositionResult r{};
    try {
      r = compose_many(th);
    } catch (const NotCoveredError&) {
      continue;
    }
    double fold = th[0];
    for (std::size_t k = 1; k < th.size(); ++k) fold = compose2(fold, th[k]);
    ASSERT_NEAR(r.theta, fold, 1e-12 * (1 + std::abs(fold)));
    double sum = 0;
    for (double t : th) sum += t / (1 - t);
    ASSERT_NEAR(r.theta / (1 - r.theta), sum, 1e-10 * (1 + std::abs(sum)));
    ++checked;
  }
}

TEST(FirmlyNonexpansiveShift, Examples) {
  EXPECT_EQ(firmly_nonexpansive_shift(2), 1.0);
  EXPECT_EQ(firmly_nonexpansive_shift(1), 0.5);
  EXPECT_EQ(firmly_nonexpansive_shift(4), 2.0);
  EXPECT_THROW(firmly_nonexpansive_shift(0), ParameterError);

  Matrix Q(2, 2);
  Q << 1, 0.3, 0.3, 3;
  const auto f = FunctionSpec::quadratic(Q, make_vector({0.5, -1}));
  Map T = [&](const Vector& x) -> Vector { return x - 4.0 * prox(f, 1.0, x); };
  EXPECT_TRUE(conical(T, 2.0));
}
