#include <gtest/gtest.h>

#include <random>

#include "conavg/oracle.hpp"
#include "conavg/resolvents.hpp"
#include "test_util.hpp"

using namespace conavg;

namespace {

oracle::SampleConfig cfg(Eigen::Index dim, std::uint64_t seed = 0) {
  oracle::SampleConfig c;
  c.dim = dim;
  c.samples = 10000;
  c.tol = 1e-8;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(Resolvent, Examples) {
  EXPECT_EQ(resolvent(OperatorSpec::scaled_identity(2), 1, make_vector({3})), make_vector({1}));
  EXPECT_EQ(resolvent(OperatorSpec::scaled_identity(-0.5), 4, make_vector({2})), make_vector({-2}));

  const auto l1 = OperatorSpec::subdifferential(FunctionSpec::l1(1));
  const Vector x = make_vector({3, -1, 0.5});
  const Vector expected = oracle::brute_prox(FunctionSpec::l1(1), 2, x);
  const Vector got = resolvent(l1, 2, x);
  EXPECT_LE((got - expected).norm(), 1e-6);
  EXPECT_EQ(got, make_vector({1, 0, 0}));
}

TEST(Resolvent, PreconditionNamesInequality) {
  // a = −0.5: monotone α = −0.5, comonotone α = −2. γ = 2 fails both.
  try {
    Resolvent(OperatorSpec::scaled_identity(-0.5), 2.0);
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("gamma + alpha"), std::string::npos);
  }
  EXPECT_THROW(Resolvent(OperatorSpec::scaled_identity(1), 0.0), ParameterError);
  EXPECT_THROW(prox(FunctionSpec::weakly_convex_l1(1, 0.5), 2.0, make_vector({1})), ParameterError);
}

TEST(Resolvent, IdentityOnPointwiseOperators) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 30; ++k) {
    const Eigen::Index n = 1 + k % 6;
    Matrix G = Matrix::Random(n, n);
    std::vector<OperatorSpec> ops = {
        OperatorSpec::affine(G + n * Matrix::Identity(n, n), testutil::random_vector(rng, n)),
        OperatorSpec::grad_quadratic(G * G.transpose(), testutil::random_vector(rng, n)),
        OperatorSpec::scaled_identity(-0.5),
    };
    for (const auto& op : ops) {
      const double gamma = op.get_if<ScaledIdentityOp>() ? 4.0 : 0.7;
      Resolvent J(op, gamma);
      for (int s = 0; s < 34; ++s) {
        const Vector x = testutil::random_vector(rng, n);
        const Vector y = J(x);
        const Vector back = y + gamma * evaluate(op, y);
        ASSERT_LE((back - x).norm(), 1e-10 * (1 + x.norm())) << op.name();
      }
    }
  }
}

TEST(Resolvent, FixedPointsAreZeros) {
  Matrix M(2, 2);
  M << 3, 1, -1, 2;
  const Vector b = make_vector({1, -4});
  const auto op = OperatorSpec::affine(M, b);
  const Vector z = M.partialPivLu().solve(-b);
  EXPECT_LE((resolvent(op, 1.3, z) - z).norm(), 1e-10);
}

TEST(Resolvent, SingularSystemRejected) {
  Matrix M(2, 2);
  M << -1, 0, 0, 1;  // monotone α = −1, so γ = 1 breaks 1 + γα > 0
  EXPECT_THROW(Resolvent(OperatorSpec::affine(M, Vector::Zero(2)), 1.0), ParameterError);
}

TEST(Resolvent, WeaklyConvexNearLimitWarns) {
  const auto op = OperatorSpec::subdifferential(FunctionSpec::weakly_convex_l1(1, 0.5));
  EXPECT_TRUE(Resolvent(op, 1.0).warnings().empty());
  EXPECT_FALSE(Resolvent(op, 2.0 - 1e-7).warnings().empty());
}

TEST(Prox, Examples) {
  EXPECT_EQ(prox(FunctionSpec::l1(1), 1, make_vector({2.5})), make_vector({1.5}));
  const auto box = FunctionSpec::box_indicator(make_vector({0}), make_vector({1}));
  EXPECT_EQ(prox(box, 1, make_vector({7})), make_vector({1}));
  EXPECT_EQ(prox(box, 123, make_vector({7})), make_vector({1}));
  const auto wcl1 = FunctionSpec::weakly_convex_l1(1, 0.5);
  EXPECT_EQ(prox(wcl1, 1, make_vector({3})), make_vector({4}));
  EXPECT_NEAR(oracle::brute_prox(wcl1, 1, make_vector({3}))(0), 4.0, 1e-6);
}

TEST(Prox, AgreesWithBruteForce) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ug(0.05, 3.0);
  Matrix Q = Vector(make_vector({0.5, 2, 1})).asDiagonal();
  const std::vector<FunctionSpec> fs = {
      FunctionSpec::quadratic(Q, make_vector({1, -2, 0.3})),
      FunctionSpec::l1(0.7),
      FunctionSpec::weakly_convex_l1(1.2, 0.4),
      FunctionSpec::box_indicator(make_vector({-1, 0, 2}), make_vector({1, 0.5, 5})),
  };
  for (const auto& f : fs) {
    for (int k = 0; k < 1000; ++k) {
      double gamma = ug(rng);
      if (1 + gamma * f.alpha_convex() <= 0.05) gamma = 0.9 / -f.alpha_convex() * 0.9;
      const Vector x = testutil::random_vector(rng, 3);
      const Vector a = prox(f, gamma, x);
      const Vector b = oracle::brute_prox(f, gamma, x);
      ASSERT_LE((a - b).cwiseAbs().maxCoeff(), 1e-5) << f.name() << " gamma=" << gamma;
    }
  }
}

TEST(RelaxedResolvent, Examples) {
  const auto op = OperatorSpec::scaled_identity(2);
  const Vector x = make_vector({3});
  EXPECT_EQ(relaxed_resolvent(op, 1, 0, x), x);
  EXPECT_EQ(relaxed_resolvent(op, 1, 1, x), resolvent(op, 1, x));
  EXPECT_EQ(relaxed_resolvent(op, 1, 2, x), make_vector({-1}));
  EXPECT_THROW(relaxed_resolvent(op, 1, -0.5, x), ParameterError);
}

TEST(ReflectedResolvent, Examples) {
  EXPECT_EQ(reflected_resolvent(OperatorSpec::scaled_identity(2), 1, make_vector({3})), make_vector({-1}));
  EXPECT_EQ(reflected_resolvent(OperatorSpec::subdifferential(FunctionSpec::l1(1)), 1, make_vector({0})),
            make_vector({0}));
  const auto box = OperatorSpec::subdifferential(FunctionSpec::box_indicator(make_vector({-1}), make_vector({1})));
  EXPECT_EQ(reflected_resolvent(box, 1, make_vector({3})), make_vector({-1}));
}

TEST(CertResolventComonotone, ExamplesAndSoundness) {
  EXPECT_EQ(cert_resolvent_comonotone(0, 3.7, 1).theta, 0.5);
  EXPECT_EQ(cert_resolvent_comonotone(-2, 4, 1).theta, 1.0);
  EXPECT_EQ(cert_resolvent_comonotone(1, 1, 2).theta, 0.5);
  EXPECT_THROW(cert_resolvent_comonotone(-2, 2, 1), ParameterError);

  // ScaledIdentity(1) is 1-comonotone.
  const auto op = OperatorSpec::scaled_identity(1);
  const double theta = cert_resolvent_comonotone(1, 1, 2).theta;
  Map R = [&](const Vector& x) { return relaxed_resolvent(op, 1, 2, x); };
  EXPECT_TRUE(oracle::sample_conical_check(R, theta, cfg(2)).pass);

  // Cohypomonotone affine: symmetric with eigenvalues {−0.4, 2} is α = −2.5 comonotone.
  Matrix M(2, 2);
  M << -0.4, 0, 0, 2;
  const auto aff = OperatorSpec::affine(M, make_vector({1, 1}));
  const double alpha = *certify_comonotone(aff);
  EXPECT_DOUBLE_EQ(alpha, -2.5);
  for (double lam : {0.5, 1.0, 1.7}) {
    const double gamma = 3.0;
    const double th = cert_resolvent_comonotone(alpha, gamma, lam).theta;
    Map Rl = [&](const Vector& x) { return relaxed_resolvent(aff, gamma, lam, x); };
    EXPECT_TRUE(oracle::sample_conical_check(Rl, th, cfg(2, 1)).pass) << lam;
    EXPECT_FALSE(oracle::sample_conical_check(Rl, 0.9 * th, cfg(2, 1)).pass) << lam;
  }
}

TEST(CertResolventMonotone, ExamplesAndSoundness) {
  // α = 0, λ = 2: −R is nonexpansive, and A = 0 (R = Id) shows θ = 1 is tight.
  const auto c0 = cert_resolvent_monotone(0, 2.5, 2);
  EXPECT_EQ(c0.omega, -1.0);
  EXPECT_EQ(c0.theta, 1.0);
  const auto zero = OperatorSpec::scaled_identity(0);
  Map negR = [&](const Vector& x) -> Vector { return -reflected_resolvent(zero, 2.5, x); };
  EXPECT_TRUE(oracle::sample_conical_check(negR, c0.theta, cfg(2)).pass);
  EXPECT_FALSE(oracle::sample_conical_check(negR, 0.9 * c0.theta, cfg(2)).pass);
  const auto c1 = cert_resolvent_monotone(1, 1, 2);
  EXPECT_EQ(c1.omega, -1.0);
  EXPECT_EQ(c1.theta, 0.5);
  EXPECT_THROW(cert_resolvent_monotone(0, 1, 1), ParameterError);
  EXPECT_THROW(cert_resolvent_monotone(-1, 1, 2), ParameterError);

  // Weakly convex l1: α = −0.5; γ = 1, λ = 3.
  const auto op = OperatorSpec::subdifferential(FunctionSpec::weakly_convex_l1(1, 0.5));
  const auto c = cert_resolvent_monotone(-0.5, 1, 3);
  Map S = [&](const Vector& x) -> Vector { return c.omega * relaxed_resolvent(op, 1, 3, x); };
  EXPECT_TRUE(oracle::sample_conical_check(S, c.theta, cfg(3)).pass);
}

TEST(CertForwardStep, ExamplesAndSoundness) {
  EXPECT_EQ(cert_forward_step(0.5, 1).theta, 1.0);
  EXPECT_EQ(cert_forward_step(2, 2).theta, 0.5);
  EXPECT_EQ(cert_forward_step(1, 3).theta, 1.5);
  EXPECT_THROW(cert_forward_step(0, 1), ParameterError);
  EXPECT_THROW(cert_forward_step(1, -1), ParameterError);

  // B = ∇ of a quadratic with λmax = 1/β = 2.
  Matrix Q(2, 2);
  Q << 2, 0, 0, 0.7;
  const auto B = OperatorSpec::grad_quadratic(Q, make_vector({1, 2}));
  const double beta = *certify_comonotone(B);
  EXPECT_DOUBLE_EQ(beta, 0.5);
  Map F = [&](const Vector& x) -> Vector { return x - 3 * beta * evaluate(B, x); };
  EXPECT_TRUE(oracle::sample_conical_check(F, cert_forward_step(beta, 3 * beta).theta, cfg(2)).pass);
}

TEST(ComonotoneGraphInequality, Examples) {
  const Vector x = make_vector({1, 2});
  EXPECT_EQ(comonotone_graph_inequality(0.5, 1, x, x, x, x), 0.0);

  const auto op = OperatorSpec::scaled_identity(2);
  std::mt19937_64 rng(4);
  double worst = 0, worst_inflated = 0;
  for (int k = 0; k < 10000; ++k) {
    const Vector a = testutil::random_vector(rng, 2);
    const Vector b = testutil::random_vector(rng, 2);
    const Vector ja = resolvent(op, 1, a), jb = resolvent(op, 1, b);
    worst = std::min(worst, comonotone_graph_inequality(0.5, 1, a, b, ja, jb));
    worst_inflated = std::min(worst_inflated, comonotone_graph_inequality(0.6, 1, a, b, ja, jb));
  }
  EXPECT_GE(worst, -1e-10);
  EXPECT_LT(worst_inflated, -1e-6);
  EXPECT_THROW(comonotone_graph_inequality(0, 1, x, make_vector({1}), x, x), DimensionError);
}
