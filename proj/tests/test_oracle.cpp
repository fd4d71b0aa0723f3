#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "conavg/oracle.hpp"
#include "test_util.hpp"

using namespace conavg;
using namespace conavg::oracle;

namespace {

SampleConfig cfg(Eigen::Index dim, std::uint64_t seed = 0, std::size_t samples = 10000) {
  SampleConfig c;
  c.dim = dim;
  c.samples = samples;
  c.seed = seed;
  return c;
}

IterationTrace synthetic(std::size_t N, double (*r)(std::size_t), RunStatus status, double tol) {
  IterationTrace t;
  for (std::size_t n = 0; n <= N; ++n) {
    IterationRecord rec;
    rec.n = n;
    rec.residual = r(n);
    rec.rate_stat = std::sqrt(double(n)) * rec.residual;
    t.records.push_back(rec);
  }
  t.status = status;
  t.tol = tol;
  t.final_x = make_vector({1.0});
  return t;
}

}  // namespace

TEST(CounterRng, PureFunctionOfSeedStreamCounter) {
  CounterRng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  for (int k = 0; k < 100; ++k) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    EXPECT_NE(va, c.next_u64());
    EXPECT_NE(va, d.next_u64());
  }
  CounterRng u(1, 0);
  double lo = 1, hi = 0, mean = 0;
  for (int k = 0; k < 100000; ++k) {
    const double v = u.uniform(0, 1);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v / 100000;
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(mean, 0.5, 0.01);
}

TEST(ConicalCheck, Examples) {
  const Map id = [](const Vector& x) { return x; };
  for (double theta : {0.1, 1.0, 3.0}) {
    const auto r = sample_conical_check(id, theta, cfg(3));
    EXPECT_TRUE(r.pass);
    EXPECT_GE(r.worst_slack, 0.0);
    EXPECT_FALSE(r.witness);
  }

  const Map neg = [](const Vector& x) -> Vector { return -x; };
  EXPECT_TRUE(sample_conical_check(neg, 1.0, cfg(2)).pass);
  const auto f = sample_conical_check(neg, 0.99, cfg(2));
  EXPECT_FALSE(f.pass);
  ASSERT_TRUE(f.witness);
  EXPECT_TRUE(f.forms_agree);
  // The witness really violates the inequality.
  const Vector d = f.witness->x - f.witness->y, e = -d;
  EXPECT_GT(e.squaredNorm(), d.squaredNorm() - (0.01 / 0.99) * (d - e).squaredNorm());

  const auto q = FunctionSpec::quadratic(Matrix::Identity(2, 2), Vector::Zero(2));
  const Map half = [&](const Vector& x) { return prox(q, 1.0, x); };
  // x/2 = (1−θ)x + θ(−x) at θ = 1/4, its smallest constant.
  EXPECT_TRUE(sample_conical_check(half, 0.5, cfg(2)).pass);
  EXPECT_TRUE(sample_conical_check(half, 0.25, cfg(2)).pass);
  EXPECT_FALSE(sample_conical_check(half, 0.225, cfg(2)).pass);
}

TEST(ConicalCheck, DeterministicAcrossJobs) {
  const Map T = [](const Vector& x) -> Vector { return -0.3 * x + x.cwiseAbs() * 0.1; };
  auto c1 = cfg(3, 7, 20000);
  auto c4 = c1;
  c4.jobs = 4;
  const auto a = sample_conical_check(T, 0.6, c1);
  const auto b = sample_conical_check(T, 0.6, c4);
  EXPECT_EQ(a.worst_slack, b.worst_slack);
  EXPECT_EQ(a.n_samples, 20000u);
  EXPECT_EQ(b.n_samples, 20000u);
  EXPECT_EQ(a.pass, b.pass);
}

TEST(MonotonicityCheck, Examples) {
  const auto two = OperatorSpec::scaled_identity(2);
  const auto r = sample_monotonicity_check(two, 0.5, MonotonicityKind::Comonotone, cfg(2));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.worst_slack, 0.0, 1e-12);
  EXPECT_FALSE(sample_monotonicity_check(two, 0.6, MonotonicityKind::Comonotone, cfg(2)).pass);
  const auto rot = OperatorSpec::affine((Matrix(2, 2) << 0, 1, -1, 0).finished(), Vector::Zero(2));
  EXPECT_TRUE(sample_monotonicity_check(rot, 0.0, MonotonicityKind::Monotone, cfg(2)).pass);
}

TEST(BruteProx, Examples) {
  EXPECT_NEAR(brute_prox(FunctionSpec::l1(1), 1, make_vector({2.5}))(0), 1.5, 1e-6);
  const auto box = FunctionSpec::box_indicator(make_vector({0}), make_vector({1}));
  EXPECT_NEAR(brute_prox(box, 1, make_vector({-3}))(0), 0.0, 1e-6);
  EXPECT_NEAR(brute_prox(FunctionSpec::weakly_convex_l1(1, 0.5), 1, make_vector({3}))(0), 4.0, 1e-6);
  EXPECT_THROW(brute_prox(FunctionSpec::weakly_convex_l1(1, 0.5), 2, make_vector({3})), ParameterError);
  const Matrix full = (Matrix(2, 2) << 2, 1, 1, 2).finished();
  EXPECT_THROW(brute_prox(FunctionSpec::quadratic(full, Vector::Zero(2)), 1, make_vector({1, 1})), ParameterError);
}

TEST(BruteProx, BoundaryMinimizerWidensThenFails) {
  GridOptions o;
  o.radius = 0.2;  // minimizer at 1.5 is outside [2.3, 2.7]; one widening to 2 reaches it
  EXPECT_NEAR(brute_prox(FunctionSpec::l1(1), 1, make_vector({2.5}), o)(0), 1.5, 1e-6);
  o.radius = 0.01;  // widening to 0.1 is not enough
  EXPECT_THROW(brute_prox(FunctionSpec::l1(1), 1, make_vector({2.5}), o), ParameterError);
}

TEST(AnalyticZero, Examples) {
  const auto z = analytic_zero(OperatorSpec::scaled_identity(-0.5), nullptr, 3);
  ASSERT_TRUE(z);
  EXPECT_EQ(*z, Vector::Zero(3));

  const auto A = OperatorSpec::subdifferential(FunctionSpec::l1(1));
  const auto B = OperatorSpec::grad_quadratic(Matrix::Identity(1, 1), make_vector({-3}));
  EXPECT_EQ(*analytic_zero(A, &B, 1), make_vector({2}));
  const auto g = FunctionSpec::quadratic(Matrix::Identity(1, 1), make_vector({-3}));
  EXPECT_NEAR(grid_argmin(FunctionSpec::l1(1), g, 1)(0), 2.0, 1e-6);

  // |z| − 0.25z² + (z−1)² (constant dropped): stationarity 1 − 0.5z + 2z − 2 = 0 → z = 2/3.
  const auto f = FunctionSpec::weakly_convex_l1(1, 0.5);
  const auto q = FunctionSpec::quadratic(2 * Matrix::Identity(1, 1), make_vector({-2}));
  const double grid = grid_argmin(f, q, 1)(0);
  EXPECT_NEAR(grid, 2.0 / 3.0, 1e-6);
  const auto Bq = OperatorSpec::subdifferential(q);
  const auto exact = analytic_zero(OperatorSpec::subdifferential(f), &Bq, 1);
  ASSERT_TRUE(exact);
  EXPECT_NEAR((*exact)(0), grid, 1e-6);
}

TEST(AnalyticZero, Unknown) {
  const auto sing = OperatorSpec::affine((Matrix(2, 2) << 1, 1, 1, 1).finished(), make_vector({1, 0}));
  EXPECT_FALSE(analytic_zero(sing, nullptr, 2));
  const auto l1 = OperatorSpec::subdifferential(FunctionSpec::l1(1));
  EXPECT_FALSE(analytic_zero(l1, &l1, 2));
  const auto neg = OperatorSpec::scaled_identity(-1);
  EXPECT_FALSE(analytic_zero(l1, &neg, 2));
}

TEST(AnalyticZero, MatchesGridOnSeparableSums) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-5, 5), pos(0.6, 3);
  for (int k = 0; k < 50; ++k) {
    const Vector c = testutil::random_vector(rng, 3, -5, 5);
    const Vector q = testutil::random_vector(rng, 3, 0.6, 3);
    const auto g = FunctionSpec::quadratic(q.asDiagonal(), c);
    const std::vector<FunctionSpec> fs = {
        FunctionSpec::l1(pos(rng)), FunctionSpec::weakly_convex_l1(pos(rng), 0.5),
        FunctionSpec::box_indicator(make_vector({-1, -2, 0}), make_vector({1, 0.5, 4}))};
    const OperatorSpec B = OperatorSpec::subdifferential(g);
    for (const auto& f : fs) {
      const auto z = analytic_zero(OperatorSpec::subdifferential(f), &B, 3);
      ASSERT_TRUE(z) << f.name();
      const Vector grid = grid_argmin(f, g, 3);
      ASSERT_LE((*z - grid).cwiseAbs().maxCoeff(), 1e-6) << f.name();
    }
  }
}

TEST(RateCheck, SyntheticTraces) {
  const auto geo = synthetic(10000, [](std::size_t n) { return std::pow(0.99, double(n)); }, RunStatus::MaxIter, 0);
  const auto g = rate_check(geo, 0);
  EXPECT_TRUE(g.pass);
  EXPECT_TRUE(g.residual_monotone);
  ASSERT_EQ(g.checkpoints.size(), 3u);
  EXPECT_GT(g.checkpoints[0].value, g.checkpoints[1].value);

  // √m·0.999^m rises until m = 500, so the running minimum is flat from 10² to 10³.
  const auto slow = synthetic(10000, [](std::size_t n) { return std::pow(0.999, double(n)); }, RunStatus::MaxIter, 0);
  const auto sl = rate_check(slow, 0);
  EXPECT_FALSE(sl.pass);
  EXPECT_EQ(sl.checkpoints[0].value, sl.checkpoints[1].value);

  const auto flat = synthetic(10000, [](std::size_t) { return 1.0; }, RunStatus::MaxIter, 1e-8);
  EXPECT_FALSE(rate_check(flat, 0).pass);

  const auto fast = synthetic(40, [](std::size_t n) { return std::pow(0.5, double(n)); }, RunStatus::Converged, 1e-12);
  EXPECT_TRUE(rate_check(fast, 0).pass);

  const auto bumpy =
      synthetic(10000, [](std::size_t n) { return (n % 2 ? 2.0 : 1.0) / double(n + 1); }, RunStatus::MaxIter, 0);
  EXPECT_FALSE(rate_check(bumpy, 0).residual_monotone);

  const auto shrt = synthetic(50, [](std::size_t) { return 1.0; }, RunStatus::MaxIter, 1e-8);
  EXPECT_THROW(rate_check(shrt, 0), ParameterError);
  EXPECT_THROW(rate_check(geo, 20000), ParameterError);
}

TEST(AdmissibleOrder, Examples) {
  const auto id = find_admissible_order(std::vector<double>{0.3, 0.9, 0.5});
  ASSERT_TRUE(id);
  EXPECT_EQ(*id, (std::vector<std::size_t>{0, 1, 2}));
  const auto a = find_admissible_order(std::vector<double>{1.5, 0.25});
  ASSERT_TRUE(a);
  EXPECT_EQ(*a, (std::vector<std::size_t>{0, 1}));
  EXPECT_FALSE(find_admissible_order(std::vector<double>{1.5, 1.5}));
  EXPECT_THROW(find_admissible_order(std::vector<double>(9, 0.5)), ParameterError);
  EXPECT_THROW(find_admissible_order(std::vector<double>{1.0, 0.5}), ParameterError);
}

TEST(AdmissibleOrder, AgreesWithGivenOrder) {
  // Every partial sum of θᵢ/(1−θᵢ) must avoid [−1, 0], which forces at most one
  // θᵢ > 1 and a total below −1; neither depends on the order.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  int feasible = 0;
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> th(2 + k % 5);
    for (auto& t : th) t = u(rng);
    bool given = true;
    try {
      compose_many(th);
    } catch (const ChainConditionError&) {
      given = false;
    }
    const auto order = find_admissible_order(th);
    ASSERT_EQ(order.has_value(), given);
    if (order) {
      ++feasible;
      for (std::size_t i = 0; i < order->size(); ++i) ASSERT_EQ((*order)[i], i);
    }
  }
  EXPECT_GT(feasible, 100);
}
