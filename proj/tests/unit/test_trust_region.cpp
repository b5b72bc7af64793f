#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "expect_error.hpp"
#include "multishape/trust_region.hpp"

namespace ms = multishape;

namespace {

Eigen::MatrixXd random_spd(int n, std::mt19937& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  }
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

Eigen::VectorXd random_vector(int n, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

Eigen::VectorXd sample_ball(int n, double radius, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd d = random_vector(n, rng);
  return d.normalized() * radius * std::pow(u(rng), 1.0 / n);
}

}  // namespace

TEST(TrustRegionStep, IdentityHessianTakesNewtonStepInside) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(4);
  g[0] = 2.0;
  const Eigen::VectorXd p = ms::trust_region_step(g, Eigen::MatrixXd::Identity(4, 4), 10.0);
  EXPECT_TRUE(p.isApprox(-g));
}

TEST(TrustRegionStep, IdentityHessianIsClippedToTheBoundary) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(4);
  g[0] = 2.0;
  const Eigen::VectorXd p = ms::trust_region_step(g, Eigen::MatrixXd::Identity(4, 4), 1.0);
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(4);
  expected[0] = -1.0;
  EXPECT_LE((p - expected).norm(), 1e-12);
}

TEST(TrustRegionStep, ZeroGradientSignalsStationarity) {
  EXPECT_ERROR_CODE(ms::trust_region_step(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), 1.0),
                    ms::ErrorCode::kZeroGradient);
}

TEST(TrustRegionStep, MismatchedDimensionsAreRejected) {
  EXPECT_ERROR_CODE(ms::trust_region_step(Eigen::VectorXd::Ones(3), Eigen::MatrixXd::Identity(2, 2), 1.0),
                    ms::ErrorCode::kDimensionMismatch);
}

TEST(TrustRegionStep, BeatsDenseBallSamplingOnSpdProblems) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> radius(0.05, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd h = random_spd(5, rng);
    const Eigen::VectorXd g = random_vector(5, rng, 2.0);
    const double delta = radius(rng);
    const Eigen::VectorXd p = ms::trust_region_step(g, h, delta);
    EXPECT_LE(p.norm(), delta);
    const double mp = ms::model_decrease(g, h, p);
    double best = 0.0;
    for (int s = 0; s < 10000; ++s) {
      best = std::min(best, ms::model_decrease(g, h, sample_ball(5, delta, rng)));
    }
    EXPECT_LE(mp, best + 1e-6) << "trial " << trial;
  }
}

TEST(TrustRegionStep, NeverWorseThanDoglegOrCauchy) {
  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> radius(0.01, 4.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 6;
    const Eigen::MatrixXd h = random_spd(n, rng);
    const Eigen::VectorXd g = random_vector(n, rng);
    const double delta = radius(rng);
    const double mp = ms::model_decrease(g, h, ms::trust_region_step(g, h, delta));
    const Eigen::VectorXd d = ms::dogleg_step(g, h, delta);
    EXPECT_LE(d.norm(), delta * (1.0 + 1e-12));
    EXPECT_LE(mp, ms::model_decrease(g, h, d) + 1e-12);
    EXPECT_LE(ms::model_decrease(g, h, d), ms::model_decrease(g, h, ms::cauchy_point(g, h, delta)) + 1e-12);
  }
}

TEST(TrustRegionStep, BoundarySolutionSatisfiesOptimalityConditions) {
  // (H + mu I) p = -g with mu >= 0 and |p| = delta characterizes the minimizer.
  std::mt19937 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd h = random_spd(4, rng);
    const Eigen::VectorXd g = random_vector(4, rng, 5.0);
    const double delta = 0.05;
    const Eigen::VectorXd p = ms::trust_region_step(g, h, delta);
    ASSERT_NEAR(p.norm(), delta, 1e-9);
    const Eigen::VectorXd r = h * p + g;  // = -mu p
    const double mu = -r.dot(p) / p.squaredNorm();
    EXPECT_GE(mu, 0.0);
    EXPECT_LE((r + mu * p).norm(), 1e-7 * g.norm());
  }
}

TEST(DoglegStep, RejectsIndefiniteHessians) {
  EXPECT_ERROR_CODE(ms::dogleg_step(Eigen::VectorXd::Ones(2), -Eigen::MatrixXd::Identity(2, 2), 1.0),
                    ms::ErrorCode::kInvalidArgument);
}

TEST(TrustRegionStep, IndefiniteHessianUsesTheCauchyPoint) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(3, 3);
  h(1, 1) = -2.0;
  const Eigen::VectorXd g = Eigen::Vector3d(1.0, 1.0, 0.5);
  const Eigen::VectorXd p = ms::trust_region_step(g, h, 0.7);
  EXPECT_LE((p - ms::cauchy_point(g, h, 0.7)).norm(), 1e-14);
  EXPECT_LE(p.norm(), 0.7);
  EXPECT_LT(ms::model_decrease(g, h, p), 0.0);
}

TEST(CauchyPoint, HandEvaluatedFormula) {
  // g'Hg > 0: tau = min(|g|^3 / (delta g'Hg), 1).
  const Eigen::VectorXd g = Eigen::Vector2d(3.0, 4.0);  // |g| = 5
  const Eigen::MatrixXd h = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  // g'Hg = 50, delta = 10: tau = 125 / 500 = 0.25, p = -0.25 * 10 * g / 5
  EXPECT_LE((ms::cauchy_point(g, h, 10.0) - (-0.5 * g)).norm(), 1e-14);
  // delta = 1: tau = 125 / 50 > 1, so p = -g / |g|
  EXPECT_LE((ms::cauchy_point(g, h, 1.0) - (-g / 5.0)).norm(), 1e-14);
  // negative curvature goes to the boundary
  EXPECT_LE((ms::cauchy_point(g, -h, 2.0) - (-2.0 * g / 5.0)).norm(), 1e-14);
}

TEST(TrustRegionStep, StepNeverLeavesTheBall) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> radius(1e-3, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 8;
    Eigen::MatrixXd h = random_spd(n, rng);
    if (trial % 2 == 1) h -= 3.0 * Eigen::MatrixXd::Identity(n, n);
    const double delta = radius(rng);
    const Eigen::VectorXd p = ms::trust_region_step(random_vector(n, rng), h, delta);
    EXPECT_LE(p.norm(), delta);
  }
}

TEST(Sr1, EmptyHistoryIsIdentity) {
  EXPECT_EQ(ms::hessian_approx(4, {}), Eigen::MatrixXd::Identity(4, 4));
}

TEST(Sr1, RecoversAQuadraticsHessian) {
  std::mt19937 rng(9);
  const int n = 6;
  const Eigen::MatrixXd a = random_spd(n, rng);
  std::vector<ms::SecantPair> history;
  for (int i = 0; i < n + 2; ++i) {
    const Eigen::VectorXd s = random_vector(n, rng);
    history.push_back({s, 2.0 * a * s});  // gradient of x'Ax changes by 2As
  }
  const Eigen::MatrixXd h = ms::hessian_approx(n, history);
  EXPECT_LE((h - 2.0 * a).norm(), 0.1 * (2.0 * a).norm());
  EXPECT_LE((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Sr1, SafeguardSkipsConsistentPairs) {
  ms::Sr1Hessian sr1(3);
  const Eigen::VectorXd s = Eigen::Vector3d(1.0, 2.0, 3.0);
  EXPECT_FALSE(sr1.update(s, s));  // y = Hs already
  EXPECT_EQ(sr1.matrix(), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(sr1.update(s, 2.0 * s));
  EXPECT_LE((sr1.matrix() * s - 2.0 * s).norm(), 1e-12);  // secant condition
}

TEST(ModelDecrease, HandEvaluated) {
  const Eigen::VectorXd g = Eigen::Vector2d(1.0, -2.0);
  const Eigen::MatrixXd h = (Eigen::Matrix2d() << 2.0, 1.0, 1.0, 4.0).finished();
  const Eigen::VectorXd p = Eigen::Vector2d(0.5, 1.0);
  // g'p = -1.5; p'Hp = 0.5 + 1 + 4 = 5.5
  EXPECT_DOUBLE_EQ(ms::model_decrease(g, h, p), -1.5 + 0.5 * 5.5);
}
