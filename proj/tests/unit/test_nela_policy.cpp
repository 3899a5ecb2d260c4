#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "../oracles.hpp"
#include "nela/environment.hpp"
#include "nela/errors.hpp"
#include "nela/graph.hpp"
#include "nela/nela_policy.hpp"

namespace nela {
namespace {

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

InfluenceMatrix random_graph(int n, int d, Rng& rng) {
  const auto gt = generate_ground_truth(n, d, 0, 0.0, 1, rng);
  return build_similarity_graph(gt.theta, 0.5);
}

TEST(MixedFeature, IdentityGraphPlacesArmInOwnBlock) {
  Eigen::Vector3d x(0.1, -0.2, 0.3);
  const auto z = mixed_feature(x, 1, InfluenceMatrix::identity(3));
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(9);
  expected.segment(3, 3) = x;
  EXPECT_EQ(z, expected);
}

TEST(MixedFeature, UniformPairSplitsArm) {
  Eigen::Matrix2d m;
  m << 0.5, 0.5, 0.5, 0.5;
  const auto w = InfluenceMatrix::from_matrix(m);
  Eigen::Vector2d x(0.8, -0.4);
  const auto z = mixed_feature(x, 0, w);
  EXPECT_TRUE(z.segment(0, 2).isApprox(0.5 * x));
  EXPECT_TRUE(z.segment(2, 2).isApprox(0.5 * x));
}

TEST(MixedFeature, InnerProductIdentity) {
  Rng rng(1);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 3 + rep % 5;
    const int d = 2 + rep % 4;
    const auto w = random_graph(n, d, rng);
    Eigen::MatrixXd theta(d, n);
    for (int i = 0; i < theta.size(); ++i) theta.data()[i] = normal(rng);
    Eigen::VectorXd x(d);
    for (int k = 0; k < d; ++k) x(k) = normal(rng);
    const int u = rep % n;
    const Eigen::MatrixXd tw = theta * w.matrix();
    EXPECT_NEAR(mixed_feature(x, u, w).dot(vec(theta)), x.dot(tw.col(u)), 1e-12);
  }
}

TEST(Alpha, FreshStateAndDeltaOne) {
  NelaConfig cfg;
  cfg.s_v = 3.0;
  NelaState state(2, 3, cfg.lambda1);
  const double expected = (cfg.sigma + 2.0 * cfg.s_v) * std::sqrt(-2.0 * std::log(cfg.delta)) + 1.0;
  EXPECT_NEAR(alpha(state, cfg), expected, 1e-12);
  cfg.delta = 1.0;
  EXPECT_NEAR(alpha(state, cfg), 1.0, 1e-15);
}

TEST(Alpha, AfterOneUpdate) {
  NelaConfig cfg;
  cfg.s_v = 0.5;
  cfg.residual_enabled = false;
  NelaState state(2, 1, 1.0);
  update(state, cfg, 0, Eigen::VectorXd::Ones(1), 0.0, InfluenceMatrix::identity(2));
  EXPECT_NEAR(state.log_det_a, std::log(2.0), 1e-15);
  const double expected =
      (cfg.sigma + 2.0 * cfg.s_v) * std::sqrt(std::log(2.0) - 2.0 * std::log(cfg.delta)) + 1.0;
  EXPECT_NEAR(alpha(state, cfg), expected, 1e-12);
}

TEST(Update, ShermanMorrisonAgainstDenseInverse) {
  Rng rng(2);
  const int n = 5;
  const int d = 4;
  const auto w = random_graph(n, d, rng);
  NelaConfig cfg;
  cfg.s_v = 1.0;
  NelaState state(n, d, cfg.lambda1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n * d, n * d);
  double prev_alpha = alpha(state, cfg);
  for (int round = 0; round < 200; ++round) {
    const int u = sample_user(n, rng);
    const auto arms = sample_arm_set(1, d, 0.7, rng);
    const Eigen::VectorXd x = arms.arm(0);
    const Eigen::VectorXd z = mixed_feature(x, u, w);
    a += z * z.transpose();
    update(state, cfg, u, x, 0.3, w);
    if (round == 0) {
      EXPECT_LE((state.a_inv - oracle::dense_inverse(a)).norm(), 1e-10);
    }
    const double cur = alpha(state, cfg);
    EXPECT_GE(cur, prev_alpha);
    prev_alpha = cur;
  }
  EXPECT_LE((state.a - a).norm(), 1e-12);
  EXPECT_LE((state.a_inv - oracle::dense_inverse(a)).norm(), 1e-7);
  EXPECT_LE((state.a_inv * a - Eigen::MatrixXd::Identity(n * d, n * d)).norm(), 1e-8);
  EXPECT_NEAR(state.log_det_a, oracle::log_det(a), 1e-6);
  EXPECT_LE((state.theta_hat - state.a_inv * state.b).norm(), 1e-12);
}

TEST(Update, WarmupKeepsResidualAtZero) {
  Rng rng(3);
  const int n = 4;
  const int d = 3;
  const auto w = random_graph(n, d, rng);
  NelaConfig cfg;
  cfg.warmup_rounds = 30;
  NelaState state(n, d, cfg.lambda1);
  for (int round = 0; round < 30; ++round) {
    const auto arms = sample_arm_set(1, d, 0.0, rng);
    update(state, cfg, round % n, arms.arm(0), 50.0, w);
    EXPECT_EQ(state.v_hat.norm(), 0.0);
    EXPECT_TRUE(state.detected.empty());
  }
  EXPECT_EQ(state.history.size(), 30);
  EXPECT_EQ(cfg.effective_warmup(12), 30);
  cfg.warmup_rounds = -1;
  EXPECT_EQ(cfg.effective_warmup(500), 70);
}

TEST(Update, HistoryTargetsUseFreshTheta) {
  Rng rng(4);
  const int n = 3;
  const int d = 2;
  const auto w = random_graph(n, d, rng);
  NelaConfig cfg;
  cfg.warmup_rounds = 1000;
  NelaState state(n, d, cfg.lambda1);
  for (int round = 0; round < 10; ++round) {
    const auto arms = sample_arm_set(1, d, 0.0, rng);
    const int u = round % n;
    update(state, cfg, u, arms.arm(0), 1.0, w);
    const Eigen::VectorXd tw = state.theta_matrix() * w.matrix().col(u);
    EXPECT_NEAR(state.history.rows().back().target, 1.0 - arms.arm(0).dot(tw), 1e-14);
  }
}

TEST(Detection, SupportMapsToUsers) {
  // Plant a residual on user 1 only and feed noiseless rewards.
  const int n = 3;
  const int d = 10;
  Rng rng(5);
  GroundTruth gt = generate_ground_truth(n, d, 0, 0.0, 1, rng);
  gt.v(2, 1) = 6.0;
  gt.anomalies = {1};
  const auto w = InfluenceMatrix::identity(n);
  NelaConfig cfg;
  cfg.alpha_override = 0.0;
  cfg.warmup_rounds = 20;
  NelaState state(n, d, cfg.lambda1);
  for (int round = 0; round < 300; ++round) {
    const int u = round % n;
    const auto arms = sample_arm_set(1, d, 0.0, rng);
    update(state, cfg, u, arms.arm(0), expected_reward(gt, w, u, arms.arm(0)), w);
  }
  EXPECT_EQ(state.detected, std::vector<int>{1});
  for (int j : state.support.j1) EXPECT_EQ(j / d, 1);
  EXPECT_NE(std::find(state.support.j1.begin(), state.support.j1.end(), d + 2),
            state.support.j1.end());
}

TEST(Select, SingleArmAndFreshState) {
  Rng rng(6);
  const auto w = random_graph(4, 3, rng);
  NelaConfig cfg;
  NelaState state(4, 3, cfg.lambda1);
  EXPECT_EQ(select_arm(state, cfg, 2, sample_arm_set(1, 3, 0.7, rng), w), 0);

  ArmSet arms{Eigen::MatrixXd(3, 3)};
  arms.arms << 0.1, 0.5, 0.2, 0.1, -0.5, 0.2, 0.1, 0.1, 0.2;
  const Eigen::VectorXd norms = arms.arms.colwise().norm();
  int longest = 0;
  norms.maxCoeff(&longest);
  EXPECT_EQ(select_arm(state, cfg, 1, arms, w), longest);
  EXPECT_THROW(select_arm(state, cfg, 1, ArmSet{Eigen::MatrixXd(3, 0)}, w), InputError);
}

TEST(Select, OracleEstimatesGiveZeroRegret) {
  Rng rng(7);
  const int n = 6;
  const int d = 4;
  const auto gt = generate_ground_truth(n, d, 2, 3.0, 1, rng);
  const auto w = build_similarity_graph(gt.theta, 0.5);
  NelaConfig cfg;
  cfg.alpha_override = 0.0;
  NelaState state(n, d, cfg.lambda1);
  state.theta_hat = vec(gt.theta);
  state.v_hat = vec(gt.v);
  for (int round = 0; round < 300; ++round) {
    const int u = sample_user(n, rng);
    const auto arms = sample_arm_set(20, d, 0.7, rng);
    const int m = select_arm(state, cfg, u, arms, w);
    EXPECT_EQ(play_round(gt, w, arms, u, m, 0.0, rng).instant_regret, 0.0);
  }
}

TEST(Select, ArgmaxInvariantUnderShiftAndScale) {
  Rng rng(8);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd s(8);
    for (int m = 0; m < 8; ++m) s(m) = normal(rng);
    if (rep % 5 == 0) s(6) = s.maxCoeff();  // force a tie
    const int base = argmax_lowest(s);
    EXPECT_EQ(argmax_lowest((s.array() + 3.0).matrix()), base);
    EXPECT_EQ(argmax_lowest(4.0 * s), base);
  }
}

TEST(Policy, ResidualDisabledNeverDetects) {
  Rng rng(9);
  const auto gt = generate_ground_truth(5, 3, 2, 5.0, 1, rng);
  const auto w = build_similarity_graph(gt.theta, 0.5);
  NelaConfig cfg;
  cfg.residual_enabled = false;
  NelaPolicy policy(w, 3, cfg);
  for (int round = 0; round < 200; ++round) {
    const int u = sample_user(5, rng);
    const auto arms = sample_arm_set(5, 3, 0.7, rng);
    const int m = policy.select(u, arms);
    policy.update(u, arms.arm(m), expected_reward(gt, w, u, arms.arm(m)));
  }
  EXPECT_TRUE(policy.detected_anomalies().empty());
  EXPECT_EQ(policy.state().v_hat.norm(), 0.0);
}

TEST(Policy, LassoEveryDelaysFits) {
  Rng rng(10);
  const auto w = random_graph(3, 2, rng);
  NelaConfig cfg;
  cfg.warmup_rounds = 0;
  cfg.lasso_every = 5;
  NelaState state(3, 2, cfg.lambda1);
  for (int round = 1; round <= 4; ++round) {
    update(state, cfg, 0, Eigen::Vector2d(1.0, 0.0), 5.0, w);
    EXPECT_EQ(state.support.lambda_t, 0.0) << round;
  }
  update(state, cfg, 0, Eigen::Vector2d(1.0, 0.0), 5.0, w);
  EXPECT_GT(state.support.lambda_t, 0.0);
}

TEST(Config, Validation) {
  NelaConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.lambda1 = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = {};
  cfg.delta = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = {};
  cfg.lasso_every = 0;
  EXPECT_THROW(NelaPolicy(InfluenceMatrix::identity(2), 2, cfg), InputError);
  EXPECT_DOUBLE_EQ(default_residual_bound(4), 20.0);
}

TEST(Snapshot, JsonShape) {
  Rng rng(11);
  const auto w = random_graph(3, 2, rng);
  NelaConfig cfg;
  NelaState state(3, 2, cfg.lambda1);
  update(state, cfg, 1, Eigen::Vector2d(0.6, 0.8), 0.5, w);
  const auto j = snapshot(state);
  EXPECT_EQ(j["t"], 1);
  EXPECT_EQ(j["a_diag_blocks"].size(), 3u);
  EXPECT_EQ(j["a_diag_blocks"][0].size(), 2u);
  EXPECT_EQ(j["theta_hat"].size(), 6u);
  EXPECT_EQ(j["v_hat"].size(), 6u);
  EXPECT_TRUE(j["detected"].is_array());
  EXPECT_DOUBLE_EQ(j["a_diag_blocks"][1][0][0].get<double>(), state.a(2, 2));
}

}  // namespace
}  // namespace nela
