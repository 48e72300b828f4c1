#include <cmath>

#include <gtest/gtest.h>

#include "softlspi/errors.hpp"
#include "softlspi/policy.hpp"

namespace softlspi {
namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double x : values) v[i++] = x;
  return v;
}

void expect_probs(const ActionDistribution& d, std::initializer_list<double> expected, double tol) {
  ASSERT_EQ(d.probs.size(), static_cast<Eigen::Index>(expected.size()));
  Eigen::Index i = 0;
  for (const double p : expected) EXPECT_NEAR(d.probs[i++], p, tol);
}

Eigen::VectorXd random_q(Rng& rng, int k) {
  Eigen::VectorXd q(k);
  const double scale = std::exp(uniform(rng, -3.0, 3.0));
  for (int a = 0; a < k; ++a) q[a] = scale * standard_normal(rng);
  return q;
}

TEST(Softmax, HandValues) {
  expect_probs(softmax_policy(vec({0, 0, 0}), 3.7), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-15);
  expect_probs(softmax_policy(vec({std::log(2.0), 0, 0}), 1.0), {0.5, 0.25, 0.25}, 1e-15);
  expect_probs(softmax_policy(vec({1, 0, 0}), 1e6), {1, 0, 0}, 1e-9);
}

TEST(EpsilonGreedy, HandValues) {
  expect_probs(epsilon_greedy_policy(vec({1, 2, 3}), 0.3), {0.1, 0.1, 0.8}, 1e-15);
  expect_probs(epsilon_greedy_policy(vec({4, -1, 9}), 1.0), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-15);
  expect_probs(epsilon_greedy_policy(vec({5, 5, 1}), 0.0), {1, 0, 0}, 0.0);
}

TEST(NormalizeQ, HandValues) {
  const Eigen::VectorXd n = normalize_q(vec({1, 0, -1}));
  EXPECT_NEAR(n[0], std::sqrt(1.5), 1e-15);
  EXPECT_NEAR(n[1], 0.0, 1e-15);
  EXPECT_NEAR(n[2], -std::sqrt(1.5), 1e-15);
  EXPECT_EQ(normalize_q(vec({2.5, 2.5, 2.5})), Eigen::Vector3d::Zero());
}

TEST(ImprovementPolicy, HandValues) {
  expect_probs(improvement_policy(vec({0, 1, 0}), ImprovementConfig::greedy()), {0, 1, 0}, 0.0);
  expect_probs(improvement_policy(vec({7, 7, 7}), ImprovementConfig::softmax(40.0, true)),
               {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-15);
  const auto small = improvement_policy(vec({1, 0, -1}), ImprovementConfig::softmax(2.0, true));
  const auto large = improvement_policy(vec({10, 0, -10}), ImprovementConfig::softmax(2.0, true));
  EXPECT_NEAR((small.probs - large.probs).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(ApplyOperator, HandValues) {
  EXPECT_NEAR(apply_operator(vec({1, 2, 3}), vec({0.3, -4, 9}), ImprovementConfig::softmax(0.0)),
              2.0, 1e-15);
  EXPECT_EQ(apply_operator(vec({5, 7, 9}), vec({0, 1, 0}), ImprovementConfig::greedy()), 7.0);
  EXPECT_NEAR(apply_operator(vec({4, 8, 12}), vec({std::log(2.0), 0, 0}),
                             ImprovementConfig::softmax(1.0)),
              7.0, 1e-14);
}

TEST(Config, Validation) {
  EXPECT_THROW(ImprovementConfig::softmax(-1.0).validate(), ConfigError);
  EXPECT_THROW(ImprovementConfig::softmax(INFINITY).validate(), ConfigError);
  EXPECT_THROW(ImprovementConfig::epsilon_greedy(1.5).validate(), ConfigError);
  EXPECT_NO_THROW(ImprovementConfig::epsilon_greedy(1.0).validate());
  EXPECT_EQ(parse_operator_kind("egreedy"), OperatorKind::EpsilonGreedy);
  EXPECT_EQ(to_string(OperatorKind::Softmax), "softmax");
  EXPECT_THROW(parse_operator_kind("boltzmann"), ConfigError);
}

// Random q vectors and parameters, 10^4 draws per property.
class OperatorProperties : public ::testing::Test {
 protected:
  Rng rng{20240601};
  static constexpr int kDraws = 10000;

  ImprovementConfig random_config() {
    switch (uniform_index(rng, 3)) {
      case 0:
        return ImprovementConfig::greedy();
      case 1:
        return ImprovementConfig::softmax(std::exp(uniform(rng, -4.0, 6.0)), uniform01(rng) < 0.5);
      default:
        return ImprovementConfig::epsilon_greedy(uniform01(rng), uniform01(rng) < 0.5);
    }
  }
};

TEST_F(OperatorProperties, DistributionsAreNormalized) {
  for (int i = 0; i < kDraws; ++i) {
    const Eigen::VectorXd q = random_q(rng, 2 + static_cast<int>(uniform_index(rng, 4)));
    const ActionDistribution d = improvement_policy(q, random_config());
    ASSERT_GE(d.probs.minCoeff(), 0.0);
    ASSERT_NEAR(d.probs.sum(), 1.0, 1e-12);
  }
}

TEST_F(OperatorProperties, SoftmaxShiftInvariant) {
  for (int i = 0; i < kDraws; ++i) {
    const Eigen::VectorXd q = random_q(rng, 3);
    const double beta = std::exp(uniform(rng, -4.0, 4.0));
    const double shift = uniform(rng, -100.0, 100.0);
    const auto a = softmax_policy(q, beta);
    const auto b = softmax_policy(q.array() + shift, beta);
    ASSERT_LE((a.probs - b.probs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST_F(OperatorProperties, ArgmaxMassGrowsWithBeta) {
  for (int i = 0; i < kDraws; ++i) {
    const Eigen::VectorXd q = random_q(rng, 3);
    Eigen::Index best;
    q.maxCoeff(&best);
    const double b1 = std::exp(uniform(rng, -4.0, 4.0));
    const double b2 = b1 * (1.0 + std::exp(uniform(rng, -4.0, 2.0)));
    ASSERT_LE(softmax_policy(q, b1).probs[best], softmax_policy(q, b2).probs[best] + 1e-15);
  }
}

TEST_F(OperatorProperties, LargeBetaMatchesGreedy) {
  int checked = 0;
  for (int i = 0; i < kDraws; ++i) {
    const Eigen::VectorXd q = random_q(rng, 3);
    Eigen::VectorXd sorted = q;
    std::sort(sorted.begin(), sorted.end());
    if (sorted[2] - sorted[1] < 1e-3) continue;
    const Eigen::VectorXd f = random_q(rng, 3);
    ++checked;
    ASSERT_NEAR(apply_operator(f, q, ImprovementConfig::softmax(1e6)),
                apply_operator(f, q, ImprovementConfig::greedy()), 1e-6);
  }
  EXPECT_GT(checked, kDraws / 2);
}

TEST_F(OperatorProperties, NormalizationStandardizesAndKeepsArgmax) {
  for (int i = 0; i < kDraws; ++i) {
    const Eigen::VectorXd q = random_q(rng, 2 + static_cast<int>(uniform_index(rng, 4)));
    const Eigen::VectorXd n = normalize_q(q);
    ASSERT_NEAR(n.mean(), 0.0, 1e-10);
    ASSERT_NEAR(std::sqrt(n.array().square().mean()), 1.0, 1e-10);
    ASSERT_EQ(argmax_lowest(n), argmax_lowest(q));
  }
}

TEST_F(OperatorProperties, NormalizedPolicyInvariantToPositiveAffineMaps) {
  for (int i = 0; i < kDraws; ++i) {
    const Eigen::VectorXd q = random_q(rng, 3);
    const double scale = std::exp(uniform(rng, -3.0, 3.0));
    const double shift = uniform(rng, -50.0, 50.0);
    ImprovementConfig config = random_config();
    config.normalize = true;
    const auto a = improvement_policy(q, config);
    const auto b = improvement_policy((scale * q).array() + shift, config);
    ASSERT_LE((a.probs - b.probs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST_F(OperatorProperties, OperatorIsConvexCombination) {
  for (int i = 0; i < kDraws; ++i) {
    const int k = 2 + static_cast<int>(uniform_index(rng, 4));
    const Eigen::VectorXd q = random_q(rng, k);
    const Eigen::VectorXd f = random_q(rng, k);
    const double v = apply_operator(f, q, random_config());
    ASSERT_GE(v, f.minCoeff() - 1e-12);
    ASSERT_LE(v, f.maxCoeff() + 1e-12);
  }
}

TEST(SoftTdError, ZeroWeightsAndZeroDiscount) {
  const Eigen::VectorXd s = vec({1.0, 0.5});
  const Eigen::VectorXd s_next = vec({0.2, -1.0});
  const QWeights zero{Eigen::VectorXd::Zero(6)};
  EXPECT_EQ(soft_td_error(s, 1, 0.75, s_next, false, zero, 0.9, ImprovementConfig::softmax(2.0)),
            0.75);
  const QWeights w{vec({1, 2, 3, 4, 5, 6})};
  // q(x, 1) = 3 * 1 + 4 * 0.5 = 5
  EXPECT_NEAR(soft_td_error(s, 1, 0.75, s_next, false, w, 0.0, ImprovementConfig::greedy()),
              0.75 - 5.0, 1e-15);
}

TEST(SoftTdError, TerminalDropsBootstrap) {
  const QWeights w{vec({1, 2, 3, 4, 5, 6})};
  const Eigen::VectorXd s = vec({1.0, 0.0});
  const Eigen::VectorXd s_next = vec({3.0, 3.0});
  EXPECT_NEAR(soft_td_error(s, 0, 2.0, s_next, true, w, 0.9, ImprovementConfig::greedy()),
              2.0 - 1.0, 1e-15);
  // Greedy next value: max(9, 21, 33) = 33.
  EXPECT_NEAR(soft_td_error(s, 0, 2.0, s_next, false, w, 0.5, ImprovementConfig::greedy()),
              2.0 + 0.5 * 33.0 - 1.0, 1e-13);
}

}  // namespace
}  // namespace softlspi
