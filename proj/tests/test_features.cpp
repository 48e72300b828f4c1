#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "softlspi/errors.hpp"
#include "softlspi/features.hpp"

namespace softlspi {
namespace {

constexpr double kPi = std::numbers::pi;

int orientation_term(Eigen::Index i) { return static_cast<int>(i % FourierBasis::kOrientationTerms); }
int k1_of(const FourierBasis& f, Eigen::Index i) {
  return static_cast<int>(i / FourierBasis::kOrientationTerms / f.spatial_terms());
}

TEST(Fourier, DimensionMatchesFactorProduct) {
  EXPECT_EQ(FourierBasis(10).state_dim(), 500);
  EXPECT_EQ(FourierBasis(10).dim(), 1500);
  EXPECT_EQ(FourierBasis(6).dim(), 540);
  EXPECT_EQ(FourierBasis(6).id(), "fourier-6x6x5");
}

TEST(Fourier, OriginPose) {
  const FourierBasis f;
  const Eigen::VectorXd s = f.state_features({0.0, 0.0, 0.0});
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const int g = orientation_term(i);
    if (g == 2 || g == 4)
      EXPECT_EQ(s[i], 0.0) << i;
    else
      EXPECT_EQ(s[i], 1.0) << i;
  }
}

TEST(Fourier, OddHorizontalFrequenciesVanishAtCentreLine) {
  const FourierBasis f;
  const Eigen::VectorXd s = f.state_features({0.5, 0.0, 0.0});
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (k1_of(f, i) % 2 == 1) EXPECT_NEAR(s[i], 0.0, 1e-15) << i;
}

TEST(Fourier, MatchesDirectProductFormula) {
  const FourierBasis f(4);
  const Pose pose{0.3, 0.7, 2.0};
  const Eigen::VectorXd s = f.state_features(pose);
  const double g[5] = {1.0, std::cos(pose.theta), std::sin(pose.theta), std::cos(2 * pose.theta),
                       std::sin(2 * pose.theta)};
  for (int k1 = 0; k1 < 4; ++k1)
    for (int k2 = 0; k2 < 4; ++k2)
      for (int o = 0; o < 5; ++o)
        EXPECT_NEAR(s[(k1 * 4 + k2) * 5 + o],
                    std::cos(kPi * k1 * pose.x) * std::cos(kPi * k2 * pose.y) * g[o], 1e-14);
}

TEST(Fourier, BoundedWithConstantTerm) {
  const FourierBasis f;
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const Pose pose{uniform01(rng), uniform01(rng), uniform(rng, 0.0, 2 * kPi)};
    const Eigen::VectorXd s = f.state_features(pose);
    ASSERT_EQ(s[0], 1.0);
    ASSERT_LE(s.cwiseAbs().maxCoeff(), 1.0);
  }
}

TEST(Fourier, OutOfDomainPoseRejected) {
  const FourierBasis f;
  EXPECT_THROW(f.state_features({1.2, 0.5, 0.0}), ContractError);
  EXPECT_THROW(f.state_features({0.5, 0.5, 7.0}), ContractError);
  EXPECT_THROW(FourierBasis(0), ConfigError);
}

TEST(Compose, PlacesBlock) {
  const Eigen::Vector2d s(1.0, 2.0);
  Eigen::VectorXd expected0(6), expected2(6);
  expected0 << 1, 2, 0, 0, 0, 0;
  expected2 << 0, 0, 0, 0, 1, 2;
  EXPECT_EQ(compose_state_action(s, 0), expected0);
  EXPECT_EQ(compose_state_action(s, 2), expected2);
  EXPECT_EQ(compose_state_action(s, 0).dot(compose_state_action(s, 1)), 0.0);
  EXPECT_THROW(compose_state_action(s, 3), ContractError);
}

TEST(Compose, LinearInStateFeatures) {
  const Eigen::Vector3d u(1.0, -2.0, 0.5), v(0.25, 4.0, -1.0);
  EXPECT_EQ(compose_state_action(2.0 * u + v, 1),
            2.0 * compose_state_action(u, 1) + compose_state_action(v, 1));
}

TEST(Features, OnlyActionBlockNonzero) {
  const FourierBasis f(5);
  const Pose pose{0.2, 0.4, 1.0};
  for (const Action a : kAllActions) {
    const Eigen::VectorXd phi = f.features(pose, a);
    ASSERT_EQ(phi.size(), f.dim());
    for (int b = 0; b < kNumActions; ++b) {
      const auto block = phi.segment(b * f.state_dim(), f.state_dim());
      if (b == index_of(a))
        EXPECT_EQ(block, f.state_features(pose));
      else
        EXPECT_TRUE((block.array() == 0.0).all());
    }
  }
}

TEST(QAll, ZeroAndSelfWeights) {
  const FourierBasis f(6);
  const Pose pose{0.1, 0.9, 3.0};
  const QWeights zero{Eigen::VectorXd::Zero(f.dim())};
  EXPECT_EQ(q_all(f, zero, pose), (std::array<double, 3>{0.0, 0.0, 0.0}));
  const Eigen::VectorXd s = f.state_features(pose);
  QWeights self{Eigen::VectorXd::Zero(f.dim())};
  self.w.head(f.state_dim()) = s;
  const auto q = q_all(f, self, pose);
  EXPECT_NEAR(q[0], s.squaredNorm(), 1e-12);
  EXPECT_EQ(q[1], 0.0);
  EXPECT_EQ(q[2], 0.0);
}

TEST(QAll, AgreesWithComposedDotProduct) {
  const FourierBasis f(6);
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    QWeights w{Eigen::VectorXd(f.dim())};
    for (Eigen::Index j = 0; j < w.size(); ++j) w.w[j] = standard_normal(rng);
    const Pose pose{uniform01(rng), uniform01(rng), uniform(rng, 0.0, 2 * kPi)};
    const auto q = q_all(f, w, pose);
    for (const Action a : kAllActions)
      EXPECT_NEAR(q[index_of(a)], w.w.dot(f.features(pose, a)), 1e-10);
  }
}

TEST(Greedy, LowestIndexTieBreak) {
  EXPECT_EQ(argmax_lowest(std::array<double, 3>{5, 5, 1}), 0);
  EXPECT_EQ(argmax_lowest(std::array<double, 3>{1, 5, 5}), 1);
  EXPECT_EQ(argmax_lowest(Eigen::Vector3d(0, 0, 0)), 0);
}

TEST(WeightsIo, RoundTripAndHeader) {
  const FourierBasis f(3);
  QWeights w{Eigen::VectorXd::LinSpaced(f.dim(), -1.0, 1.0 / 3.0)};
  std::stringstream buffer;
  write_weights(w, f, buffer);
  const std::string text = buffer.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "# m=135 p=45 map=fourier-3x3x5 order=1");
  const WeightsFile back = read_weights(buffer);
  EXPECT_EQ(back.weights.w, w.w);
  EXPECT_EQ(back.state_dim, 45);
  EXPECT_EQ(back.map_id, "fourier-3x3x5");
  EXPECT_EQ(back.index_order_version, kIndexOrderVersion);
}

TEST(WeightsIo, TruncatedFileIsDataError) {
  std::stringstream in("# m=3 p=1 map=x order=1\n1\n2\n");
  EXPECT_THROW(read_weights(in), DataError);
  std::stringstream order("# m=1 p=1 map=x order=9\n1\n");
  EXPECT_THROW(read_weights(order), DataError);
}

}  // namespace
}  // namespace softlspi
