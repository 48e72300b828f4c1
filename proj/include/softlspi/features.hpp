#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "softlspi/navsim.hpp"

namespace softlspi {

/// State features composed with Kronecker-delta action indicators.
///
/// The state-action vector has dim() = state_dim() * kNumActions entries laid out
/// as one contiguous block of state_dim() entries per action; only the block of
/// the evaluated action is nonzero. Implementations are immutable and reentrant.
class FeatureMap {
 public:
  virtual ~FeatureMap() = default;

  virtual Eigen::Index state_dim() const = 0;
  Eigen::Index dim() const { return state_dim() * kNumActions; }

  /// Writes state_dim() entries into out.
  virtual void state_features(const Pose& pose, Eigen::Ref<Eigen::VectorXd> out) const = 0;
  Eigen::VectorXd state_features(const Pose& pose) const;

  Eigen::VectorXd features(const Pose& pose, Action action) const;

  /// Identifier written into weight files, e.g. "fourier-10x10x5".
  virtual std::string id() const = 0;
};

/// Products cos(pi*k1*x) * cos(pi*k2*y) * g(theta) for k1, k2 < spatial_terms and
/// g in {1, cos, sin, cos 2, sin 2}. Index order: k1-major, then k2, then g in the
/// listed order: index = (k1 * spatial_terms + k2) * 5 + g.
class FourierBasis final : public FeatureMap {
 public:
  static constexpr int kOrientationTerms = 5;

  explicit FourierBasis(int spatial_terms = 10);

  int spatial_terms() const { return terms_; }
  Eigen::Index state_dim() const override {
    return static_cast<Eigen::Index>(terms_) * terms_ * kOrientationTerms;
  }
  /// Throws ContractError unless x, y in [0, 1] and theta in [0, 2*pi).
  void state_features(const Pose& pose, Eigen::Ref<Eigen::VectorXd> out) const override;
  using FeatureMap::state_features;
  std::string id() const override;

 private:
  int terms_;
};

/// Places state_feats into block `action` of a num_actions-block vector.
Eigen::VectorXd compose_state_action(const Eigen::Ref<const Eigen::VectorXd>& state_feats,
                                     int action, int num_actions = kNumActions);

struct QWeights {
  Eigen::VectorXd w;

  Eigen::Index size() const { return w.size(); }
};

/// Per-action values w_a . s for block-structured weights; w.size() must be a
/// multiple of s.size().
Eigen::VectorXd q_from_state_features(const QWeights& weights,
                                      const Eigen::Ref<const Eigen::VectorXd>& state_feats);

std::array<double, kNumActions> q_all(const FeatureMap& map, const QWeights& weights,
                                      const Pose& pose);

/// Lowest index among the maxima.
int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values);
int argmax_lowest(const std::array<double, kNumActions>& values);

/// Greedy action of q_all with lowest-index tie-break.
Action greedy_action(const FeatureMap& map, const QWeights& weights, const Pose& pose);

struct WeightsFile {
  QWeights weights;
  Eigen::Index state_dim = 0;
  std::string map_id;
  int index_order_version = 1;
};

inline constexpr int kIndexOrderVersion = 1;

/// '# m=.. p=.. map=.. order=..' followed by one value per line.
void write_weights(const QWeights& weights, const FeatureMap& map, std::ostream& out);
void write_weights(const QWeights& weights, const FeatureMap& map, const std::filesystem::path& path);
WeightsFile read_weights(std::istream& in);
WeightsFile read_weights(const std::filesystem::path& path);

}  // namespace softlspi
