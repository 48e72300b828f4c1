#include "softlspi/features.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

#include "softlspi/errors.hpp"
#include "text_util.hpp"

namespace softlspi {

Eigen::VectorXd FeatureMap::state_features(const Pose& pose) const {
  Eigen::VectorXd out(state_dim());
  state_features(pose, out);
  return out;
}

Eigen::VectorXd FeatureMap::features(const Pose& pose, Action action) const {
  return compose_state_action(state_features(pose), index_of(action));
}

FourierBasis::FourierBasis(int spatial_terms) : terms_(spatial_terms) {
  if (spatial_terms < 1) throw ConfigError("Fourier basis needs at least one spatial term");
}

void FourierBasis::state_features(const Pose& pose, Eigen::Ref<Eigen::VectorXd> out) const {
  if (!(pose.x >= 0.0 && pose.x <= 1.0 && pose.y >= 0.0 && pose.y <= 1.0 && pose.theta >= 0.0 &&
        pose.theta < 2.0 * std::numbers::pi)) {
    throw ContractError("Fourier features: pose out of domain");
  }
  if (out.size() != state_dim()) throw ContractError("Fourier features: output size mismatch");

  Eigen::VectorXd fx(terms_), fy(terms_);
  for (int k = 0; k < terms_; ++k) {
    fx[k] = std::cos(std::numbers::pi * k * pose.x);
    fy[k] = std::cos(std::numbers::pi * k * pose.y);
  }
  const std::array<double, kOrientationTerms> g{1.0, std::cos(pose.theta), std::sin(pose.theta),
                                                std::cos(2.0 * pose.theta),
                                                std::sin(2.0 * pose.theta)};
  Eigen::Index i = 0;
  for (int k1 = 0; k1 < terms_; ++k1) {
    for (int k2 = 0; k2 < terms_; ++k2) {
      const double xy = fx[k1] * fy[k2];
      for (const double gj : g) out[i++] = xy * gj;
    }
  }
}

std::string FourierBasis::id() const {
  return "fourier-" + std::to_string(terms_) + "x" + std::to_string(terms_) + "x" +
         std::to_string(kOrientationTerms);
}

Eigen::VectorXd compose_state_action(const Eigen::Ref<const Eigen::VectorXd>& state_feats,
                                     int action, int num_actions) {
  if (action < 0 || action >= num_actions) throw ContractError("compose_state_action: bad action");
  const Eigen::Index p = state_feats.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p * num_actions);
  out.segment(action * p, p) = state_feats;
  return out;
}

Eigen::VectorXd q_from_state_features(const QWeights& weights,
                                      const Eigen::Ref<const Eigen::VectorXd>& state_feats) {
  const Eigen::Index p = state_feats.size();
  if (p == 0 || weights.size() % p != 0)
    throw ContractError("q values: weight dimension is not a multiple of the state dimension");
  const Eigen::Index actions = weights.size() / p;
  Eigen::VectorXd q(actions);
  for (Eigen::Index a = 0; a < actions; ++a) q[a] = weights.w.segment(a * p, p).dot(state_feats);
  return q;
}

std::array<double, kNumActions> q_all(const FeatureMap& map, const QWeights& weights,
                                      const Pose& pose) {
  if (weights.size() != map.dim())
    throw ContractError("q_all: weights have " + std::to_string(weights.size()) +
                        " entries, feature map has " + std::to_string(map.dim()));
  const Eigen::VectorXd s = map.state_features(pose);
  const Eigen::Index p = map.state_dim();
  std::array<double, kNumActions> q{};
  for (int a = 0; a < kNumActions; ++a) q[a] = weights.w.segment(a * p, p).dot(s);
  return q;
}

int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values) {
  int best = 0;
  for (Eigen::Index a = 1; a < values.size(); ++a)
    if (values[a] > values[best]) best = static_cast<int>(a);
  return best;
}

int argmax_lowest(const std::array<double, kNumActions>& values) {
  int best = 0;
  for (int a = 1; a < kNumActions; ++a)
    if (values[a] > values[best]) best = a;
  return best;
}

Action greedy_action(const FeatureMap& map, const QWeights& weights, const Pose& pose) {
  return static_cast<Action>(argmax_lowest(q_all(map, weights, pose)));
}

void write_weights(const QWeights& weights, const FeatureMap& map, std::ostream& out) {
  if (weights.size() != map.dim()) throw ContractError("write_weights: dimension mismatch");
  out << "# m=" << map.dim() << " p=" << map.state_dim() << " map=" << map.id()
      << " order=" << kIndexOrderVersion << '\n';
  for (Eigen::Index i = 0; i < weights.size(); ++i) out << detail::format_double(weights.w[i]) << '\n';
}

void write_weights(const QWeights& weights, const FeatureMap& map,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_weights(weights, map, out);
}

WeightsFile read_weights(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty weights file");
  const auto meta = detail::parse_meta_line(line);
  WeightsFile file;
  const auto m = detail::parse_int<Eigen::Index>(detail::require_meta(meta, "m"));
  file.state_dim = detail::parse_int<Eigen::Index>(detail::require_meta(meta, "p"));
  file.map_id = detail::require_meta(meta, "map");
  file.index_order_version = detail::parse_int<int>(detail::require_meta(meta, "order"));
  if (file.index_order_version != kIndexOrderVersion)
    throw DataError("unsupported weight index order " + std::to_string(file.index_order_version));
  file.weights.w.resize(m);
  Eigen::Index i = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    if (i >= m) throw DataError("weights file has more than m=" + std::to_string(m) + " values");
    file.weights.w[i++] = detail::parse_double(line);
  }
  if (i != m) throw DataError("weights file has " + std::to_string(i) + " values, header says " +
                              std::to_string(m));
  if (!file.weights.w.allFinite()) throw DataError("weights file contains non-finite values");
  return file;
}

WeightsFile read_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open weights file '" + path.string() + "'");
  return read_weights(in);
}

}  // namespace softlspi
