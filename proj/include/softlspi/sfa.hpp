#pragma once

// Sparse-kernel slow feature analysis over the ordered random-walk batch.
//
// States are embedded as (x, y, cos theta, sin theta) and expanded into Gaussian
// kernel activations against a greedily selected dictionary. The learned
// features are linear in the centered activations and are, on the training
// batch, zero-mean, unit-variance and decorrelated, ordered by slowness
// (mean squared change between consecutive states of an episode).

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "softlspi/features.hpp"
#include "softlspi/navsim.hpp"

namespace softlspi {

struct SfaParams {
  double novelty_threshold = 0.2;
  std::size_t max_dictionary = 800;
  double kernel_width = 0.2;
  double ridge = 1e-5;
  int features = 63;
};

/// Directions whose covariance eigenvalue is below this fraction of the
/// largest one are discarded before whitening.
inline constexpr double kWhiteningCutoff = 1e-10;

Eigen::Vector4d embed_state(const Pose& pose);

/// exp(-|u - v|^2 / (2 width^2)).
double gaussian_kernel(const Eigen::Ref<const Eigen::Vector4d>& u,
                       const Eigen::Ref<const Eigen::Vector4d>& v, double width);

/// Embedded support states, one per row (d x 4).
struct Dictionary {
  Eigen::MatrixXd points;

  Eigen::Index size() const { return points.rows(); }
};

/// Kernel activations of each embedded state (rows of `embedded`, n x 4)
/// against the dictionary: n x d.
Eigen::MatrixXd kernel_activations(const Eigen::Ref<const Eigen::MatrixXd>& embedded,
                                   const Dictionary& dictionary, double width);

/// Embedded batch states (the pose of every transition), n x 4.
Eigen::MatrixXd embed_batch(const Batch& batch);

/// Single pass over the batch states: a state joins the dictionary iff its
/// largest kernel value against the current dictionary is below the novelty
/// threshold. Stops once max_size points are held.
Dictionary select_dictionary(const Batch& batch, double novelty_threshold, std::size_t max_size,
                             double kernel_width);

struct SfaModel {
  Dictionary dictionary;
  Eigen::MatrixXd alpha;        ///< p x d
  Eigen::VectorXd mean_offset;  ///< p
  double kernel_width = 0.2;
  Eigen::VectorXd slowness;     ///< p, ascending
  double whitening_condition = 1.0;
  SfaParams params;

  int feature_count() const { return static_cast<int>(alpha.rows()); }
};

/// Fits p slow features. Throws ContractError when p exceeds the dictionary
/// size, SolverError when the activations have no variance or (with zero
/// ridge) the covariance is numerically singular.
SfaModel fit_sfa(const Batch& batch, const Dictionary& dictionary, double kernel_width,
                 double ridge, int features);

/// Dictionary selection followed by fit_sfa with the given parameters.
SfaModel fit_sfa(const Batch& batch, const SfaParams& params);

/// Slow features of every batch state (n x p), computed in bulk.
Eigen::MatrixXd sfa_transform(const SfaModel& model, const Batch& batch);

/// Mean squared difference of each column over consecutive rows, skipping
/// pairs that straddle an episode boundary.
Eigen::VectorXd temporal_slowness(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                  const Batch& batch);

/// [1, alpha k(x) - mean_offset]: p + 1 entries.
Eigen::VectorXd sfa_state_features(const SfaModel& model, const Pose& pose);

class SfaFeatureMap final : public FeatureMap {
 public:
  explicit SfaFeatureMap(std::shared_ptr<const SfaModel> model);

  const SfaModel& model() const { return *model_; }
  Eigen::Index state_dim() const override { return model_->feature_count() + 1; }
  void state_features(const Pose& pose, Eigen::Ref<Eigen::VectorXd> out) const override;
  using FeatureMap::state_features;
  std::string id() const override;

 private:
  std::shared_ptr<const SfaModel> model_;
};

/// JSON document with dictionary, alpha, mean offset, kernel width, slowness
/// and the parameters used for fitting.
void write_sfa_model(const SfaModel& model, std::ostream& out);
void write_sfa_model(const SfaModel& model, const std::filesystem::path& path);
SfaModel read_sfa_model(std::istream& in);
SfaModel read_sfa_model(const std::filesystem::path& path);

}  // namespace softlspi
