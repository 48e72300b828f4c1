#include "softlspi/sfa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "softlspi/errors.hpp"

namespace softlspi {

Eigen::Vector4d embed_state(const Pose& pose) {
  return {pose.x, pose.y, std::cos(pose.theta), std::sin(pose.theta)};
}

double gaussian_kernel(const Eigen::Ref<const Eigen::Vector4d>& u,
                       const Eigen::Ref<const Eigen::Vector4d>& v, double width) {
  return std::exp(-(u - v).squaredNorm() / (2.0 * width * width));
}

Eigen::MatrixXd kernel_activations(const Eigen::Ref<const Eigen::MatrixXd>& embedded,
                                   const Dictionary& dictionary, double width) {
  if (embedded.cols() != 4 || dictionary.points.cols() != 4)
    throw ContractError("kernel_activations: expected 4-dimensional embeddings");
  const Eigen::VectorXd row_norms = embedded.rowwise().squaredNorm();
  const Eigen::VectorXd dict_norms = dictionary.points.rowwise().squaredNorm();
  Eigen::MatrixXd k = -2.0 * (embedded * dictionary.points.transpose());
  k.colwise() += row_norms;
  k.rowwise() += dict_norms.transpose();
  const double scale = -1.0 / (2.0 * width * width);
  return (k.array().max(0.0) * scale).exp().matrix();
}

Eigen::MatrixXd embed_batch(const Batch& batch) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(batch.size()), 4);
  for (std::size_t t = 0; t < batch.size(); ++t)
    out.row(static_cast<Eigen::Index>(t)) = embed_state(batch.transitions[t].pose).transpose();
  return out;
}

Dictionary select_dictionary(const Batch& batch, double novelty_threshold, std::size_t max_size,
                             double kernel_width) {
  if (batch.size() == 0) throw ContractError("select_dictionary: empty batch");
  if (!(novelty_threshold > 0.0 && novelty_threshold < 1.0))
    throw ContractError("select_dictionary: novelty threshold must lie in (0, 1)");
  if (max_size == 0) throw ContractError("select_dictionary: max_size must be >= 1");
  if (!(kernel_width > 0.0)) throw ContractError("select_dictionary: kernel width must be > 0");

  std::vector<Eigen::Vector4d> points;
  for (const Transition& tr : batch.transitions) {
    if (points.size() >= max_size) break;
    const Eigen::Vector4d u = embed_state(tr.pose);
    double best = 0.0;
    for (const auto& v : points) best = std::max(best, gaussian_kernel(u, v, kernel_width));
    if (points.empty() || best < novelty_threshold) points.push_back(u);
  }
  Dictionary dict;
  dict.points.resize(static_cast<Eigen::Index>(points.size()), 4);
  for (std::size_t i = 0; i < points.size(); ++i)
    dict.points.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  return dict;
}

Eigen::VectorXd temporal_slowness(const Eigen::Ref<const Eigen::MatrixXd>& features,
                                  const Batch& batch) {
  const Eigen::Index n = features.rows();
  if (n != static_cast<Eigen::Index>(batch.size()))
    throw ContractError("temporal_slowness: row count differs from batch size");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(features.cols());
  std::size_t pairs = 0;
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    if (batch.is_boundary(static_cast<std::size_t>(t))) continue;
    sum += (features.row(t + 1) - features.row(t)).array().square().matrix().transpose();
    ++pairs;
  }
  if (pairs == 0) throw ContractError("temporal_slowness: no consecutive pairs");
  return sum / static_cast<double>(pairs);
}

namespace {

/// Differences of consecutive activation rows within episodes.
Eigen::MatrixXd temporal_differences(const Eigen::MatrixXd& k, const Batch& batch) {
  std::vector<Eigen::Index> starts;
  for (Eigen::Index t = 0; t + 1 < k.rows(); ++t)
    if (!batch.is_boundary(static_cast<std::size_t>(t))) starts.push_back(t);
  Eigen::MatrixXd diffs(static_cast<Eigen::Index>(starts.size()), k.cols());
  for (std::size_t i = 0; i < starts.size(); ++i)
    diffs.row(static_cast<Eigen::Index>(i)) = k.row(starts[i] + 1) - k.row(starts[i]);
  return diffs;
}

}  // namespace

SfaModel fit_sfa(const Batch& batch, const Dictionary& dictionary, double kernel_width,
                 double ridge, int features) {
  const Eigen::Index d = dictionary.size();
  if (features < 1 || features > d)
    throw ContractError("fit_sfa: feature count " + std::to_string(features) +
                        " must lie in [1, dictionary size " + std::to_string(d) + "]");
  if (!(kernel_width > 0.0)) throw ContractError("fit_sfa: kernel width must be > 0");
  if (!(ridge >= 0.0)) throw ContractError("fit_sfa: ridge must be >= 0");
  if (batch.size() < 2) throw ContractError("fit_sfa: need at least two states");

  const Eigen::MatrixXd k = kernel_activations(embed_batch(batch), dictionary, kernel_width);
  const auto n = static_cast<double>(k.rows());
  const Eigen::RowVectorXd k_mean = k.colwise().mean();
  const Eigen::MatrixXd centered = k.rowwise() - k_mean;

  // Whitening of the ridge-regularized activation covariance.
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / n;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> cov_eig(cov);
  if (cov_eig.info() != Eigen::Success) throw SolverError("fit_sfa: covariance eigensolve failed");
  const Eigen::VectorXd lambda = cov_eig.eigenvalues();  // ascending
  const double top = lambda[d - 1];
  if (!(top > 1e-300)) throw SolverError("fit_sfa: kernel activations have zero variance");
  Eigen::Index first_kept = 0;
  while (first_kept < d && lambda[first_kept] < kWhiteningCutoff * top) ++first_kept;
  const Eigen::Index rank = d - first_kept;
  if (ridge == 0.0 && first_kept > 0)
    throw SolverError("fit_sfa: activation covariance is numerically singular (" +
                      std::to_string(first_kept) + " of " + std::to_string(d) +
                      " directions below cutoff); use a positive ridge");
  if (rank < features)
    throw SolverError("fit_sfa: covariance rank " + std::to_string(rank) + " is below the " +
                      std::to_string(features) + " requested features");
  const Eigen::VectorXd kept = lambda.tail(rank).array() + ridge;
  const Eigen::MatrixXd whiten =
      cov_eig.eigenvectors().rightCols(rank) * kept.array().rsqrt().matrix().asDiagonal();

  // Slowness eigenproblem in whitened coordinates, same ridge on the difference covariance.
  const Eigen::MatrixXd diffs = temporal_differences(k, batch);
  if (diffs.rows() == 0) throw ContractError("fit_sfa: batch has no within-episode pairs");
  Eigen::MatrixXd diff_cov = (diffs.transpose() * diffs) / static_cast<double>(diffs.rows());
  diff_cov.diagonal().array() += ridge;
  const Eigen::MatrixXd slow_problem = whiten.transpose() * diff_cov * whiten;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> slow_eig(slow_problem);
  if (slow_eig.info() != Eigen::Success) throw SolverError("fit_sfa: slowness eigensolve failed");
  Eigen::MatrixXd alpha = (whiten * slow_eig.eigenvectors().leftCols(features)).transpose();

  // The ridge leaves the training covariance slightly off identity; re-whiten the
  // selected features exactly (symmetric inverse square root).
  {
    const Eigen::MatrixXd y = centered * alpha.transpose();
    const Eigen::MatrixXd y_cov = (y.transpose() * y) / n;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> y_eig(y_cov);
    if (y_eig.info() != Eigen::Success || !(y_eig.eigenvalues().minCoeff() > 0.0))
      throw SolverError("fit_sfa: selected features are degenerate; increase ridge");
    const Eigen::MatrixXd inv_sqrt = y_eig.eigenvectors() *
                                     y_eig.eigenvalues().array().rsqrt().matrix().asDiagonal() *
                                     y_eig.eigenvectors().transpose();
    alpha = inv_sqrt * alpha;
  }

  Eigen::MatrixXd y = centered * alpha.transpose();
  Eigen::VectorXd slowness = temporal_slowness(y, batch);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(features));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return slowness[a] < slowness[b]; });

  // Orient every feature so that it correlates non-negatively with time.
  Eigen::VectorXd time = Eigen::VectorXd::LinSpaced(k.rows(), 0.0, n - 1.0);
  time.array() -= time.mean();

  SfaModel model;
  model.dictionary = dictionary;
  model.kernel_width = kernel_width;
  model.alpha.resize(features, d);
  model.slowness.resize(features);
  for (Eigen::Index j = 0; j < features; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    const double sign = y.col(src).dot(time) < 0.0 ? -1.0 : 1.0;
    model.alpha.row(j) = sign * alpha.row(src);
    model.slowness[j] = slowness[src];
  }
  model.mean_offset = model.alpha * k_mean.transpose();
  model.whitening_condition = std::sqrt(kept.maxCoeff() / kept.minCoeff());
  model.params.max_dictionary = static_cast<std::size_t>(d);
  model.params.kernel_width = kernel_width;
  model.params.ridge = ridge;
  model.params.features = features;
  return model;
}

SfaModel fit_sfa(const Batch& batch, const SfaParams& params) {
  const Dictionary dict = select_dictionary(batch, params.novelty_threshold,
                                            params.max_dictionary, params.kernel_width);
  SfaModel model = fit_sfa(batch, dict, params.kernel_width, params.ridge, params.features);
  model.params = params;
  return model;
}

Eigen::MatrixXd sfa_transform(const SfaModel& model, const Batch& batch) {
  const Eigen::MatrixXd k = kernel_activations(embed_batch(batch), model.dictionary,
                                               model.kernel_width);
  Eigen::MatrixXd y = k * model.alpha.transpose();
  y.rowwise() -= model.mean_offset.transpose();
  return y;
}

Eigen::VectorXd sfa_state_features(const SfaModel& model, const Pose& pose) {
  const Eigen::MatrixXd u = embed_state(pose).transpose();
  const Eigen::MatrixXd k = kernel_activations(u, model.dictionary, model.kernel_width);
  Eigen::VectorXd out(model.feature_count() + 1);
  out[0] = 1.0;
  out.tail(model.feature_count()) = model.alpha * k.row(0).transpose() - model.mean_offset;
  return out;
}

SfaFeatureMap::SfaFeatureMap(std::shared_ptr<const SfaModel> model) : model_(std::move(model)) {
  if (!model_) throw ContractError("SfaFeatureMap: null model");
}

void SfaFeatureMap::state_features(const Pose& pose, Eigen::Ref<Eigen::VectorXd> out) const {
  if (out.size() != state_dim()) throw ContractError("SFA features: output size mismatch");
  out = sfa_state_features(*model_, pose);
}

std::string SfaFeatureMap::id() const {
  return "sfa-p" + std::to_string(model_->feature_count()) + "-d" +
         std::to_string(model_->dictionary.size());
}

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != static_cast<std::size_t>(cols)) throw DataError("SFA model: ragged matrix");
    for (Eigen::Index j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

void write_sfa_model(const SfaModel& model, std::ostream& out) {
  json doc;
  doc["format"] = "softlspi-sfa";
  doc["version"] = 1;
  doc["kernel_width"] = model.kernel_width;
  doc["whitening_condition"] = model.whitening_condition;
  doc["params"] = {{"novelty_threshold", model.params.novelty_threshold},
                   {"max_dictionary", model.params.max_dictionary},
                   {"kernel_width", model.params.kernel_width},
                   {"ridge", model.params.ridge},
                   {"features", model.params.features}};
  doc["dictionary"] = matrix_to_json(model.dictionary.points);
  doc["alpha"] = matrix_to_json(model.alpha);
  doc["mean_offset"] = vector_to_json(model.mean_offset);
  doc["slowness"] = vector_to_json(model.slowness);
  out << doc.dump(1) << '\n';
}

void write_sfa_model(const SfaModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_sfa_model(model, out);
}

SfaModel read_sfa_model(std::istream& in) {
  try {
    const json doc = json::parse(in);
    if (doc.at("format") != "softlspi-sfa" || doc.at("version") != 1)
      throw DataError("not a version-1 SFA model file");
    SfaModel model;
    model.kernel_width = doc.at("kernel_width").get<double>();
    model.whitening_condition = doc.at("whitening_condition").get<double>();
    const json& p = doc.at("params");
    model.params.novelty_threshold = p.at("novelty_threshold").get<double>();
    model.params.max_dictionary = p.at("max_dictionary").get<std::size_t>();
    model.params.kernel_width = p.at("kernel_width").get<double>();
    model.params.ridge = p.at("ridge").get<double>();
    model.params.features = p.at("features").get<int>();
    model.dictionary.points = matrix_from_json(doc.at("dictionary"), 4);
    model.alpha = matrix_from_json(doc.at("alpha"), model.dictionary.size());
    model.mean_offset = vector_from_json(doc.at("mean_offset"));
    model.slowness = vector_from_json(doc.at("slowness"));
    if (model.mean_offset.size() != model.alpha.rows() || model.slowness.size() != model.alpha.rows())
      throw DataError("SFA model: inconsistent feature counts");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("SFA model: ") + e.what());
  }
}

SfaModel read_sfa_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open SFA model '" + path.string() + "'");
  return read_sfa_model(in);
}

}  // namespace softlspi
