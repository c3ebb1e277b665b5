#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lobster/common/json_arrays.hpp"
#include "lobster/dsp/scaler.hpp"
#include "lobster/features/pca.hpp"
#include "lobster/learners/forest.hpp"
#include "lobster/learners/knn.hpp"
#include "lobster/learners/mlp.hpp"
#include "lobster/learners/naive_bayes.hpp"
#include "lobster/learners/svm.hpp"
#include "lobster/neural/cnn.hpp"

namespace lobster::learners {

enum class Family { kKnn, kSvm, kRf, kGbt, kNb, kMlp, kLogReg, kCnn };

/// Config names: knn, svm, rf, xgboost, nb, mlp, logreg, cnn.
std::string family_name(Family family);
Family parse_family(const std::string& name);

using HyperParams = std::variant<KnnParams, SvmParams, RfParams, GbtParams, GaussianNbParams,
                                 MlpParams, LogRegParams, neural::CnnSpec>;

Family family_of(const HyperParams& params);
void validate(const HyperParams& params);

/// Keys follow the architecture-table column names, e.g. knn {n_neighbors, p,
/// weights, algorithm}; svm {C, gamma, kernel}; rf {n_estimators, max_depth,
/// min_samples_leaf, min_samples_split}; xgboost {n_estimators, learning_rate,
/// max_depth, subsample, colsample_bytree}; mlp {activation, hidden_layer_sizes,
/// alpha, learning_rate, solver}; cnn {filters, kernel_size, pool_size,
/// dilation, dense, batch_size, epochs, optimizer}. Unknown keys are rejected.
HyperParams hyperparams_from_json(Family family, const nlohmann::json& node);
nlohmann::json hyperparams_to_json(const HyperParams& params);

/// Cartesian product of a {key: [candidates]} object; scalar values count as
/// one candidate. Order follows sorted key names, last key varying fastest.
std::vector<HyperParams> expand_grid(Family family, const nlohmann::json& grid);

/// Standardise -> optional PCA -> model.
struct PipelineSpec {
  HyperParams params;
  /// 0 disables PCA, -1 keeps every component (a pure rotation).
  int pca_components = 0;
  bool standardize = true;
};

nlohmann::json to_json(const PipelineSpec& spec);

/// Static relative inference-cost proxy used to break grid-score ties.
double inference_cost(const PipelineSpec& spec, Eigen::Index n_features);

using ModelState = std::variant<KnnModel, SvmModel, RfModel, GbtModel, GaussianNbModel, MlpModel,
                                LogRegModel, neural::CnnModel>;

struct TrainedModel {
  static constexpr int kVersion = 1;

  PipelineSpec spec;
  std::optional<dsp::StandardScaler> scaler;
  std::optional<features::PcaModel> pca;
  ModelState state;
  Eigen::Index n_features = 0;
  std::uint64_t seed = 0;
  double fit_seconds = 0.0;

  Family family() const;
  /// Raw features -> model input space.
  Matrix transform(const Matrix& X) const;
  /// Rows are [P(0), P(1)].
  Matrix predict_proba(const Matrix& X) const;
  /// Positive when P(1) > 0.5; an exact tie goes to class 0.
  Labels predict(const Matrix& X) const;
  /// Model-space prediction, skipping preprocessing.
  Matrix predict_proba_transformed(const Matrix& Z) const;
};

TrainedModel fit_model(const PipelineSpec& spec, const Matrix& X, const Labels& y,
                       std::uint64_t seed, int jobs = 1);

/// Envelope {family, version, hyperparams, parameters, preprocessing, seed}.
nlohmann::json to_json(const TrainedModel& model, ArrayEncoding encoding = ArrayEncoding::kDecimal);
TrainedModel model_from_json(const nlohmann::json& node);

/// Report label such as "KNN", "Random Forest", "1D-CNN (2 L)".
std::string display_name(const PipelineSpec& spec);

}  // namespace lobster::learners
