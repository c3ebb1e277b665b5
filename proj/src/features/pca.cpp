#include "lobster/features/pca.hpp"

#include <Eigen/Eigenvalues>

#include <string>

#include "lobster/common/error.hpp"

namespace lobster::features {

PcaModel pca_fit(const Matrix& features, Eigen::Index k) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (k < 1 || k > d) {
    throw ValidationError("PCA component count " + std::to_string(k) + " must lie in [1, " +
                          std::to_string(d) + "]");
  }
  if (n <= k) throw ValidationError("PCA needs more rows than components");

  PcaModel model;
  model.mean = features.colwise().mean().transpose();
  const Matrix centered = features.rowwise() - model.mean.transpose();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw ConvergenceError("PCA eigendecomposition failed");
  // Eigen returns ascending eigenvalues.
  const Vector values = solver.eigenvalues().reverse();
  const Matrix vectors = solver.eigenvectors().rowwise().reverse();

  const double total = values.cwiseMax(0.0).sum();
  const double rank_tol = std::max(1.0, values(0)) * 1e-12 * static_cast<double>(d);

  model.components.resize(k, d);
  model.explained_variance.resize(k);
  model.explained_variance_ratio.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    Vector axis = vectors.col(i);
    Eigen::Index arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0.0) axis = -axis;
    model.components.row(i) = axis.transpose();

    double lambda = values(i);
    if (lambda <= rank_tol) {
      lambda = 0.0;
      model.rank_deficient = true;
    }
    model.explained_variance(i) = lambda;
    model.explained_variance_ratio(i) = total > 0.0 ? lambda / total : 0.0;
  }
  model.tev = model.explained_variance_ratio.sum();
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& features) {
  if (features.cols() != model.input_dim()) {
    throw ValidationError("PCA expects " + std::to_string(model.input_dim()) +
                          " columns, got " + std::to_string(features.cols()));
  }
  return (features.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Matrix pca_inverse_transform(const PcaModel& model, const Matrix& projected) {
  if (projected.cols() != model.n_components()) throw ValidationError("PCA dimension mismatch");
  return (projected * model.components).rowwise() + model.mean.transpose();
}

nlohmann::json to_json(const PcaModel& model, ArrayEncoding encoding) {
  return {{"version", PcaModel::kVersion},
          {"mean", encode_vector(model.mean, encoding)},
          {"components", encode_matrix(model.components, encoding)},
          {"explained_variance", encode_vector(model.explained_variance, encoding)},
          {"ratios", encode_vector(model.explained_variance_ratio, encoding)},
          {"tev", model.tev},
          {"rank_deficient", model.rank_deficient}};
}

PcaModel pca_from_json(const nlohmann::json& node) {
  if (node.at("version").get<int>() != PcaModel::kVersion) throw DataError("unsupported PCA version");
  PcaModel m;
  m.mean = decode_vector(node.at("mean"));
  m.components = decode_matrix(node.at("components"));
  m.explained_variance = decode_vector(node.at("explained_variance"));
  m.explained_variance_ratio = decode_vector(node.at("ratios"));
  m.tev = node.at("tev").get<double>();
  m.rank_deficient = node.value("rank_deficient", false);
  if (m.components.cols() != m.mean.size()) throw DataError("PCA components/mean mismatch");
  return m;
}

}  // namespace lobster::features
