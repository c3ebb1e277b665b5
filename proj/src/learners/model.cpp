#include "lobster/learners/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "lobster/common/error.hpp"
#include "lobster/common/io.hpp"
#include "lobster/learners/common.hpp"

namespace lobster::learners {
namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void reject_unknown(const json& node, const std::set<std::string>& allowed, const std::string& family) {
  if (!node.is_object()) throw ValidationError(family + " hyperparameters must be an object");
  for (const auto& [k, v] : node.items()) {
    if (!allowed.count(k)) throw ValidationError("unknown " + family + " hyperparameter '" + k + "'");
  }
}

template <class T>
T get_as(const json& node, const std::string& key, const std::string& family) {
  try {
    return node.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(family + " hyperparameter '" + key + "' has the wrong type");
  }
}

/// Integer or per-layer list.
std::vector<int> per_layer(const json& node, const std::string& key, std::size_t layers, int fallback) {
  if (!node.contains(key)) return std::vector<int>(layers, fallback);
  const auto& v = node.at(key);
  if (v.is_number_integer()) return std::vector<int>(layers, v.get<int>());
  if (!v.is_array() || v.size() != layers) {
    throw ValidationError("cnn '" + key + "' must be an integer or one value per layer");
  }
  return v.get<std::vector<int>>();
}

std::string gamma_text(const SvmGamma& g) {
  if (g.mode == SvmGamma::Mode::kAuto) return "auto";
  if (g.mode == SvmGamma::Mode::kScale) return "scale";
  return {};
}

json encode_labels(const Labels& y) { return json(y); }

}  // namespace

std::string family_name(Family family) {
  switch (family) {
    case Family::kKnn: return "knn";
    case Family::kSvm: return "svm";
    case Family::kRf: return "rf";
    case Family::kGbt: return "xgboost";
    case Family::kNb: return "nb";
    case Family::kMlp: return "mlp";
    case Family::kLogReg: return "logreg";
    case Family::kCnn: return "cnn";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "knn") return Family::kKnn;
  if (name == "svm") return Family::kSvm;
  if (name == "rf" || name == "random_forest") return Family::kRf;
  if (name == "xgboost" || name == "gbt") return Family::kGbt;
  if (name == "nb" || name == "naive_bayes") return Family::kNb;
  if (name == "mlp") return Family::kMlp;
  if (name == "logreg") return Family::kLogReg;
  if (name == "cnn" || name == "dcnn") return Family::kCnn;
  throw ValidationError("unknown model family '" + name + "'");
}

Family family_of(const HyperParams& params) { return static_cast<Family>(params.index()); }

void validate(const HyperParams& params) {
  std::visit(Overloaded{[](const neural::CnnSpec& s) { neural::validate(s); },
                        [](const auto& p) { learners::validate(p); }},
             params);
}

HyperParams hyperparams_from_json(Family family, const json& node) {
  const std::string fam = family_name(family);
  HyperParams out;
  switch (family) {
    case Family::kKnn: {
      reject_unknown(node, {"n_neighbors", "k", "p", "weights", "algorithm"}, fam);
      KnnParams p;
      if (node.contains("n_neighbors")) p.k = get_as<int>(node, "n_neighbors", fam);
      if (node.contains("k")) p.k = get_as<int>(node, "k", fam);
      if (node.contains("p")) p.p = get_as<double>(node, "p", fam);
      if (node.contains("weights")) {
        const auto w = get_as<std::string>(node, "weights", fam);
        if (w == "uniform") p.weights = KnnWeights::kUniform;
        else if (w == "distance") p.weights = KnnWeights::kDistance;
        else throw ValidationError("knn weights must be uniform or distance");
      }
      if (node.contains("algorithm")) p.algorithm = get_as<std::string>(node, "algorithm", fam);
      out = p;
      break;
    }
    case Family::kSvm: {
      reject_unknown(node, {"C", "gamma", "kernel", "tol", "max_iter", "probability"}, fam);
      SvmParams p;
      if (node.contains("C")) p.C = get_as<double>(node, "C", fam);
      if (node.contains("gamma")) {
        const auto& g = node.at("gamma");
        if (g.is_string()) {
          const auto s = g.get<std::string>();
          if (s == "auto") p.gamma.mode = SvmGamma::Mode::kAuto;
          else if (s == "scale") p.gamma.mode = SvmGamma::Mode::kScale;
          else throw ValidationError("svm gamma must be auto, scale, or a positive number");
        } else if (g.is_number()) {
          p.gamma.mode = SvmGamma::Mode::kValue;
          p.gamma.value = g.get<double>();
        } else {
          throw ValidationError("svm gamma must be auto, scale, or a positive number");
        }
      }
      if (node.contains("kernel")) p.kernel = get_as<std::string>(node, "kernel", fam);
      if (node.contains("tol")) p.tol = get_as<double>(node, "tol", fam);
      if (node.contains("max_iter")) p.max_iter = get_as<long>(node, "max_iter", fam);
      if (node.contains("probability")) p.probability = get_as<bool>(node, "probability", fam);
      out = p;
      break;
    }
    case Family::kRf: {
      reject_unknown(node, {"n_estimators", "max_depth", "min_samples_leaf", "min_samples_split",
                            "max_features", "bootstrap"}, fam);
      RfParams p;
      if (node.contains("n_estimators")) p.n_estimators = get_as<int>(node, "n_estimators", fam);
      if (node.contains("max_depth") && !node.at("max_depth").is_null()) {
        p.max_depth = get_as<int>(node, "max_depth", fam);
      }
      if (node.contains("min_samples_leaf")) p.min_samples_leaf = get_as<int>(node, "min_samples_leaf", fam);
      if (node.contains("min_samples_split")) p.min_samples_split = get_as<int>(node, "min_samples_split", fam);
      if (node.contains("max_features")) {
        const auto& v = node.at("max_features");
        p.max_features = v.is_number_integer() ? std::to_string(v.get<int>()) : get_as<std::string>(node, "max_features", fam);
      }
      if (node.contains("bootstrap")) p.bootstrap = get_as<bool>(node, "bootstrap", fam);
      out = p;
      break;
    }
    case Family::kGbt: {
      reject_unknown(node, {"n_estimators", "learning_rate", "max_depth", "subsample",
                            "colsample_bytree", "reg_lambda", "min_child_weight", "newton_leaves"}, fam);
      GbtParams p;
      if (node.contains("n_estimators")) p.n_estimators = get_as<int>(node, "n_estimators", fam);
      if (node.contains("learning_rate")) p.learning_rate = get_as<double>(node, "learning_rate", fam);
      if (node.contains("max_depth")) p.max_depth = get_as<int>(node, "max_depth", fam);
      if (node.contains("subsample")) p.subsample = get_as<double>(node, "subsample", fam);
      if (node.contains("colsample_bytree")) p.colsample_bytree = get_as<double>(node, "colsample_bytree", fam);
      if (node.contains("reg_lambda")) p.reg_lambda = get_as<double>(node, "reg_lambda", fam);
      if (node.contains("min_child_weight")) p.min_child_weight = get_as<double>(node, "min_child_weight", fam);
      if (node.contains("newton_leaves")) p.newton_leaves = get_as<bool>(node, "newton_leaves", fam);
      out = p;
      break;
    }
    case Family::kNb: {
      reject_unknown(node, {"var_smoothing"}, fam);
      GaussianNbParams p;
      if (node.contains("var_smoothing")) p.var_smoothing = get_as<double>(node, "var_smoothing", fam);
      out = p;
      break;
    }
    case Family::kMlp: {
      reject_unknown(node, {"hidden_layer_sizes", "hidden_units", "activation", "alpha", "learning_rate",
                            "learning_rate_init", "solver", "batch_size", "max_iter", "early_stopping",
                            "validation_fraction", "patience"}, fam);
      MlpParams p;
      for (const char* key : {"hidden_layer_sizes", "hidden_units"}) {
        if (!node.contains(key)) continue;
        const auto& v = node.at(key);
        if (v.is_array()) {
          if (v.size() != 1) throw ValidationError("mlp supports exactly one hidden layer");
          p.hidden_units = v[0].get<int>();
        } else {
          p.hidden_units = get_as<int>(node, key, fam);
        }
      }
      if (node.contains("activation")) {
        const auto a = get_as<std::string>(node, "activation", fam);
        if (a == "relu") p.activation = Activation::kRelu;
        else if (a == "tanh") p.activation = Activation::kTanh;
        else throw ValidationError("mlp activation must be relu or tanh");
      }
      if (node.contains("alpha")) p.alpha = get_as<double>(node, "alpha", fam);
      if (node.contains("learning_rate") && get_as<std::string>(node, "learning_rate", fam) != "constant") {
        throw ValidationError("only the constant learning-rate policy is supported");
      }
      if (node.contains("learning_rate_init")) p.learning_rate = get_as<double>(node, "learning_rate_init", fam);
      if (node.contains("solver") && get_as<std::string>(node, "solver", fam) != "adam") {
        throw ValidationError("only the adam solver is supported");
      }
      if (node.contains("batch_size")) p.batch_size = get_as<int>(node, "batch_size", fam);
      if (node.contains("max_iter")) p.max_epochs = get_as<int>(node, "max_iter", fam);
      if (node.contains("early_stopping")) p.early_stopping = get_as<bool>(node, "early_stopping", fam);
      if (node.contains("validation_fraction")) p.validation_fraction = get_as<double>(node, "validation_fraction", fam);
      if (node.contains("patience")) p.patience = get_as<int>(node, "patience", fam);
      out = p;
      break;
    }
    case Family::kLogReg: {
      reject_unknown(node, {"l2_strength", "tol", "max_iter"}, fam);
      LogRegParams p;
      if (node.contains("l2_strength")) p.l2_strength = get_as<double>(node, "l2_strength", fam);
      if (node.contains("tol")) p.tol = get_as<double>(node, "tol", fam);
      if (node.contains("max_iter")) p.max_iter = get_as<int>(node, "max_iter", fam);
      out = p;
      break;
    }
    case Family::kCnn: {
      reject_unknown(node, {"layers", "variant", "filters", "kernel_size", "pool_size", "dilation",
                            "dilation_schedule", "dense", "batch_size", "epochs", "optimizer",
                            "learning_rate", "patience", "validation_fraction", "early_stopping"}, fam);
      neural::CnnSpec s;
      std::size_t n = 1;
      if (node.contains("layers")) n = static_cast<std::size_t>(get_as<int>(node, "layers", fam));
      else if (node.contains("filters") && node.at("filters").is_array()) n = node.at("filters").size();
      if (n < 1 || n > 4) throw ValidationError("cnn layers must be 1-4");
      const std::string variant = node.value("variant", std::string("cnn"));
      if (variant != "cnn" && variant != "dcnn") throw ValidationError("cnn variant must be cnn or dcnn");
      s.dilated_variant = variant == "dcnn";

      std::vector<int> filters(n);
      for (std::size_t i = 0; i < n; ++i) filters[i] = 64 << i;
      if (node.contains("filters")) filters = per_layer(node, "filters", n, 64);
      const auto kernels = per_layer(node, "kernel_size", n, 3);
      const auto pools = per_layer(node, "pool_size", n, 0);
      std::vector<int> dil(n, 1);
      if (node.contains("dilation")) {
        dil = per_layer(node, "dilation", n, 1);
      } else if (s.dilated_variant) {
        const auto sched = neural::parse_dilation_schedule(node.value("dilation_schedule", std::string("exponential")));
        dil = neural::dcnn_dilation_schedule(static_cast<int>(n), sched);
      }
      s.layers.clear();
      for (std::size_t i = 0; i < n; ++i) s.layers.push_back({filters[i], kernels[i], dil[i], pools[i]});
      if (node.contains("dense")) s.dense_units = get_as<int>(node, "dense", fam);
      if (node.contains("batch_size")) s.batch_size = get_as<int>(node, "batch_size", fam);
      if (node.contains("epochs")) s.epochs = get_as<int>(node, "epochs", fam);
      if (node.contains("optimizer")) s.optimizer.kind = neural::parse_optimizer(get_as<std::string>(node, "optimizer", fam));
      if (node.contains("learning_rate")) s.optimizer.learning_rate = get_as<double>(node, "learning_rate", fam);
      if (node.contains("patience")) s.patience = get_as<int>(node, "patience", fam);
      if (node.contains("validation_fraction")) s.validation_fraction = get_as<double>(node, "validation_fraction", fam);
      if (node.contains("early_stopping")) s.early_stopping = get_as<bool>(node, "early_stopping", fam);
      out = s;
      break;
    }
  }
  validate(out);
  return out;
}

json hyperparams_to_json(const HyperParams& params) {
  return std::visit(
      Overloaded{
          [](const KnnParams& p) -> json {
            return {{"n_neighbors", p.k}, {"p", p.p},
                    {"weights", p.weights == KnnWeights::kUniform ? "uniform" : "distance"},
                    {"algorithm", p.algorithm}};
          },
          [](const SvmParams& p) -> json {
            json j = {{"C", p.C}, {"kernel", p.kernel}, {"tol", p.tol}, {"max_iter", p.max_iter},
                      {"probability", p.probability}};
            if (p.gamma.mode == SvmGamma::Mode::kValue) j["gamma"] = p.gamma.value;
            else j["gamma"] = gamma_text(p.gamma);
            return j;
          },
          [](const RfParams& p) -> json {
            return {{"n_estimators", p.n_estimators},
                    {"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
                    {"min_samples_leaf", p.min_samples_leaf},
                    {"min_samples_split", p.min_samples_split},
                    {"max_features", p.max_features},
                    {"bootstrap", p.bootstrap}};
          },
          [](const GbtParams& p) -> json {
            return {{"n_estimators", p.n_estimators}, {"learning_rate", p.learning_rate},
                    {"max_depth", p.max_depth}, {"subsample", p.subsample},
                    {"colsample_bytree", p.colsample_bytree}, {"reg_lambda", p.reg_lambda},
                    {"min_child_weight", p.min_child_weight}, {"newton_leaves", p.newton_leaves}};
          },
          [](const GaussianNbParams& p) -> json { return {{"var_smoothing", p.var_smoothing}}; },
          [](const MlpParams& p) -> json {
            return {{"hidden_layer_sizes", json::array({p.hidden_units})},
                    {"activation", p.activation == Activation::kRelu ? "relu" : "tanh"},
                    {"alpha", p.alpha}, {"learning_rate", "constant"},
                    {"learning_rate_init", p.learning_rate}, {"solver", "adam"},
                    {"batch_size", p.batch_size}, {"max_iter", p.max_epochs},
                    {"early_stopping", p.early_stopping},
                    {"validation_fraction", p.validation_fraction}, {"patience", p.patience}};
          },
          [](const LogRegParams& p) -> json {
            return {{"l2_strength", p.l2_strength}, {"tol", p.tol}, {"max_iter", p.max_iter}};
          },
          [](const neural::CnnSpec& s) -> json {
            json filters = json::array(), kernels = json::array(), pools = json::array(), dil = json::array();
            for (const auto& b : s.layers) {
              filters.push_back(b.filters);
              kernels.push_back(b.kernel);
              pools.push_back(b.pool);
              dil.push_back(b.dilation);
            }
            return {{"layers", s.layers.size()}, {"variant", s.dilated() ? "dcnn" : "cnn"},
                    {"filters", filters}, {"kernel_size", kernels}, {"pool_size", pools},
                    {"dilation", dil}, {"dense", s.dense_units}, {"batch_size", s.batch_size},
                    {"epochs", s.epochs}, {"optimizer", neural::to_string(s.optimizer.kind)},
                    {"learning_rate", s.optimizer.learning_rate}, {"patience", s.patience},
                    {"validation_fraction", s.validation_fraction},
                    {"early_stopping", s.early_stopping}};
          }},
      params);
}

std::vector<HyperParams> expand_grid(Family family, const json& grid) {
  if (!grid.is_object()) throw ValidationError("grid must be an object of candidate lists");
  std::vector<json> combos{json::object()};
  for (const auto& [key, values] : grid.items()) {
    json candidates = values.is_array() ? values : json::array({values});
    if (candidates.empty()) throw ValidationError("grid key '" + key + "' has no candidates");
    std::vector<json> next;
    for (const auto& base : combos) {
      for (const auto& v : candidates) {
        json c = base;
        c[key] = v;
        next.push_back(std::move(c));
      }
    }
    combos = std::move(next);
  }
  std::vector<HyperParams> out;
  for (const auto& c : combos) out.push_back(hyperparams_from_json(family, c));
  return out;
}

json to_json(const PipelineSpec& spec) {
  return {{"family", family_name(family_of(spec.params))},
          {"hyperparams", hyperparams_to_json(spec.params)},
          {"pca_components", spec.pca_components},
          {"standardize", spec.standardize}};
}

double inference_cost(const PipelineSpec& spec, Eigen::Index d) {
  const double k = spec.pca_components > 0 ? std::min<double>(spec.pca_components, static_cast<double>(d))
                                           : static_cast<double>(d);
  const double projection = spec.pca_components != 0 ? k * static_cast<double>(d) : 0.0;
  const double model = std::visit(
      Overloaded{
          [&](const KnnParams& p) { return k * (p.p == 1.0 || p.p == 2.0 ? 1.0 : 4.0) + p.k; },
          [&](const SvmParams&) { return k; },
          [&](const RfParams& p) { return p.n_estimators * static_cast<double>(p.max_depth.value_or(32)); },
          [&](const GbtParams& p) { return p.n_estimators * static_cast<double>(p.max_depth); },
          [&](const GaussianNbParams&) { return 2.0 * k; },
          [&](const MlpParams& p) { return k * p.hidden_units; },
          [&](const LogRegParams&) { return k; },
          [&](const neural::CnnSpec& s) {
            double cost = 0.0, ch = 1.0;
            for (const auto& b : s.layers) {
              cost += b.filters * b.kernel * ch * k;
              ch = b.filters;
            }
            return cost + s.dense_units * ch;
          }},
      spec.params);
  return projection + model;
}

Family TrainedModel::family() const { return static_cast<Family>(state.index()); }

Matrix TrainedModel::transform(const Matrix& X) const {
  if (X.cols() != n_features) {
    throw ValidationError("model expects " + std::to_string(n_features) + " features, got " +
                          std::to_string(X.cols()));
  }
  Matrix Z = scaler ? dsp::zscore_apply(*scaler, X) : X;
  if (pca) Z = features::pca_transform(*pca, Z);
  return Z;
}

Matrix TrainedModel::predict_proba_transformed(const Matrix& Z) const {
  return std::visit(Overloaded{[&](const KnnModel& m) { return knn_predict_proba(m, Z); },
                               [&](const SvmModel& m) { return svm_predict_proba(m, Z); },
                               [&](const RfModel& m) { return rf_predict_proba(m, Z); },
                               [&](const GbtModel& m) { return gbt_predict_proba(m, Z); },
                               [&](const GaussianNbModel& m) { return gaussian_nb_predict_proba(m, Z); },
                               [&](const MlpModel& m) { return mlp_predict_proba(m, Z); },
                               [&](const LogRegModel& m) { return logreg_predict_proba(m, Z); },
                               [&](const neural::CnnModel& m) { return neural::cnn_predict_proba(m, Z); }},
                    state);
}

Matrix TrainedModel::predict_proba(const Matrix& X) const {
  if (X.rows() == 0) throw ValidationError("empty query");
  return predict_proba_transformed(transform(X));
}

Labels TrainedModel::predict(const Matrix& X) const {
  const Matrix p = predict_proba(X);
  Labels out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = p(i, 1) > 0.5 ? 1 : 0;
  return out;
}

TrainedModel fit_model(const PipelineSpec& spec, const Matrix& X, const Labels& y,
                       std::uint64_t seed, int jobs) {
  validate(spec.params);
  check_training_set(X, y);
  const auto start = std::chrono::steady_clock::now();
  TrainedModel m;
  m.spec = spec;
  m.seed = seed;
  m.n_features = X.cols();
  Matrix Z = X;
  if (spec.standardize) {
    m.scaler = dsp::zscore_fit(X);
    Z = dsp::zscore_apply(*m.scaler, Z);
  }
  if (spec.pca_components != 0) {
    if (spec.pca_components < -1) throw ValidationError("pca_components must be -1, 0, or positive");
    const Eigen::Index k = spec.pca_components < 0 ? Z.cols() : std::min<Eigen::Index>(spec.pca_components, Z.cols());
    m.pca = features::pca_fit(Z, k);
    Z = features::pca_transform(*m.pca, Z);
  }
  m.state = std::visit(
      Overloaded{[&](const KnnParams& p) -> ModelState { return knn_fit(Z, y, p); },
                 [&](const SvmParams& p) -> ModelState { return svm_rbf_fit(Z, y, p, seed); },
                 [&](const RfParams& p) -> ModelState { return rf_fit(Z, y, p, seed, jobs); },
                 [&](const GbtParams& p) -> ModelState { return gbt_fit(Z, y, p, seed); },
                 [&](const GaussianNbParams& p) -> ModelState { return gaussian_nb_fit(Z, y, p); },
                 [&](const MlpParams& p) -> ModelState { return mlp_fit(Z, y, p, seed); },
                 [&](const LogRegParams& p) -> ModelState { return logreg_fit(Z, y, p); },
                 [&](const neural::CnnSpec& s) -> ModelState { return neural::train_cnn(s, Z, y, seed); }},
      spec.params);
  // Keep the resolved CNN architecture (auto pools filled in).
  if (auto* cnn = std::get_if<neural::CnnModel>(&m.state)) m.spec.params = cnn->spec;
  m.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

namespace {

json trees_json(const std::vector<DecisionTree>& trees) {
  json out = json::array();
  for (const auto& t : trees) out.push_back(to_json(t));
  return out;
}

std::vector<DecisionTree> trees_from(const json& node) {
  std::vector<DecisionTree> out;
  for (const auto& t : node) out.push_back(tree_from_json(t));
  return out;
}

json state_json(const ModelState& state, ArrayEncoding enc) {
  return std::visit(
      Overloaded{
          [&](const KnnModel& m) -> json {
            return {{"X", encode_matrix(m.X, enc)}, {"y", encode_labels(m.y)}};
          },
          [&](const SvmModel& m) -> json {
            return {{"gamma", m.gamma}, {"support", encode_matrix(m.support, enc)},
                    {"dual_coef", encode_vector(m.dual_coef, enc)}, {"bias", m.bias},
                    {"has_platt", m.has_platt}, {"platt_a", m.platt_a}, {"platt_b", m.platt_b},
                    {"iterations", m.iterations}};
          },
          [&](const RfModel& m) -> json {
            return {{"n_features", m.n_features}, {"trees", trees_json(m.trees)}};
          },
          [&](const GbtModel& m) -> json {
            return {{"n_features", m.n_features}, {"base_margin", m.base_margin},
                    {"trees", trees_json(m.trees)}, {"train_loss", m.train_loss}};
          },
          [&](const GaussianNbModel& m) -> json {
            return {{"means", encode_matrix(m.means, enc)}, {"variances", encode_matrix(m.variances, enc)},
                    {"log_prior", encode_vector(m.log_prior, enc)}, {"epsilon", m.epsilon}};
          },
          [&](const MlpModel& m) -> json {
            return {{"n_features", m.n_features}, {"theta", encode_vector(m.theta, enc)},
                    {"best_epoch", m.best_epoch}, {"train_loss", m.train_loss}, {"val_loss", m.val_loss}};
          },
          [&](const LogRegModel& m) -> json {
            return {{"weights", encode_vector(m.weights, enc)}, {"intercept", m.intercept},
                    {"iterations", m.iterations}, {"grad_norm", m.grad_norm}};
          },
          [&](const neural::CnnModel& m) -> json {
            json curve = json::array();
            for (const auto& e : m.curve) {
              curve.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss},
                               {"val_loss", e.val_loss}, {"val_accuracy", e.val_accuracy}});
            }
            return {{"input_length", m.layout.input_length}, {"params", encode_vector(m.params, enc)},
                    {"best_epoch", m.best_epoch}, {"curve", curve}};
          }},
      state);
}

ModelState state_from_json(const HyperParams& hp, const json& p) {
  return std::visit(
      Overloaded{
          [&](const KnnParams& params) -> ModelState {
            return KnnModel{params, decode_matrix(p.at("X")), p.at("y").get<Labels>()};
          },
          [&](const SvmParams& params) -> ModelState {
            SvmModel m;
            m.params = params;
            m.gamma = p.at("gamma").get<double>();
            m.support = decode_matrix(p.at("support"));
            m.dual_coef = decode_vector(p.at("dual_coef"));
            m.bias = p.at("bias").get<double>();
            m.has_platt = p.at("has_platt").get<bool>();
            m.platt_a = p.at("platt_a").get<double>();
            m.platt_b = p.at("platt_b").get<double>();
            m.iterations = p.value("iterations", 0L);
            return m;
          },
          [&](const RfParams& params) -> ModelState {
            return RfModel{params, p.at("n_features").get<Eigen::Index>(), trees_from(p.at("trees"))};
          },
          [&](const GbtParams& params) -> ModelState {
            GbtModel m;
            m.params = params;
            m.n_features = p.at("n_features").get<Eigen::Index>();
            m.base_margin = p.at("base_margin").get<double>();
            m.trees = trees_from(p.at("trees"));
            m.train_loss = p.value("train_loss", std::vector<double>{});
            return m;
          },
          [&](const GaussianNbParams& params) -> ModelState {
            GaussianNbModel m;
            m.params = params;
            m.means = decode_matrix(p.at("means"));
            m.variances = decode_matrix(p.at("variances"));
            m.log_prior = decode_vector(p.at("log_prior"));
            m.epsilon = p.at("epsilon").get<double>();
            return m;
          },
          [&](const MlpParams& params) -> ModelState {
            MlpModel m;
            m.params = params;
            m.n_features = p.at("n_features").get<Eigen::Index>();
            m.theta = decode_vector(p.at("theta"));
            m.best_epoch = p.value("best_epoch", 0);
            m.train_loss = p.value("train_loss", std::vector<double>{});
            m.val_loss = p.value("val_loss", std::vector<double>{});
            if (m.theta.size() != m.n_params()) throw DataError("MLP parameter count mismatch");
            return m;
          },
          [&](const LogRegParams& params) -> ModelState {
            LogRegModel m;
            m.params = params;
            m.weights = decode_vector(p.at("weights"));
            m.intercept = p.at("intercept").get<double>();
            m.iterations = p.value("iterations", 0);
            m.grad_norm = p.value("grad_norm", 0.0);
            return m;
          },
          [&](const neural::CnnSpec& spec) -> ModelState {
            neural::CnnModel m;
            m.spec = spec;
            m.layout = neural::plan_cnn(spec, p.at("input_length").get<int>());
            m.params = decode_vector(p.at("params"));
            m.best_epoch = p.value("best_epoch", 0);
            for (const auto& e : p.value("curve", json::array())) {
              m.curve.push_back({e.at("epoch").get<int>(), e.at("train_loss").get<double>(),
                                 e.at("val_loss").get<double>(), e.at("val_accuracy").get<double>()});
            }
            if (static_cast<std::size_t>(m.params.size()) != m.layout.total) {
              throw DataError("CNN parameter count mismatch");
            }
            return m;
          }},
      hp);
}

}  // namespace

json to_json(const TrainedModel& model, ArrayEncoding encoding) {
  json pre = json::object();
  if (model.scaler) {
    const json s = dsp::to_json(*model.scaler);
    pre["scaler"] = s;
    pre["scaler_id"] = hex64(fnv1a64(s.dump()));
  } else {
    pre["scaler"] = nullptr;
    pre["scaler_id"] = nullptr;
  }
  if (model.pca) {
    const json p = features::to_json(*model.pca, encoding);
    pre["pca"] = p;
    pre["pca_id"] = hex64(fnv1a64(p.dump()));
  } else {
    pre["pca"] = nullptr;
    pre["pca_id"] = nullptr;
  }
  return {{"family", family_name(model.family())},
          {"version", TrainedModel::kVersion},
          {"hyperparams", hyperparams_to_json(model.spec.params)},
          {"pca_components", model.spec.pca_components},
          {"standardize", model.spec.standardize},
          {"n_features", model.n_features},
          {"classes", json::array({0, 1})},
          {"parameters", state_json(model.state, encoding)},
          {"preprocessing", pre},
          {"seed", model.seed},
          {"fit_seconds", model.fit_seconds}};
}

TrainedModel model_from_json(const json& node) {
  try {
    if (node.at("version").get<int>() != TrainedModel::kVersion) {
      throw DataError("unsupported model envelope version");
    }
    TrainedModel m;
    const Family family = parse_family(node.at("family").get<std::string>());
    m.spec.params = hyperparams_from_json(family, node.at("hyperparams"));
    m.spec.pca_components = node.value("pca_components", 0);
    m.spec.standardize = node.value("standardize", true);
    m.n_features = node.at("n_features").get<Eigen::Index>();
    m.seed = node.at("seed").get<std::uint64_t>();
    m.fit_seconds = node.value("fit_seconds", 0.0);
    const auto& pre = node.at("preprocessing");
    if (!pre.at("scaler").is_null()) m.scaler = dsp::scaler_from_json(pre.at("scaler"));
    if (!pre.at("pca").is_null()) m.pca = features::pca_from_json(pre.at("pca"));
    m.state = state_from_json(m.spec.params, node.at("parameters"));
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model envelope: ") + e.what());
  } catch (const ValidationError& e) {
    throw DataError(std::string("model envelope failed validation: ") + e.what());
  }
}

std::string display_name(const PipelineSpec& spec) {
  switch (family_of(spec.params)) {
    case Family::kKnn: return "KNN";
    case Family::kSvm: return "SVM";
    case Family::kRf: return "Random Forest";
    case Family::kGbt: return "XGBoost";
    case Family::kNb: return "Naive Bayes";
    case Family::kMlp: return "MLP";
    case Family::kLogReg: return "Logistic Regression";
    case Family::kCnn: return neural::display_name(std::get<neural::CnnSpec>(spec.params));
  }
  return "unknown";
}

}  // namespace lobster::learners
