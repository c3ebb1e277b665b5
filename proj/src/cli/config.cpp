#include "lobster/cli/config.hpp"

#include <algorithm>
#include <set>

#include "lobster/common/error.hpp"
#include "lobster/common/io.hpp"

namespace lobster::cli {

using nlohmann::json;

namespace {

json knn_grid() {
  return json::array({{{"n_neighbors", 5}, {"p", 1}, {"weights", "uniform"}},
                      {{"n_neighbors", 7}, {"p", 2}, {"weights", "uniform"}},
                      {{"n_neighbors", 9}, {"p", 1}, {"weights", "uniform"}}});
}

json svm_grid() {
  return json::array({{{"C", 10}, {"gamma", "auto"}, {"kernel", "rbf"}},
                      {{"C", 10}, {"gamma", "scale"}, {"kernel", "rbf"}},
                      {{"C", 1}, {"gamma", "auto"}, {"kernel", "rbf"}}});
}

json rf_grid() {
  return json::array({{{"n_estimators", 200}, {"max_depth", nullptr}, {"min_samples_leaf", 1}, {"min_samples_split", 2}},
                      {{"n_estimators", 200}, {"max_depth", 20}, {"min_samples_leaf", 3}, {"min_samples_split", 2}},
                      {{"n_estimators", 200}, {"max_depth", nullptr}, {"min_samples_leaf", 1}, {"min_samples_split", 10}}});
}

json xgb_grid() {
  return json::array({{{"n_estimators", 300}, {"learning_rate", 0.1}, {"max_depth", 5}, {"subsample", 0.7}, {"colsample_bytree", 0.7}},
                      {{"n_estimators", 300}, {"learning_rate", 0.2}, {"max_depth", 4}, {"subsample", 0.8}, {"colsample_bytree", 0.9}},
                      {{"n_estimators", 300}, {"learning_rate", 0.1}, {"max_depth", 4}, {"subsample", 0.9}, {"colsample_bytree", 0.9}}});
}

json mlp_grid() {
  return json::array({{{"activation", "tanh"}, {"hidden_layer_sizes", json::array({128})}, {"alpha", 0.001}},
                      {{"activation", "relu"}, {"hidden_layer_sizes", json::array({64})}, {"alpha", 0.01}},
                      {{"activation", "relu"}, {"hidden_layer_sizes", json::array({64})}, {"alpha", 0.0001}}});
}

json cnn1_grid(const char* variant) {
  return json::array({{{"variant", variant}, {"layers", 1}, {"batch_size", 32}, {"epochs", 10}, {"dense", 128}, {"filters", 64}, {"kernel_size", 5}, {"pool_size", 2}, {"optimizer", "adam"}},
                      {{"variant", variant}, {"layers", 1}, {"batch_size", 32}, {"epochs", 10}, {"dense", 128}, {"filters", 64}, {"kernel_size", 3}, {"pool_size", 2}, {"optimizer", "rmsprop"}},
                      {{"variant", variant}, {"layers", 1}, {"batch_size", 32}, {"epochs", 10}, {"dense", 128}, {"filters", 64}, {"kernel_size", 5}, {"pool_size", 2}, {"optimizer", "rmsprop"}}});
}

json cnn2_grid(const char* variant) {
  return json::array({{{"variant", variant}, {"layers", 2}, {"batch_size", 32}, {"epochs", 20}, {"dense", 64}, {"filters", {64, 128}}, {"kernel_size", {5, 5}}, {"pool_size", {2, 2}}},
                      {{"variant", variant}, {"layers", 2}, {"batch_size", 64}, {"epochs", 20}, {"dense", 128}, {"filters", {128, 256}}, {"kernel_size", {3, 5}}, {"pool_size", {2, 2}}},
                      {{"variant", variant}, {"layers", 2}, {"batch_size", 64}, {"epochs", 20}, {"dense", 256}, {"filters", {64, 128}}, {"kernel_size", {5, 5}}, {"pool_size", {2, 2}}}});
}

json entry(const char* name, const char* family, int pca, json grid) {
  return {{"name", name}, {"family", family}, {"pca_components", pca}, {"standardize", true}, {"grid", std::move(grid)}};
}

/// Recursive overlay. Objects merge key by key; every other value, and the
/// nodes listed in `replace`, is swapped wholesale.
void overlay(json& base, const json& over, const std::string& path) {
  static const std::set<std::string> replace = {"dataset", "models", "tasks", "mfcc_dims", "bases"};
  if (!over.is_object()) throw ValidationError("config " + (path.empty() ? std::string("root") : path) + " must be an object");
  for (const auto& [key, value] : over.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ValidationError("unknown config key '" + where + "'");
    if (base[key].is_object() && !replace.count(key)) {
      overlay(base[key], value, where);
    } else {
      base[key] = value;
    }
  }
}

template <typename T>
T get(const json& node, const char* key, const std::string& where) {
  try {
    return node.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config key '" + where + "." + key + "' has the wrong type");
  }
}

void require_keys(const json& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node.is_object()) throw ValidationError("config '" + where + "' must be an object");
  for (const auto& [key, _] : node.items()) {
    if (!allowed.count(key)) throw ValidationError("unknown config key '" + where + "." + key + "'");
  }
}

ModelEntry parse_model(const json& node, std::size_t index) {
  const std::string where = "models[" + std::to_string(index) + "]";
  require_keys(node, {"name", "family", "pca_components", "standardize", "grid"}, where);
  ModelEntry m;
  m.name = get<std::string>(node, "name", where);
  m.family = learners::parse_family(get<std::string>(node, "family", where));
  if (node.contains("pca_components")) m.pca_components = get<int>(node, "pca_components", where);
  if (node.contains("standardize")) m.standardize = get<bool>(node, "standardize", where);
  if (node.contains("grid")) m.grid = node.at("grid");
  if (m.pca_components < -1) throw ValidationError(where + ".pca_components must be >= -1");
  if (m.name.empty() || m.name.find_first_of(",/\\\n") != std::string::npos) {
    throw ValidationError(where + ".name must be non-empty without commas or slashes");
  }
  (void)m.candidates();
  return m;
}

}  // namespace

std::vector<learners::PipelineSpec> ModelEntry::candidates() const {
  std::vector<learners::HyperParams> params;
  try {
    if (grid.is_array()) {
      if (grid.empty()) throw ValidationError("empty candidate list");
      for (const auto& c : grid) params.push_back(learners::hyperparams_from_json(family, c));
    } else {
      params = learners::expand_grid(family, grid);
    }
  } catch (const ValidationError& e) {
    throw ValidationError("model '" + name + "': " + e.what());
  }
  std::vector<learners::PipelineSpec> out;
  for (auto& p : params) out.push_back({std::move(p), pca_components, standardize});
  return out;
}

const ModelEntry& RunConfig::model(const std::string& name) const {
  for (const auto& m : models) {
    if (m.name == name) return m;
  }
  throw ValidationError("no model named '" + name + "' in the config");
}

bool RunConfig::flips(Task task) const {
  return task == Task::kAge ? positive_age == "adult" : positive_sex == "male";
}

json default_config_json() {
  return {
      {"dataset", {{"synthetic", ingest::to_json(ingest::default_synthetic_spec())}}},
      {"tasks", {"age", "sex"}},
      {"positive_class", {{"age", "juvenile"}, {"sex", "female"}}},
      {"mfcc_dims", {40, 50, 60}},
      {"preprocessing",
       {{"highpass_hz", 35.0}, {"highpass_order", 2}, {"band_low_hz", 50.0}, {"band_high_hz", 8000.0},
        {"band_order", 4}, {"snr_threshold_db", 6.0}, {"snr_floor_percentile", 10.0}}},
      {"mfcc", {{"n_fft", 2048}, {"hop", 512}, {"n_mels", 128}, {"fmin", 50.0}, {"fmax", 8000.0}}},
      {"split", {{"test_fraction", 0.2}, {"seed", 42}}},
      {"cv", {{"folds", 5}}},
      {"models", json::array({entry("KNN", "knn", 40, knn_grid()), entry("SVM", "svm", 30, svm_grid()),
                              entry("Random Forest", "rf", 0, rf_grid()), entry("XGBoost", "xgboost", 0, xgb_grid()),
                              entry("Naive Bayes", "nb", 30, json::object()), entry("MLP", "mlp", -1, mlp_grid()),
                              entry("CNN1L", "cnn", 30, cnn1_grid("cnn")), entry("CNN2L", "cnn", 30, cnn2_grid("cnn")),
                              entry("DCNN1L", "cnn", 30, cnn1_grid("dcnn")), entry("DCNN2L", "cnn", 30, cnn2_grid("dcnn"))})},
      {"evaluation",
       {{"timing", true}, {"timing_warmup", 1}, {"timing_repeats", 30}, {"bootstrap", 2000},
        {"confidence", 0.95}, {"tie_rule", "midrank_floor"}, {"calibration_bins", 10}}},
      {"stacking", {{"bases", {"Random Forest", "XGBoost", "SVM", "CNN1L"}}, {"folds", 5}, {"mfcc", 0}, {"meta", "logreg"}}},
      {"seed", 42},
      {"jobs", 1},
      {"out", "runs/default"},
  };
}

RunConfig parse_config(const json& overrides) {
  json j = default_config_json();
  overlay(j, overrides, "");
  RunConfig c;

  const json& ds = j.at("dataset");
  require_keys(ds, {"synthetic", "manifest", "sample_rate"}, "dataset");
  if (ds.contains("synthetic") == ds.contains("manifest")) {
    throw ValidationError("dataset needs exactly one of 'synthetic' or 'manifest'");
  }
  if (ds.contains("sample_rate")) c.sample_rate = get<int>(ds, "sample_rate", "dataset");
  if (ds.contains("synthetic")) {
    try {
      c.synthetic = ingest::synthetic_spec_from_json(ds.at("synthetic"));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("dataset.synthetic: ") + e.what());
    }
    ingest::validate(*c.synthetic);
    c.sample_rate = c.synthetic->sample_rate;
  } else {
    c.manifest = get<std::string>(ds, "manifest", "dataset");
  }

  c.tasks.clear();
  for (const auto& t : j.at("tasks")) c.tasks.push_back(parse_task(t.get<std::string>()));
  if (c.tasks.empty()) throw ValidationError("tasks must list age and/or sex");

  const json& pos = j.at("positive_class");
  c.positive_age = get<std::string>(pos, "age", "positive_class");
  c.positive_sex = get<std::string>(pos, "sex", "positive_class");
  if (c.positive_age != "juvenile" && c.positive_age != "adult") {
    throw ValidationError("positive_class.age must be juvenile or adult");
  }
  if (c.positive_sex != "female" && c.positive_sex != "male") {
    throw ValidationError("positive_class.sex must be female or male");
  }

  c.mfcc_dims = j.at("mfcc_dims").get<std::vector<int>>();
  if (c.mfcc_dims.empty()) throw ValidationError("mfcc_dims must not be empty");
  {
    std::set<int> seen;
    for (int d : c.mfcc_dims) {
      if (d < 2) throw ValidationError("mfcc_dims entries must be >= 2");
      if (!seen.insert(d).second) throw ValidationError("mfcc_dims repeats " + std::to_string(d));
    }
  }

  const json& pre = j.at("preprocessing");
  c.preprocessing.highpass_hz = get<double>(pre, "highpass_hz", "preprocessing");
  c.preprocessing.highpass_order = get<int>(pre, "highpass_order", "preprocessing");
  c.preprocessing.band_low_hz = get<double>(pre, "band_low_hz", "preprocessing");
  c.preprocessing.band_high_hz = get<double>(pre, "band_high_hz", "preprocessing");
  c.preprocessing.band_order = get<int>(pre, "band_order", "preprocessing");
  c.snr.threshold_db = get<double>(pre, "snr_threshold_db", "preprocessing");
  c.snr.floor_percentile = get<double>(pre, "snr_floor_percentile", "preprocessing");
  (void)dsp::make_preprocess_filters(c.preprocessing, c.sample_rate);

  const json& mf = j.at("mfcc");
  c.mfcc.n_fft = get<int>(mf, "n_fft", "mfcc");
  c.mfcc.hop = get<int>(mf, "hop", "mfcc");
  c.mfcc.n_mels = get<int>(mf, "n_mels", "mfcc");
  c.mfcc.fmin = get<double>(mf, "fmin", "mfcc");
  c.mfcc.fmax = get<double>(mf, "fmax", "mfcc");
  c.mfcc.sample_rate = c.sample_rate;
  for (int d : c.mfcc_dims) {
    features::MfccConfig probe = c.mfcc;
    probe.n_mfcc = d;
    features::validate(probe);
  }

  c.test_fraction = get<double>(j.at("split"), "test_fraction", "split");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ValidationError("split.test_fraction must lie in (0, 1)");
  c.folds = get<int>(j.at("cv"), "folds", "cv");
  if (c.folds < 2) throw ValidationError("cv.folds must be >= 2");

  c.models.clear();
  std::set<std::string> names;
  for (std::size_t i = 0; i < j.at("models").size(); ++i) {
    c.models.push_back(parse_model(j.at("models")[i], i));
    if (!names.insert(c.models.back().name).second) {
      throw ValidationError("duplicate model name '" + c.models.back().name + "'");
    }
  }
  if (c.models.empty()) throw ValidationError("models must not be empty");

  const json& ev = j.at("evaluation");
  c.evaluation.timing = get<bool>(ev, "timing", "evaluation");
  c.evaluation.timing_warmup = get<int>(ev, "timing_warmup", "evaluation");
  c.evaluation.timing_repeats = get<int>(ev, "timing_repeats", "evaluation");
  c.evaluation.bootstrap = get<int>(ev, "bootstrap", "evaluation");
  c.evaluation.confidence = get<double>(ev, "confidence", "evaluation");
  c.evaluation.tie_rule = eval::parse_tie_rule(get<std::string>(ev, "tie_rule", "evaluation"));
  c.evaluation.calibration_bins = get<int>(ev, "calibration_bins", "evaluation");
  if (c.evaluation.timing_repeats < 5) throw ValidationError("evaluation.timing_repeats must be >= 5");
  if (c.evaluation.timing_warmup < 1) throw ValidationError("evaluation.timing_warmup must be >= 1");
  if (c.evaluation.bootstrap < 100) throw ValidationError("evaluation.bootstrap must be >= 100");
  if (c.evaluation.calibration_bins < 2) throw ValidationError("evaluation.calibration_bins must be >= 2");

  const json& st = j.at("stacking");
  c.stacking.bases = st.at("bases").get<std::vector<std::string>>();
  c.stacking.folds = get<int>(st, "folds", "stacking");
  c.stacking.mfcc = get<int>(st, "mfcc", "stacking");
  c.stacking.meta = get<std::string>(st, "meta", "stacking");
  if (c.stacking.meta != "logreg" && c.stacking.meta != "identity") {
    throw ValidationError("stacking.meta must be logreg or identity");
  }
  if (c.stacking.folds < 2) throw ValidationError("stacking.folds must be >= 2");
  if (c.stacking.mfcc != 0 &&
      std::find(c.mfcc_dims.begin(), c.mfcc_dims.end(), c.stacking.mfcc) == c.mfcc_dims.end()) {
    throw ValidationError("stacking.mfcc must be one of mfcc_dims");
  }

  c.seed = get<std::uint64_t>(j, "seed", "root");
  c.split_seed = get<std::uint64_t>(j.at("split"), "seed", "split");
  c.jobs = get<int>(j, "jobs", "root");
  if (c.jobs < 1) throw ValidationError("jobs must be >= 1");
  c.out = get<std::string>(j, "out", "root");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c = parse_config(j);
  if (c.manifest && c.manifest->is_relative()) c.manifest = path.parent_path() / *c.manifest;
  return c;
}

json to_json(const RunConfig& c) {
  json ds;
  if (c.synthetic) ds["synthetic"] = ingest::to_json(*c.synthetic);
  if (c.manifest) ds["manifest"] = c.manifest->string();
  ds["sample_rate"] = c.sample_rate;
  json tasks = json::array();
  for (Task t : c.tasks) tasks.push_back(to_string(t));
  json models = json::array();
  for (const auto& m : c.models) {
    models.push_back({{"name", m.name}, {"family", learners::family_name(m.family)},
                      {"pca_components", m.pca_components}, {"standardize", m.standardize}, {"grid", m.grid}});
  }
  return {
      {"dataset", ds},
      {"tasks", tasks},
      {"positive_class", {{"age", c.positive_age}, {"sex", c.positive_sex}}},
      {"mfcc_dims", c.mfcc_dims},
      {"preprocessing",
       {{"highpass_hz", c.preprocessing.highpass_hz}, {"highpass_order", c.preprocessing.highpass_order},
        {"band_low_hz", c.preprocessing.band_low_hz}, {"band_high_hz", c.preprocessing.band_high_hz},
        {"band_order", c.preprocessing.band_order}, {"snr_threshold_db", c.snr.threshold_db},
        {"snr_floor_percentile", c.snr.floor_percentile}}},
      {"mfcc", {{"n_fft", c.mfcc.n_fft}, {"hop", c.mfcc.hop}, {"n_mels", c.mfcc.n_mels}, {"fmin", c.mfcc.fmin}, {"fmax", c.mfcc.fmax}}},
      {"split", {{"test_fraction", c.test_fraction}, {"seed", c.split_seed}}},
      {"cv", {{"folds", c.folds}}},
      {"models", models},
      {"evaluation",
       {{"timing", c.evaluation.timing}, {"timing_warmup", c.evaluation.timing_warmup},
        {"timing_repeats", c.evaluation.timing_repeats}, {"bootstrap", c.evaluation.bootstrap},
        {"confidence", c.evaluation.confidence}, {"tie_rule", eval::to_string(c.evaluation.tie_rule)},
        {"calibration_bins", c.evaluation.calibration_bins}}},
      {"stacking", {{"bases", c.stacking.bases}, {"folds", c.stacking.folds}, {"mfcc", c.stacking.mfcc}, {"meta", c.stacking.meta}}},
      {"seed", c.seed},
      {"jobs", c.jobs},
      {"out", c.out.string()},
  };
}

std::string run_id(const RunConfig& config) {
  json j = to_json(config);
  // Output location and parallelism do not change results.
  j.erase("out");
  j.erase("jobs");
  return hex64(fnv1a64(j.dump() + "|" + std::to_string(config.seed) + "|" + kCodeVersion));
}

}  // namespace lobster::cli
