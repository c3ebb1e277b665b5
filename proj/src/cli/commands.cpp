#include "lobster/cli/commands.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <limits>
#include <memory>
#include <set>
#include <thread>

#include "lobster/common/error.hpp"
#include "lobster/common/io.hpp"
#include "lobster/common/rng.hpp"
#include "lobster/eval/calibration.hpp"
#include "lobster/eval/split.hpp"
#include "lobster/eval/stacking.hpp"
#include "lobster/eval/stats.hpp"
#include "lobster/eval/timing.hpp"
#include "lobster/features/extract.hpp"
#include "lobster/ingest/synthetic.hpp"
#include "lobster/ingest/wav.hpp"
#include "lobster/learners/grid_search.hpp"

namespace lobster::cli {

namespace fs = std::filesystem;
using nlohmann::json;

void Logger::event(const std::string& name, const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string line = "event=" + name;
  for (const auto& [k, v] : fields) {
    const bool quote = v.find_first_of(" =\"") != std::string::npos || v.empty();
    line += " " + k + "=" + (quote ? "\"" + v + "\"" : v);
  }
  if (echo_) std::cerr << line << '\n';
  lines_.push_back(std::move(line));
}

ArtifactWriter::ArtifactWriter(fs::path root, std::string command, const RunConfig& config)
    : root_(std::move(root)), command_(std::move(command)), config_(to_json(config)), run_id_(run_id(config)) {}

void ArtifactWriter::write(const std::string& relpath, const std::string& contents) {
  atomic_write(root_ / relpath, contents);
  hashes_[relpath] = hex64(fnv1a64(contents));
}

void ArtifactWriter::write(const std::string& relpath, const std::vector<std::uint8_t>& contents) {
  atomic_write(root_ / relpath, contents);
  hashes_[relpath] = hex64(fnv1a64(std::string_view(reinterpret_cast<const char*>(contents.data()), contents.size())));
}

void ArtifactWriter::finish(const Logger& log) {
  std::string text;
  for (const auto& l : log.lines()) text += l + "\n";
  write("logs/" + command_ + ".log", text);
  json manifest = {{"run_id", run_id_}, {"command", command_}, {"code_version", kCodeVersion},
                   {"config", config_}, {"artifacts", hashes_}};
  atomic_write(root_ / ("runs/" + command_ + ".json"), manifest.dump(2) + "\n");
  atomic_write(root_ / "config.json", config_.dump(2) + "\n");
}

namespace {

std::string fmt(double v, int decimals = 4) { return format_fixed(v, decimals); }

std::uint64_t seed_for(std::uint64_t seed, const std::string& what) {
  return Rng::derive_seed(seed, fnv1a64(what));
}

std::string dim_dir(Task task, int dim) { return to_string(task) + "/mfcc" + std::to_string(dim); }

fs::path manifest_path(const RunConfig& config) {
  if (config.manifest) return *config.manifest;
  return config.out / "dataset" / "manifest.csv";
}

std::vector<ingest::IndividualLabels> read_individuals(const fs::path& path) {
  const auto lines = nonblank_lines(read_text(path));
  if (lines.empty() || lines.front() != "individual_id,sex,age") throw DataError(path.string() + " has an unexpected header");
  std::vector<ingest::IndividualLabels> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 3) throw DataError(path.string() + " line " + std::to_string(i + 1) + " needs 3 fields");
    out.push_back({f[0], parse_sex(f[1]), parse_age(f[2])});
  }
  return out;
}

struct TaskData {
  LoadedFeatures data;
  eval::RowSplit rows;
  Matrix X_train, X_test;
  Labels y_train, y_test;
  std::vector<std::string> g_train, g_test;
};

eval::SplitPlan make_split(const RunConfig& config, const LoadedFeatures& f) {
  return eval::group_stratified_split(f.row_labels, config.test_fraction, config.split_seed);
}

TaskData task_data(const RunConfig& config, Task task, int dim) {
  TaskData t;
  t.data = load_task_features(config.out, task, dim);
  const auto plan = make_split(config, t.data);
  t.rows = eval::split_rows(plan, t.data.matrix.groups);
  eval::assert_group_disjoint(t.data.matrix.groups, t.rows.train, t.rows.test);
  const auto& m = t.data.matrix;
  t.X_train = m.rows(t.rows.train, Eigen::all);
  t.X_test = m.rows(t.rows.test, Eigen::all);
  for (auto i : t.rows.train) {
    t.y_train.push_back(m.labels[static_cast<std::size_t>(i)]);
    t.g_train.push_back(m.groups[static_cast<std::size_t>(i)]);
  }
  for (auto i : t.rows.test) {
    t.y_test.push_back(m.labels[static_cast<std::size_t>(i)]);
    t.g_test.push_back(m.groups[static_cast<std::size_t>(i)]);
  }
  return t;
}

std::string model_file(Task task, int dim, const std::string& name) {
  return "models/" + dim_dir(task, dim) + "/" + model_slug(name) + ".json";
}

learners::TrainedModel load_model(const RunConfig& config, Task task, int dim, const std::string& name) {
  const fs::path path = config.out / model_file(task, dim, name);
  if (!fs::exists(path)) throw DataError("missing model " + path.string() + " (run train first)");
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + " is not valid JSON: " + e.what());
  }
  return learners::model_from_json(j.at("model"));
}

std::string positive_name(const RunConfig& c, Task task) {
  return task == Task::kAge ? c.positive_age : c.positive_sex;
}

std::string report_header(const RunConfig& c, Task task) {
  return "# task=" + to_string(task) + " positive=" + positive_name(c, task) + " seed=" + std::to_string(c.seed) +
         " split_seed=" + std::to_string(c.split_seed) + " run_id=" + run_id(c) + "\n";
}

/// Best row per model: highest accuracy, then AUC, then the smaller dimension.
std::vector<eval::MetricRow> best_per_model(const std::vector<eval::MetricRow>& rows) {
  std::vector<eval::MetricRow> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& o) { return o.model == r.model; });
    if (it == out.end()) {
      out.push_back(r);
    } else if (r.accuracy > it->accuracy || (r.accuracy == it->accuracy && r.auc_roc > it->auc_roc)) {
      *it = r;
    }
  }
  return out;
}

void ensure_dataset(const RunConfig& config, Logger& log) {
  if (config.manifest) return;
  if (!fs::exists(manifest_path(config))) cmd_synth(config, log);
}

}  // namespace

std::string feature_file_name(Task task, int dim) {
  return "features_" + to_string(task) + "_mfcc" + std::to_string(dim) + ".csv";
}

std::string model_slug(const std::string& name) {
  std::string s;
  for (char ch : name) {
    if (std::isalnum(static_cast<unsigned char>(ch))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    else if (!s.empty() && s.back() != '_') s += '_';
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s.empty() ? "model" : s;
}

LoadedFeatures load_task_features(const fs::path& out, Task task, int dim) {
  const fs::path path = out / "features" / feature_file_name(task, dim);
  if (!fs::exists(path)) throw DataError("missing features " + path.string() + " (run features first)");
  LoadedFeatures f;
  f.matrix = features::load_features(path);
  const auto individuals = read_individuals(out / "features" / "individuals.csv");
  std::map<std::string, ingest::IndividualLabels> by_id;
  for (const auto& ind : individuals) by_id[ind.individual_id] = ind;
  for (const auto& g : f.matrix.groups) {
    const auto it = by_id.find(g);
    if (it == by_id.end()) throw DataError("individual '" + g + "' missing from individuals.csv");
    f.row_labels.push_back(it->second);
  }
  return f;
}

void cmd_synth(const RunConfig& config, Logger& log) {
  if (!config.synthetic) throw ValidationError("synth needs a synthetic dataset spec in the config");
  ArtifactWriter w(config.out, "synth", config);
  const auto segments = ingest::generate_synthetic_dataset(*config.synthetic);
  std::vector<std::string> order;
  std::map<std::string, std::pair<ingest::IndividualLabels, std::vector<double>>> clips;
  for (const auto& s : segments) {
    auto it = clips.find(s.labels.individual_id);
    if (it == clips.end()) {
      order.push_back(s.labels.individual_id);
      it = clips.emplace(s.labels.individual_id, std::make_pair(s.labels, std::vector<double>{})).first;
    }
    it->second.second.insert(it->second.second.end(), s.samples.begin(), s.samples.end());
  }
  ingest::DatasetManifest manifest;
  manifest.sample_rate_expected = config.synthetic->sample_rate;
  for (const auto& id : order) {
    const auto& [labels, samples] = clips.at(id);
    const std::string rel = "wav/" + model_slug(id) + ".wav";
    ingest::AudioClip clip{samples, config.synthetic->sample_rate};
    w.write("dataset/" + rel, ingest::encode_wav(clip, ingest::WavSampleFormat::kFloat32));
    manifest.entries.push_back({rel, labels});
    log.event("synth_clip", {{"individual", id}, {"seconds", std::to_string(samples.size() / static_cast<std::size_t>(clip.sample_rate))}});
  }
  ingest::validate_manifest(manifest);
  w.write("dataset/manifest.csv", ingest::write_manifest_csv(manifest));
  w.write("dataset/synthetic_spec.json", ingest::to_json(*config.synthetic).dump(2) + "\n");
  log.event("synth_done", {{"files", std::to_string(order.size())}, {"segments", std::to_string(segments.size())}});
  w.finish(log);
}

void cmd_features(const RunConfig& config, Logger& log) {
  ensure_dataset(config, log);
  ArtifactWriter w(config.out, "features", config);
  const fs::path mpath = manifest_path(config);
  const auto manifest = ingest::read_manifest(mpath, config.sample_rate);
  const auto segments = ingest::load_segments(manifest, mpath.parent_path());
  log.event("segments_loaded", {{"files", std::to_string(manifest.entries.size())}, {"segments", std::to_string(segments.size())}});

  features::MfccConfig base = config.mfcc;
  base.sample_rate = config.sample_rate;
  const auto report = features::extract_features(segments, config.preprocessing, config.snr, base, config.mfcc_dims, config.jobs);
  log.event("snr_screen", {{"input", std::to_string(report.n_input)}, {"discarded", std::to_string(report.n_discarded)},
                           {"floor_db", fmt(report.floor_db)}});

  std::string individuals = "individual_id,sex,age\n";
  std::set<std::string> seen;
  for (const auto& e : manifest.entries) {
    if (seen.insert(e.labels.individual_id).second) {
      individuals += e.labels.individual_id + "," + to_string(e.labels.sex) + "," + to_string(e.labels.age) + "\n";
    }
  }
  w.write("features/individuals.csv", individuals);

  json summary = {{"n_input", report.n_input}, {"n_discarded", report.n_discarded}, {"floor_db", report.floor_db},
                  {"preprocessing", to_json(config).at("preprocessing")}, {"files", json::array()}};
  for (Task task : config.tasks) {
    for (int dim : config.mfcc_dims) {
      auto fm = report.by_dim.at(dim).for_task(task);
      if (config.flips(task)) {
        for (auto& l : fm.labels) l = 1 - l;
      }
      const std::string name = feature_file_name(task, dim);
      w.write("features/" + name, features::write_feature_csv(fm));
      summary["files"].push_back({{"file", name}, {"rows", fm.size()}, {"dim", dim}});
      log.event("features_written", {{"task", to_string(task)}, {"mfcc", std::to_string(dim)}, {"rows", std::to_string(fm.size())}});
    }
  }
  w.write("features/report.json", summary.dump(2) + "\n");
  w.finish(log);
}

void cmd_train(const RunConfig& config, Logger& log) {
  ArtifactWriter w(config.out, "train", config);
  bool split_written = false;
  for (Task task : config.tasks) {
    for (int dim : config.mfcc_dims) {
      const TaskData t = task_data(config, task, dim);
      if (!split_written) {
        const auto plan = make_split(config, t.data);
        w.write("split.json", json({{"train", plan.train_groups}, {"test", plan.test_groups},
                                    {"test_fraction", plan.test_fraction}, {"seed", plan.seed}}).dump(2) + "\n");
        split_written = true;
      }
      const auto fold_of = eval::stratified_kfold(t.y_train, config.folds,
                                                  seed_for(config.seed, "folds|" + to_string(task) + "|" + std::to_string(dim)),
                                                  &t.g_train);
      for (const auto& entry : config.models) {
        const std::string key = to_string(task) + "|" + std::to_string(dim) + "|" + entry.name;
        const std::uint64_t seed = seed_for(config.seed, key);
        const auto candidates = entry.candidates();
        learners::GridResult grid;
        if (candidates.size() == 1) {
          grid.cells.push_back({0, candidates.front(), {}, std::numeric_limits<double>::quiet_NaN(),
                                std::numeric_limits<double>::quiet_NaN(),
                                learners::inference_cost(candidates.front(), t.X_train.cols())});
        } else {
          grid = learners::grid_search(candidates, t.X_train, t.y_train, fold_of, seed, config.jobs);
        }
        for (const auto& cell : grid.cells) {
          log.event("grid_cell", {{"task", to_string(task)}, {"mfcc", std::to_string(dim)}, {"model", entry.name},
                                  {"cell", std::to_string(cell.index)}, {"mean_accuracy", fmt(cell.mean_accuracy)},
                                  {"std_accuracy", fmt(cell.std_accuracy)}});
        }
        const auto& best = grid.best_cell();
        const auto model = learners::fit_model(best.spec, t.X_train, t.y_train, seed, config.jobs);
        json cells = json::array();
        for (const auto& c : grid.cells) {
          cells.push_back({{"index", c.index}, {"spec", learners::to_json(c.spec)}, {"fold_accuracy", c.fold_accuracy},
                           {"mean_accuracy", std::isnan(c.mean_accuracy) ? json(nullptr) : json(c.mean_accuracy)},
                           {"cost", c.cost}});
        }
        json doc = {{"name", entry.name},
                    {"display_name", learners::display_name(best.spec)},
                    {"task", to_string(task)},
                    {"mfcc", dim},
                    {"positive", positive_name(config, task)},
                    {"grid", {{"best", grid.best}, {"grid_time_s", grid.wall_seconds}, {"cells", cells}}},
                    {"model", learners::to_json(model)}};
        w.write(model_file(task, dim, entry.name), doc.dump(1) + "\n");
        log.event("model_trained", {{"task", to_string(task)}, {"mfcc", std::to_string(dim)}, {"model", entry.name},
                                    {"best_cell", std::to_string(grid.best)}, {"grid_time_s", fmt(grid.wall_seconds, 3)},
                                    {"fit_s", fmt(model.fit_seconds, 3)}});
      }
    }
  }
  w.finish(log);
}

std::vector<TaskMetrics> cmd_evaluate(const RunConfig& config, Logger& log) {
  ArtifactWriter w(config.out, "evaluate", config);
  std::vector<TaskMetrics> all;
  for (Task task : config.tasks) {
    TaskMetrics tm{task, {}, {}};
    json confusion = json::array();
    json calibration = json::array();
    json tests = json::array();
    std::vector<std::size_t> mcnemar_index;
    for (int dim : config.mfcc_dims) {
      const TaskData t = task_data(config, task, dim);
      std::vector<Labels> preds;
      std::vector<Vector> scores;
      std::vector<std::size_t> row_of;
      for (const auto& entry : config.models) {
        const auto model = load_model(config, task, dim, entry.name);
        const Matrix P = model.predict_proba(t.X_test);
        const Vector p1 = P.col(1);
        Labels pred(static_cast<std::size_t>(p1.size()));
        for (Eigen::Index i = 0; i < p1.size(); ++i) pred[static_cast<std::size_t>(i)] = p1(i) > 0.5 ? 1 : 0;
        eval::MetricRow row = eval::confusion_and_rates(t.y_test, pred);
        row.model = entry.name;
        row.mfcc = dim;
        row.auc_roc = eval::roc_auc(t.y_test, std::span<const double>(p1.data(), static_cast<std::size_t>(p1.size())));
        row.it_ms = std::numeric_limits<double>::quiet_NaN();
        if (config.evaluation.timing) {
          const auto timing = eval::measure_inference_time([&](const Matrix& X) { (void)model.predict_proba(X); }, t.X_test,
                                                           config.evaluation.timing_warmup, config.evaluation.timing_repeats);
          row.it_ms = timing.median_ms;
        }
        const auto cal = eval::calibration_report(std::span<const double>(p1.data(), static_cast<std::size_t>(p1.size())),
                                                  t.y_test, config.evaluation.calibration_bins);
        confusion.push_back({{"model", entry.name}, {"mfcc", dim}, {"tp", row.confusion.tp}, {"fp", row.confusion.fp},
                             {"tn", row.confusion.tn}, {"fn", row.confusion.fn},
                             {"precision_degenerate", row.precision_degenerate}, {"recall_degenerate", row.recall_degenerate}});
        calibration.push_back({{"model", entry.name}, {"mfcc", dim}, {"report", eval::to_json(cal)}});
        log.event("evaluated", {{"task", to_string(task)}, {"mfcc", std::to_string(dim)}, {"model", entry.name},
                                {"accuracy", fmt(row.accuracy)}, {"auc", fmt(row.auc_roc)},
                                {"it_ms", std::isnan(row.it_ms) ? "nan" : fmt(row.it_ms, 6)}});
        row_of.push_back(tm.rows.size());
        tm.rows.push_back(row);
        preds.push_back(std::move(pred));
        scores.push_back(p1);
      }

      for (std::size_t a = 0; a < preds.size(); ++a) {
        for (std::size_t b = a + 1; b < preds.size(); ++b) {
          auto r = eval::mcnemar(preds[a], preds[b], t.y_test);
          json j = eval::to_json(r);
          j["mfcc"] = dim;
          j["model_a"] = config.models[a].name;
          j["model_b"] = config.models[b].name;
          mcnemar_index.push_back(tests.size());
          tests.push_back(j);
        }
      }
      if (preds.size() >= 2) {
        std::vector<std::size_t> order(preds.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
          return tm.rows[row_of[x]].auc_roc > tm.rows[row_of[y]].auc_roc;
        });
        const auto& sa = scores[order[0]];
        const auto& sb = scores[order[1]];
        auto r = eval::bootstrap_auc_diff(std::span<const double>(sa.data(), static_cast<std::size_t>(sa.size())),
                                          std::span<const double>(sb.data(), static_cast<std::size_t>(sb.size())), t.y_test,
                                          config.evaluation.bootstrap,
                                          seed_for(config.seed, "bootstrap|" + to_string(task) + "|" + std::to_string(dim)),
                                          config.evaluation.confidence);
        json j = eval::to_json(r);
        j["mfcc"] = dim;
        j["model_a"] = config.models[order[0]].name;
        j["model_b"] = config.models[order[1]].name;
        tests.push_back(j);
        log.event("bootstrap", {{"task", to_string(task)}, {"mfcc", std::to_string(dim)}, {"a", config.models[order[0]].name},
                                {"b", config.models[order[1]].name}, {"delta_auc", fmt(r.estimate)},
                                {"redraws", std::to_string(r.redraws)}});
      }
    }
    std::vector<double> ps;
    for (auto i : mcnemar_index) ps.push_back(tests[i]["p_value"].get<double>());
    const auto adj = eval::benjamini_hochberg(ps);
    for (std::size_t k = 0; k < mcnemar_index.size(); ++k) tests[mcnemar_index[k]]["adjusted_p"] = adj[k];

    const auto best = best_per_model(tm.rows);
    tm.ranks = eval::rank_summary(best, config.evaluation.tie_rule);
    const std::string dir = "reports/" + to_string(task) + "/";
    const std::string header = report_header(config, task);
    w.write(dir + "metrics.csv", eval::metrics_to_csv(tm.rows));
    w.write(dir + "metrics.txt", header + eval::format_metric_table(tm.rows));
    w.write(dir + "ranks.csv", eval::ranks_to_csv(tm.ranks));
    w.write(dir + "ranks.txt", header + "# tie_rule=" + eval::to_string(config.evaluation.tie_rule) + "\n" +
                                   eval::format_rank_table(tm.ranks));
    w.write(dir + "confusion.json", json({{"positive", positive_name(config, task)}, {"rows", confusion}}).dump(2) + "\n");
    w.write(dir + "stats.json", json({{"positive", positive_name(config, task)}, {"tests", tests}}).dump(2) + "\n");
    w.write(dir + "calibration.json", calibration.dump(1) + "\n");
    all.push_back(std::move(tm));
  }
  w.finish(log);
  return all;
}

std::map<Task, std::vector<eval::MetricRow>> cmd_stack(const RunConfig& config, Logger& log) {
  if (config.stacking.bases.empty()) throw ValidationError("stacking.bases must name at least one model");
  ArtifactWriter w(config.out, "stack", config);
  const int dim = config.stacking.mfcc != 0 ? config.stacking.mfcc : config.mfcc_dims.front();
  std::map<Task, std::vector<eval::MetricRow>> out;
  for (Task task : config.tasks) {
    const TaskData t = task_data(config, task, dim);
    std::vector<eval::BaseLearner> bases;
    for (const auto& name : config.stacking.bases) {
      const auto& entry = config.model(name);
      learners::PipelineSpec spec = entry.candidates().front();
      if (fs::exists(config.out / model_file(task, dim, name))) spec = load_model(config, task, dim, name).spec;
      bases.push_back(eval::pipeline_learner(name, spec, config.jobs));
    }
    eval::StackOptions opt;
    opt.K = config.stacking.folds;
    opt.meta = config.stacking.meta == "identity" ? eval::MetaKind::kIdentity : eval::MetaKind::kLogReg;
    opt.groups = &t.g_train;
    const auto model = eval::stack_fit(bases, t.X_train, t.y_train, opt, seed_for(config.seed, "stack|" + to_string(task)));

    std::vector<eval::MetricRow> rows;
    const Matrix P = model.base_probabilities(t.X_test);
    for (std::size_t b = 0; b < bases.size(); ++b) {
      const Vector p1 = P.col(static_cast<Eigen::Index>(b));
      Labels pred(static_cast<std::size_t>(p1.size()));
      for (Eigen::Index i = 0; i < p1.size(); ++i) pred[static_cast<std::size_t>(i)] = p1(i) > 0.5 ? 1 : 0;
      auto row = eval::confusion_and_rates(t.y_test, pred);
      row.model = bases[b].id;
      row.mfcc = dim;
      row.auc_roc = eval::roc_auc(t.y_test, std::span<const double>(p1.data(), static_cast<std::size_t>(p1.size())));
      row.it_ms = std::numeric_limits<double>::quiet_NaN();
      rows.push_back(row);
    }
    for (auto& r : eval::stacking_ablation(model, t.X_test, t.y_test, dim)) rows.push_back(r);
    for (const auto& r : rows) {
      log.event("ablation", {{"task", to_string(task)}, {"row", r.model}, {"accuracy", fmt(r.accuracy)}, {"auc", fmt(r.auc_roc)}});
    }

    const Vector stacked = model.predict_p1(t.X_test);
    const auto cal = eval::calibration_report(std::span<const double>(stacked.data(), static_cast<std::size_t>(stacked.size())),
                                              t.y_test, config.evaluation.calibration_bins);
    std::string oof = "row,group,label,fold";
    for (const auto& id : model.learner_ids) oof += "," + model_slug(id) + "_p0," + model_slug(id) + "_p1";
    oof += "\n";
    for (Eigen::Index r = 0; r < model.oof.rows.rows(); ++r) {
      const auto i = static_cast<std::size_t>(r);
      oof += std::to_string(t.rows.train[i]) + "," + t.g_train[i] + "," + std::to_string(t.y_train[i]) + "," +
             std::to_string(model.oof.fold_of[i]);
      for (Eigen::Index c = 0; c < model.oof.rows.cols(); ++c) oof += "," + fmt(model.oof.rows(r, c), 6);
      oof += "\n";
    }
    json meta = {{"meta", config.stacking.meta}, {"learners", model.learner_ids}, {"folds", opt.K}, {"mfcc", dim}};
    if (opt.meta == eval::MetaKind::kLogReg) {
      meta["weights"] = std::vector<double>(model.meta_model.weights.data(),
                                            model.meta_model.weights.data() + model.meta_model.weights.size());
      meta["intercept"] = model.meta_model.intercept;
      meta["l2_strength"] = model.meta_model.params.l2_strength;
    }
    const std::string dir = "stacking/" + to_string(task) + "/";
    w.write(dir + "ablation.csv", eval::metrics_to_csv(rows));
    w.write(dir + "ablation.txt", report_header(config, task) + eval::format_metric_table(rows));
    w.write(dir + "oof.csv", oof);
    w.write(dir + "meta.json", meta.dump(2) + "\n");
    w.write(dir + "calibration.json", eval::to_json(cal).dump(2) + "\n");
    out[task] = rows;
  }
  w.finish(log);
  return out;
}

json cmd_bench(const RunConfig& config, Logger& log) {
  ArtifactWriter w(config.out, "bench", config);
  json report = {{"cpu_model", eval::cpu_model_name()}, {"cores", std::thread::hardware_concurrency()},
                 {"timer_resolution_ms", eval::timer_resolution_ms()}, {"warmup", config.evaluation.timing_warmup},
                 {"repeats", config.evaluation.timing_repeats}, {"models", json::array()}};
  std::string text = "# cpu=" + report["cpu_model"].get<std::string>() + " cores=" + std::to_string(report["cores"].get<unsigned>()) + "\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-6s %5s %-16s %12s %12s %12s %12s\n", "task", "mfcc", "model", "median_ms", "min_ms", "max_ms", "iqr_ms");
  text += buf;
  for (Task task : config.tasks) {
    for (int dim : config.mfcc_dims) {
      const TaskData t = task_data(config, task, dim);
      for (const auto& entry : config.models) {
        const auto model = load_model(config, task, dim, entry.name);
        const auto r = eval::measure_inference_time([&](const Matrix& X) { (void)model.predict_proba(X); }, t.X_test,
                                                    config.evaluation.timing_warmup, config.evaluation.timing_repeats);
        json j = eval::to_json(r);
        j["task"] = to_string(task);
        j["mfcc"] = dim;
        j["model"] = entry.name;
        report["models"].push_back(j);
        std::snprintf(buf, sizeof buf, "%-6s %5d %-16s %12.6f %12.6f %12.6f %12.6f%s\n", to_string(task).c_str(), dim,
                      entry.name.c_str(), r.median_ms, r.min_ms, r.max_ms, r.iqr_ms, r.coarse_timer ? " coarse" : "");
        text += buf;
        log.event("bench", {{"task", to_string(task)}, {"mfcc", std::to_string(dim)}, {"model", entry.name},
                            {"median_ms", fmt(r.median_ms, 6)}, {"coarse_timer", r.coarse_timer ? "true" : "false"}});
      }
    }
  }
  w.write("bench/timing.json", report.dump(2) + "\n");
  w.write("bench/timing.txt", text);
  w.finish(log);
  return report;
}

std::vector<TaskMetrics> cmd_pipeline(const RunConfig& config, Logger& log) {
  if (config.synthetic) cmd_synth(config, log);
  cmd_features(config, log);
  cmd_train(config, log);
  return cmd_evaluate(config, log);
}

std::vector<eval::MetricRow> select_rows(const std::vector<eval::MetricRow>& rows, const std::string& selection_csv) {
  const auto lines = nonblank_lines(selection_csv);
  if (lines.empty() || lines.front() != "model,mfcc") throw DataError("selection CSV needs the header model,mfcc");
  if (lines.size() < 2) throw DataError("selection CSV selects no rows");
  std::vector<eval::MetricRow> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 2) throw DataError("selection line " + std::to_string(i + 1) + " needs 2 fields");
    int dim = 0;
    try {
      dim = std::stoi(f[1]);
    } catch (const std::exception&) {
      throw DataError("selection line " + std::to_string(i + 1) + " has a non-numeric mfcc");
    }
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) { return r.model == f[0] && r.mfcc == dim; });
    if (it == rows.end()) throw DataError("selection names " + f[0] + " @ " + f[1] + " which is not in the metrics");
    out.push_back(*it);
  }
  return out;
}

ReproduceResult reproduce_ranks(const fs::path& fixtures, eval::TieRule rule) {
  ReproduceResult res;
  for (const auto& name : kRankTables) {
    const auto read = [&](const std::string& suffix) {
      const fs::path p = fixtures / (name + suffix);
      if (!fs::exists(p)) throw DataError("missing fixture " + p.string());
      return read_text(p);
    };
    const auto metrics = eval::metrics_from_csv(read("_metrics.csv"));
    if (metrics.empty()) throw DataError("fixture " + name + "_metrics.csv has no rows");
    const auto selected = select_rows(metrics, read("_selection.csv"));
    const auto expected = eval::ranks_from_csv(read("_ranks.csv"));
    const auto computed = eval::rank_summary(selected, rule);
    res.tables.push_back(name);
    res.computed[name] = computed;
    if (expected.size() != computed.size()) {
      res.mismatches.push_back(name + ": expected " + std::to_string(expected.size()) + " rows, computed " +
                               std::to_string(computed.size()));
      continue;
    }
    for (const auto& e : expected) {
      const auto it = std::find_if(computed.begin(), computed.end(),
                                   [&](const auto& c) { return c.model == e.model && c.mfcc == e.mfcc; });
      if (it == computed.end()) {
        res.mismatches.push_back(name + ": row " + e.model + " @ " + std::to_string(e.mfcc) + " missing");
        continue;
      }
      for (std::size_t k = 0; k < 6; ++k) {
        if (it->ranks[k] != e.ranks[k]) {
          res.mismatches.push_back(name + ": row " + e.model + " column " + eval::kRankColumns[k] + " expected " +
                                   fmt(e.ranks[k], 1) + " got " + fmt(it->ranks[k], 1));
        }
      }
      if (fmt(it->avg_rank, 2) != fmt(e.avg_rank, 2)) {
        res.mismatches.push_back(name + ": row " + e.model + " column AvgRank expected " + fmt(e.avg_rank, 2) + " got " +
                                 fmt(it->avg_rank, 2));
      }
    }
  }
  return res;
}

}  // namespace lobster::cli
