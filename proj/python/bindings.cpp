#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lobster/cli/commands.hpp"
#include "lobster/cli/config.hpp"
#include "lobster/common/error.hpp"
#include "lobster/dsp/filter.hpp"
#include "lobster/eval/calibration.hpp"
#include "lobster/eval/metrics.hpp"
#include "lobster/eval/ranking.hpp"
#include "lobster/eval/stats.hpp"
#include "lobster/features/mfcc.hpp"
#include "lobster/features/pca.hpp"
#include "lobster/ingest/dataset.hpp"
#include "lobster/ingest/synthetic.hpp"
#include "lobster/learners/model.hpp"

namespace py = pybind11;
using namespace lobster;
using nlohmann::json;

namespace {

json metric_json(const eval::MetricRow& r) {
  return {{"model", r.model},         {"mfcc", r.mfcc},     {"accuracy", r.accuracy}, {"precision", r.precision},
          {"recall", r.recall},       {"f1", r.f1},         {"auc_roc", r.auc_roc},   {"it_ms", r.it_ms},
          {"tp", r.confusion.tp},     {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn},
          {"precision_degenerate", r.precision_degenerate}, {"recall_degenerate", r.recall_degenerate}};
}

json rank_json(const eval::RankRow& r) {
  return {{"model", r.model}, {"mfcc", r.mfcc}, {"ranks", r.ranks}, {"avg_rank", r.avg_rank}};
}

features::MfccConfig mfcc_config(int n_mfcc, int n_fft, int hop, int n_mels, double fmin, double fmax, int sample_rate) {
  features::MfccConfig c;
  c.n_mfcc = n_mfcc;
  c.n_fft = n_fft;
  c.hop = hop;
  c.n_mels = n_mels;
  c.fmin = fmin;
  c.fmax = fmax;
  c.sample_rate = sample_rate;
  return c;
}

struct PyModel {
  learners::TrainedModel model;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of lobster_acoustics";

  auto base = py::register_exception<Error>(m, "LobsterError", PyExc_RuntimeError);
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  auto convergence = py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  (void)validation;
  (void)data;
  (void)convergence;

  m.def(
      "synthetic_dataset",
      [](const std::string& spec_json) {
        const auto spec = spec_json.empty() ? ingest::default_synthetic_spec()
                                            : ingest::synthetic_spec_from_json(json::parse(spec_json));
        const auto segs = ingest::generate_synthetic_dataset(spec);
        py::list out;
        for (const auto& s : segs) {
          py::dict d;
          d["samples"] = s.samples;
          d["sample_rate"] = s.sample_rate;
          d["individual_id"] = s.labels.individual_id;
          d["sex"] = to_string(s.labels.sex);
          d["age"] = to_string(s.labels.age);
          out.append(d);
        }
        return out;
      },
      py::arg("spec_json") = "", "Generate labelled synthetic one-second segments.");

  m.def(
      "bandpass",
      [](const std::vector<double>& x, int sample_rate, double low_hz, double high_hz, int order) {
        dsp::FilterDesign design;
        design.low_hz = low_hz;
        design.high_hz = high_hz;
        design.order = order;
        design.sample_rate = sample_rate;
        const auto f = dsp::design_filter(design);
        return dsp::apply_filter(f, x, sample_rate);
      },
      py::arg("x"), py::arg("sample_rate") = kDefaultSampleRate, py::arg("low_hz") = 50.0,
      py::arg("high_hz") = 8000.0, py::arg("order") = 4);

  m.def(
      "mfcc",
      [](const std::vector<double>& x, int n_mfcc, int n_fft, int hop, int n_mels, double fmin, double fmax,
         int sample_rate) { return features::mfcc(x, mfcc_config(n_mfcc, n_fft, hop, n_mels, fmin, fmax, sample_rate)).frames; },
      py::arg("x"), py::arg("n_mfcc") = 40, py::arg("n_fft") = 2048, py::arg("hop") = 512, py::arg("n_mels") = 128,
      py::arg("fmin") = 50.0, py::arg("fmax") = 8000.0, py::arg("sample_rate") = kDefaultSampleRate,
      "T x n_mfcc coefficient frames.");

  m.def(
      "pooled_mfcc",
      [](const std::vector<double>& x, int n_mfcc, int sample_rate) {
        features::MfccConfig c;
        c.n_mfcc = n_mfcc;
        c.sample_rate = sample_rate;
        return features::MfccExtractor(c).pooled(x);
      },
      py::arg("x"), py::arg("n_mfcc") = 40, py::arg("sample_rate") = kDefaultSampleRate);

  m.def(
      "pca",
      [](const Matrix& X, Eigen::Index k) {
        const auto model = features::pca_fit(X, k);
        return py::make_tuple(features::pca_transform(model, X), model.components, model.explained_variance_ratio, model.tev);
      },
      py::arg("X"), py::arg("k"), "Returns (projected, components, explained_variance_ratio, tev).");

  py::class_<PyModel>(m, "Model")
      .def("predict_proba", [](const PyModel& self, const Matrix& X) { return self.model.predict_proba(X); })
      .def("predict", [](const PyModel& self, const Matrix& X) { return self.model.predict(X); })
      .def_property_readonly("display_name", [](const PyModel& self) { return learners::display_name(self.model.spec); })
      .def("to_json", [](const PyModel& self) { return learners::to_json(self.model).dump(); });

  m.def(
      "fit_model",
      [](const std::string& family, const std::string& params_json, const Matrix& X, const Labels& y, std::uint64_t seed,
         int pca_components, bool standardize) {
        learners::PipelineSpec spec{learners::hyperparams_from_json(learners::parse_family(family), json::parse(params_json)),
                                    pca_components, standardize};
        return PyModel{learners::fit_model(spec, X, y, seed)};
      },
      py::arg("family"), py::arg("params_json"), py::arg("X"), py::arg("y"), py::arg("seed") = 0,
      py::arg("pca_components") = 0, py::arg("standardize") = true);

  m.def(
      "confusion_and_rates",
      [](const Labels& y_true, const Labels& y_pred, int positive) {
        return metric_json(eval::confusion_and_rates(y_true, y_pred, positive)).dump();
      },
      py::arg("y_true"), py::arg("y_pred"), py::arg("positive") = 1);
  m.def(
      "roc_auc", [](const Labels& y, const std::vector<double>& s, int positive) { return eval::roc_auc(y, s, positive); },
      py::arg("y_true"), py::arg("scores"), py::arg("positive") = 1);
  m.def("mcnemar", [](const Labels& a, const Labels& b, const Labels& y) { return eval::to_json(eval::mcnemar(a, b, y)).dump(); });
  m.def(
      "bootstrap_auc_diff",
      [](const std::vector<double>& a, const std::vector<double>& b, const Labels& y, int n_boot, std::uint64_t seed) {
        return eval::to_json(eval::bootstrap_auc_diff(a, b, y, n_boot, seed)).dump();
      },
      py::arg("scores_a"), py::arg("scores_b"), py::arg("y_true"), py::arg("n_boot") = 2000, py::arg("seed") = 0);
  m.def("benjamini_hochberg", &eval::benjamini_hochberg);
  m.def(
      "calibration",
      [](const std::vector<double>& p, const Labels& y, int bins) { return eval::to_json(eval::calibration_report(p, y, bins)).dump(); },
      py::arg("p"), py::arg("y_true"), py::arg("n_bins") = 10);

  m.def(
      "reproduce_ranks",
      [](const std::string& fixtures, const std::string& tie_rule) {
        const auto r = cli::reproduce_ranks(fixtures, eval::parse_tie_rule(tie_rule));
        json tables = json::object();
        for (const auto& [name, rows] : r.computed) {
          tables[name] = json::array();
          for (const auto& row : rows) tables[name].push_back(rank_json(row));
        }
        return json{{"tables", tables}, {"mismatches", r.mismatches}}.dump();
      },
      py::arg("fixtures"), py::arg("tie_rule") = "midrank_floor");

  m.def("default_config", [] { return cli::default_config_json().dump(); });
  m.def("validate_config", [](const std::string& cfg) { return cli::to_json(cli::parse_config(json::parse(cfg))).dump(); });
  m.def(
      "run_pipeline",
      [](const std::string& cfg) {
        const auto config = cli::parse_config(json::parse(cfg));
        cli::Logger log(false);
        json out = json::object();
        {
          py::gil_scoped_release release;
          const auto tasks = cli::cmd_pipeline(config, log);
          for (const auto& t : tasks) {
            json rows = json::array(), ranks = json::array();
            for (const auto& r : t.rows) rows.push_back(metric_json(r));
            for (const auto& r : t.ranks) ranks.push_back(rank_json(r));
            out[to_string(t.task)] = {{"metrics", rows}, {"ranks", ranks}};
          }
        }
        return out.dump();
      },
      py::arg("config_json"), "Runs synth/features/train/evaluate and returns metrics and ranks per task.");
}
