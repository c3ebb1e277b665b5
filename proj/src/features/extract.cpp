#include "lobster/features/extract.hpp"

#include "lobster/common/error.hpp"
#include "lobster/common/parallel.hpp"

namespace lobster::features {

FeatureMatrix SegmentFeatures::for_task(Task task) const {
  FeatureMatrix fm;
  fm.rows = rows;
  fm.feature_names = default_feature_names(rows.cols());
  for (const auto& l : labels) {
    fm.labels.push_back(task_label(task, l.sex, l.age));
    fm.groups.push_back(l.individual_id);
  }
  return fm;
}

ExtractionReport extract_features(const std::vector<ingest::AudioSegment>& segments,
                                  const dsp::PreprocessConfig& filters,
                                  const dsp::SnrPolicy& snr, const MfccConfig& base,
                                  const std::vector<int>& mfcc_dims, int jobs) {
  if (segments.empty()) throw DataError("no segments to extract features from");
  if (mfcc_dims.empty()) throw ValidationError("no MFCC dimensions requested");
  const int rate = segments.front().sample_rate;
  const auto chain = dsp::make_preprocess_filters(filters, rate);

  std::vector<std::vector<double>> filtered(segments.size());
  parallel_for(segments.size(), jobs, [&](std::size_t i) {
    filtered[i] = chain.apply(segments[i].samples, segments[i].sample_rate);
  });

  const auto screen = dsp::snr_screen(filtered, snr);
  ExtractionReport report;
  report.n_input = segments.size();
  report.n_discarded = screen.discarded.size();
  report.floor_db = screen.floor_db;
  if (screen.kept.empty()) throw DataError("SNR screening discarded every segment");

  for (int dim : mfcc_dims) {
    MfccConfig config = base;
    config.n_mfcc = dim;
    config.sample_rate = rate;
    const MfccExtractor extractor(config);

    SegmentFeatures sf;
    sf.rows.resize(static_cast<Eigen::Index>(screen.kept.size()), dim);
    sf.labels.resize(screen.kept.size());
    sf.source_index = screen.kept;
    parallel_for(screen.kept.size(), jobs, [&](std::size_t r) {
      const std::size_t i = screen.kept[r];
      sf.rows.row(static_cast<Eigen::Index>(r)) = extractor.pooled(filtered[i]).transpose();
      sf.labels[r] = segments[i].labels;
    });
    report.by_dim.emplace(dim, std::move(sf));
  }
  return report;
}

}  // namespace lobster::features
