#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "lobster/dsp/filter.hpp"
#include "lobster/dsp/snr.hpp"
#include "lobster/features/feature_matrix.hpp"
#include "lobster/features/mfcc.hpp"
#include "lobster/ingest/dataset.hpp"

namespace lobster::features {

/// Time-pooled MFCCs for every screened segment, keeping both label axes so
/// either binary task can be projected out later.
struct SegmentFeatures {
  Matrix rows;
  std::vector<ingest::IndividualLabels> labels;
  std::vector<std::size_t> source_index;

  FeatureMatrix for_task(Task task) const;
};

struct ExtractionReport {
  /// Keyed by n_mfcc.
  std::map<int, SegmentFeatures> by_dim;
  std::size_t n_input = 0;
  std::size_t n_discarded = 0;
  double floor_db = 0.0;
};

/// Filter -> SNR screen -> MFCC -> mean pool for each requested n_mfcc.
/// `base` supplies every MFCC setting except n_mfcc.
ExtractionReport extract_features(const std::vector<ingest::AudioSegment>& segments,
                                  const dsp::PreprocessConfig& filters,
                                  const dsp::SnrPolicy& snr, const MfccConfig& base,
                                  const std::vector<int>& mfcc_dims, int jobs = 1);

}  // namespace lobster::features
