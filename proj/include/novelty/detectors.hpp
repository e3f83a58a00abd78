// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "novelty/detectors/burstiness.hpp"
#include "novelty/detectors/doc_frequency.hpp"
#include "novelty/detectors/olda.hpp"
#include "novelty/detectors/report.hpp"
#include "novelty/detectors/tfidf_knn.hpp"
#include "novelty/detectors/topic_sketch.hpp"

namespace novelty {

struct DetectorSuiteConfig {
  bool operator==(const DetectorSuiteConfig&) const = default;

  TfidfKnnConfig tfidf;
  BurstinessConfig bs;
  DocFrequencyConfig df;
  OldaConfig olda;
  TopicSketchConfig topicsketch;
};

inline const std::vector<std::string>& detector_names() {
  static const std::vector<std::string> names{"tfidf", "bs", "df", "olda", "topicsketch"};
  return names;
}

/// Display names in the order used for result tables.
inline std::string display_name(const std::string& name) {
  if (name == "tfidf") return "TF-IDF";
  if (name == "bs") return "BS";
  if (name == "df") return "DF";
  if (name == "olda") return "OLDA";
  if (name == "topicsketch") return "TopicSketch";
  return name;
}

inline std::unique_ptr<Detector> make_detector(const std::string& name, const DetectorSuiteConfig& config,
                                               std::size_t vocab_size) {
  if (name == "tfidf") return std::make_unique<TfidfKnnDetector>(config.tfidf, vocab_size);
  if (name == "bs") return std::make_unique<BurstinessDetector>(config.bs, vocab_size);
  if (name == "df") return std::make_unique<DocFrequencyDetector>(config.df, vocab_size);
  if (name == "olda") return std::make_unique<OldaDetector>(config.olda, vocab_size);
  if (name == "topicsketch") return std::make_unique<TopicSketchDetector>(config.topicsketch, vocab_size);
  throw ConfigError("unknown detector '" + name + "'");
}

/// Streams every day of the corpus (empty days included) through a fresh
/// detector and collects its reports.
inline std::vector<DayReport> run_detector(Detector& detector, const LabeledCorpus& corpus) {
  std::vector<DayBatch> empties;
  std::vector<DayReport> reports;
  for (const DayBatch* batch : contiguous_days(corpus, empties)) reports.push_back(detector.observe(*batch));
  return reports;
}

}  // namespace novelty
