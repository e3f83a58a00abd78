// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <cmath>
#include <limits>
#include <string_view>
#include <vector>

#include "novelty/corpus.hpp"
#include "novelty/detectors/report.hpp"
#include "novelty/knn.hpp"

namespace novelty {

struct TfidfKnnConfig {
  bool operator==(const TfidfKnnConfig&) const = default;

  int k = 5;
  int window_days = 0;  // 0 keeps the full history
  double doc_threshold = 0.6;
  int max_flagged_words = 100;

  void validate() const {
    if (k < 1) throw ConfigError("tfidf_knn.k must be at least 1");
    if (window_days < 0) throw ConfigError("tfidf_knn.window_days must be non-negative");
    if (!(doc_threshold > 0.0)) throw ConfigError("tfidf_knn.doc_threshold must be positive");
    if (max_flagged_words < 0) throw ConfigError("tfidf_knn.M must be non-negative");
  }
};

/// idf(w) = ln((N + 1) / (df(w) + 1)).
inline double smoothed_idf(std::size_t n_docs, std::uint32_t df) {
  return std::log((static_cast<double>(n_docs) + 1.0) / (static_cast<double>(df) + 1.0));
}

/// First-story detection: a document's novelty is its cosine dissimilarity
/// (TF-IDF space) to its k-th nearest document from earlier days. Word flags
/// are today's terms ranked by IDF over the history.
class TfidfKnnDetector final : public Detector {
 public:
  TfidfKnnDetector(TfidfKnnConfig config, std::size_t vocab_size)
      : config_(config), df_(vocab_size, 0), idf_(vocab_size, 0.0) {
    config_.validate();
  }

  std::string_view name() const override { return "tfidf"; }

  /// Current IDF weights (statistics of all documents before today).
  const std::vector<double>& idf() const noexcept { return idf_; }
  std::size_t history_docs() const noexcept { return n_docs_; }

  /// Score a document against the history with the weights of the last
  /// prepared day. Exposed for oracle tests.
  KnnScore doc_score(const SparseCounts& doc) { return knn_.score(doc, static_cast<std::size_t>(config_.k)); }

  /// Recomputes IDF from the history and primes the kNN index for `day`.
  void prepare_day(int day) {
    for (std::size_t t = 0; t < idf_.size(); ++t) idf_[t] = smoothed_idf(n_docs_, df_[t]);
    if (config_.window_days > 0) knn_.set_min_day(day - config_.window_days);
    knn_.prepare(idf_);
  }

 protected:
  DayReport observe_day(const DayBatch& batch) override {
    DayReport report;
    prepare_day(batch.day);
    const bool warm = n_docs_ > 0;

    std::vector<SparseCounts> counts;
    counts.reserve(batch.documents.size());
    std::vector<char> seen(idf_.size(), 0);
    std::vector<ScoredTerm> today_terms;
    std::vector<ScoredDoc> flagged;
    for (const auto& doc : batch.documents) {
      counts.push_back(count_terms(doc.tokens));
      for (const auto& [t, c] : counts.back()) {
        if (!seen[t]) {
          seen[t] = 1;
          today_terms.push_back({t, idf_[t]});
        }
      }
      const auto s = knn_.score(counts.back(), static_cast<std::size_t>(config_.k));
      report.doc_scores.push_back({doc.id, s.dissimilarity});
      if (warm && !s.degenerate && s.dissimilarity >= config_.doc_threshold) flagged.push_back({doc.id, s.dissimilarity});
    }
    std::sort(today_terms.begin(), today_terms.end(), [](const auto& a, const auto& b) { return a.term < b.term; });
    report.word_scores = today_terms;
    if (warm) report.flagged_words = rank_terms(std::move(today_terms), static_cast<std::size_t>(config_.max_flagged_words));
    report.flagged_docs = rank_docs(std::move(flagged));

    for (auto& c : counts) {
      for (const auto& [t, n] : c) ++df_[t];
      knn_.add(std::move(c), batch.day);
      ++n_docs_;
    }
    return report;
  }

 private:
  TfidfKnnConfig config_;
  std::vector<std::uint32_t> df_;
  std::vector<double> idf_;
  std::size_t n_docs_ = 0;
  WeightedCosineKnn knn_;
};

}  // namespace novelty
