// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string_view>
#include <vector>

#include "novelty/corpus.hpp"
#include "novelty/detectors/report.hpp"
#include "novelty/knn.hpp"

namespace novelty {

struct DocFrequencyConfig {
  bool operator==(const DocFrequencyConfig&) const = default;

  double ratio_threshold = 3.0;    // rho
  double jaccard_threshold = 0.5;  // tau_J, on Jaccard distance
  int k = 5;
  double doc_threshold = 0.9;
  int min_cluster_size = 2;
  int max_flagged_words = 100;

  void validate() const {
    if (!(ratio_threshold > 0.0)) throw ConfigError("df.ratio_threshold must be positive");
    if (!(jaccard_threshold > 0.0)) throw ConfigError("df.jaccard_threshold must be positive");
    if (k < 1) throw ConfigError("df.k must be at least 1");
    if (!(doc_threshold > 0.0)) throw ConfigError("df.doc_threshold must be positive");
    if (min_cluster_size < 1) throw ConfigError("df.min_cluster_size must be at least 1");
    if (max_flagged_words < 0) throw ConfigError("df.M must be non-negative");
  }
};

/// (df_t / N_t) / ((df_hist + 1) / (N_hist + 1)).
inline double df_ratio(double df_today, double n_today, double df_hist, double n_hist) {
  return (df_today / n_today) / ((df_hist + 1.0) / (n_hist + 1.0));
}

/// 1 - |a ∩ b| / |a ∪ b| over sorted id sets.
template <typename T>
double jaccard_distance(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

/// Single-link clustering: terms u, v are linked when the Jaccard distance of
/// their document sets is <= threshold. Returns a partition of `terms`; each
/// cluster is sorted, clusters ordered by their smallest term.
inline std::vector<std::vector<TermId>> jaccard_cluster(const std::vector<TermId>& terms,
                                                        const std::vector<std::vector<std::uint32_t>>& doc_sets,
                                                        double threshold) {
  const std::size_t n = terms.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (find(i) == find(j)) continue;
      if (jaccard_distance(doc_sets[i], doc_sets[j]) <= threshold) parent[find(i)] = find(j);
    }
  }
  std::map<std::size_t, std::vector<TermId>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(terms[i]);
  std::vector<std::vector<TermId>> out;
  for (auto& [root, g] : groups) {
    std::sort(g.begin(), g.end());
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

/// Document-frequency detector: terms whose document frequency today jumps
/// against the history are grouped into "new word" clusters by co-occurrence;
/// documents score by kNN dissimilarity in a space weighted by
/// ln(1 + df_t / (df_hist + 1)).
class DocFrequencyDetector final : public Detector {
 public:
  DocFrequencyDetector(DocFrequencyConfig config, std::size_t vocab_size)
      : config_(config), df_hist_(vocab_size, 0), weights_(vocab_size, 0.0) {
    config_.validate();
  }

  std::string_view name() const override { return "df"; }

  const std::vector<std::vector<TermId>>& last_clusters() const noexcept { return clusters_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

 protected:
  DayReport observe_day(const DayBatch& batch) override {
    DayReport report;
    clusters_.clear();
    const double n_today = static_cast<double>(batch.documents.size());
    if (batch.documents.empty()) return report;
    const bool warm = n_hist_ > 0;

    std::vector<SparseCounts> counts;
    counts.reserve(batch.documents.size());
    std::vector<std::uint32_t> df_today(df_hist_.size(), 0);
    std::vector<TermId> present;
    for (const auto& doc : batch.documents) {
      counts.push_back(count_terms(doc.tokens));
      for (const auto& [t, c] : counts.back()) {
        if (df_today[t]++ == 0) present.push_back(t);
      }
    }
    std::sort(present.begin(), present.end());

    std::vector<TermId> bursting;
    std::vector<double> ratio(df_hist_.size(), 0.0);
    for (TermId t : present) {
      ratio[t] = df_ratio(df_today[t], n_today, df_hist_[t], static_cast<double>(n_hist_));
      report.word_scores.push_back({t, ratio[t]});
      if (warm && ratio[t] > config_.ratio_threshold) bursting.push_back(t);
    }

    if (!bursting.empty()) {
      std::vector<std::int32_t> slot(df_hist_.size(), -1);
      for (std::size_t i = 0; i < bursting.size(); ++i) slot[bursting[i]] = static_cast<std::int32_t>(i);
      std::vector<std::vector<std::uint32_t>> doc_sets(bursting.size());
      for (std::size_t d = 0; d < counts.size(); ++d) {
        for (const auto& [t, c] : counts[d]) {
          if (slot[t] >= 0) doc_sets[static_cast<std::size_t>(slot[t])].push_back(static_cast<std::uint32_t>(d));
        }
      }
      clusters_ = jaccard_cluster(bursting, doc_sets, config_.jaccard_threshold);
      std::vector<ScoredTerm> clustered;
      for (const auto& c : clusters_) {
        if (static_cast<int>(c.size()) < config_.min_cluster_size) continue;
        for (TermId t : c) clustered.push_back({t, ratio[t]});
      }
      report.flagged_words = rank_terms(std::move(clustered), static_cast<std::size_t>(config_.max_flagged_words));
    }

    std::fill(weights_.begin(), weights_.end(), 0.0);
    for (TermId t : present) {
      weights_[t] = std::log(1.0 + static_cast<double>(df_today[t]) / (static_cast<double>(df_hist_[t]) + 1.0));
    }
    knn_.prepare(weights_);
    std::vector<ScoredDoc> flagged;
    for (std::size_t d = 0; d < counts.size(); ++d) {
      const auto s = knn_.score(counts[d], static_cast<std::size_t>(config_.k));
      report.doc_scores.push_back({batch.documents[d].id, s.dissimilarity});
      if (warm && !s.degenerate && s.dissimilarity >= config_.doc_threshold) {
        flagged.push_back({batch.documents[d].id, s.dissimilarity});
      }
    }
    report.flagged_docs = rank_docs(std::move(flagged));

    for (TermId t : present) df_hist_[t] += df_today[t];
    n_hist_ += batch.documents.size();
    for (auto& c : counts) knn_.add(std::move(c), batch.day);
    return report;
  }

 private:
  DocFrequencyConfig config_;
  std::vector<std::uint32_t> df_hist_;
  std::size_t n_hist_ = 0;
  std::vector<double> weights_;
  WeightedCosineKnn knn_;
  std::vector<std::vector<TermId>> clusters_;
};

}  // namespace novelty
