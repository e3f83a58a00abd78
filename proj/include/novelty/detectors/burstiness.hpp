// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "novelty/corpus.hpp"
#include "novelty/detectors/report.hpp"

namespace novelty {

enum class Aggregation { mean, median, p90 };

inline Aggregation parse_aggregation(const std::string& s) {
  if (s == "mean") return Aggregation::mean;
  if (s == "median") return Aggregation::median;
  if (s == "p90") return Aggregation::p90;
  throw ConfigError("unknown aggregation '" + s + "' (expected mean, median or p90)");
}

inline const char* to_string(Aggregation a) {
  switch (a) {
    case Aggregation::mean: return "mean";
    case Aggregation::median: return "median";
    case Aggregation::p90: return "p90";
  }
  return "?";
}

struct BurstinessConfig {
  bool operator==(const BurstinessConfig&) const = default;

  Aggregation aggregation = Aggregation::p90;
  double z_threshold = 3.0;
  double doc_threshold = 3.0;
  int max_flagged_words = 100;

  void validate() const {
    if (!(z_threshold > 0.0)) throw ConfigError("burstiness.z_threshold must be positive");
    if (!(doc_threshold > 0.0)) throw ConfigError("burstiness.doc_threshold must be positive");
    if (max_flagged_words < 0) throw ConfigError("burstiness.M must be non-negative");
  }
};

/// Binomial z-score of today's relative frequency against the smoothed
/// historic rate p_hist = (tf_hist + 1) / (N_hist + |V|).
inline double burstiness_score(double p_hist, double tf_today, double n_today) {
  const double observed = tf_today / n_today;
  return (observed - p_hist) / std::sqrt(p_hist * (1.0 - p_hist) / n_today);
}

inline double smoothed_historic_rate(double tf_hist, double n_hist, std::size_t vocab_size) {
  return (tf_hist + 1.0) / (n_hist + static_cast<double>(vocab_size));
}

/// Linear-interpolation quantile of an unsorted sample (q in [0, 1]).
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

inline double aggregate(std::span<const double> values, Aggregation how) {
  if (values.empty()) return 0.0;
  switch (how) {
    case Aggregation::mean: {
      double s = 0.0;
      for (double v : values) s += v;
      return s / static_cast<double>(values.size());
    }
    case Aggregation::median: return quantile({values.begin(), values.end()}, 0.5);
    case Aggregation::p90: return quantile({values.begin(), values.end()}, 0.9);
  }
  return 0.0;
}

/// Aggregates the z-scores of a document's tokens (as a multiset).
inline double burstiness_doc_score(std::span<const TermId> tokens, std::span<const double> term_z, Aggregation how) {
  std::vector<double> zs;
  zs.reserve(tokens.size());
  for (TermId t : tokens) zs.push_back(term_z[t]);
  return aggregate(zs, how);
}

/// Burstiness Score detector: per-term z-scores of today's frequency against
/// all previous days; documents score by aggregating their tokens' z.
class BurstinessDetector final : public Detector {
 public:
  BurstinessDetector(BurstinessConfig config, std::size_t vocab_size)
      : config_(config), tf_hist_(vocab_size, 0.0), z_(vocab_size, 0.0) {
    config_.validate();
  }

  std::string_view name() const override { return "bs"; }

 protected:
  DayReport observe_day(const DayBatch& batch) override {
    DayReport report;
    std::vector<std::uint32_t> tf(tf_hist_.size(), 0);
    std::vector<TermId> present;
    double n_today = 0.0;
    for (const auto& doc : batch.documents) {
      for (TermId t : doc.tokens) {
        if (tf[t]++ == 0) present.push_back(t);
      }
      n_today += static_cast<double>(doc.tokens.size());
    }
    std::sort(present.begin(), present.end());

    if (n_today > 0.0) {
      const bool warm = n_hist_ > 0.0;
      std::vector<ScoredTerm> above;
      for (TermId t : present) {
        const double p = smoothed_historic_rate(tf_hist_[t], n_hist_, tf_hist_.size());
        z_[t] = burstiness_score(p, tf[t], n_today);
        report.word_scores.push_back({t, z_[t]});
        if (warm && z_[t] > config_.z_threshold) above.push_back({t, z_[t]});
      }
      report.flagged_words = rank_terms(std::move(above), static_cast<std::size_t>(config_.max_flagged_words));

      std::vector<ScoredDoc> flagged;
      for (const auto& doc : batch.documents) {
        const double s = burstiness_doc_score(doc.tokens, z_, config_.aggregation);
        report.doc_scores.push_back({doc.id, s});
        if (warm && s > config_.doc_threshold) flagged.push_back({doc.id, s});
      }
      report.flagged_docs = rank_docs(std::move(flagged));
    }

    for (TermId t : present) tf_hist_[t] += tf[t];
    n_hist_ += n_today;
    return report;
  }

 private:
  BurstinessConfig config_;
  std::vector<double> tf_hist_;
  double n_hist_ = 0.0;
  std::vector<double> z_;
};

}  // namespace novelty
