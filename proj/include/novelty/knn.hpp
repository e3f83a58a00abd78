// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "novelty/corpus.hpp"

namespace novelty {

/// Cosine similarity from its parts; a zero-norm side yields 0.
inline double cosine_from_parts(double dot, double norm_a, double norm_b) {
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return dot / (norm_a * norm_b);
}

/// Norm of the weighted vector (tf * weight), summed in ascending term order.
inline double weighted_norm(const SparseCounts& doc, std::span<const double> weights) {
  double sq = 0.0;
  for (const auto& [term, tf] : doc) {
    const double x = static_cast<double>(tf) * weights[term];
    sq += x * x;
  }
  return std::sqrt(sq);
}

struct KnnScore {
  double dissimilarity = 1.0;  // 1 - cos to the k-th nearest neighbour
  bool degenerate = false;     // query vector was all zeros
};

/// Exact k-nearest-neighbour search over a growing history of bag-of-words
/// documents under cosine similarity of per-term weighted counts. Weights
/// are supplied per query day, so history vectors are re-weighted with the
/// current statistics (TF-IDF or DF ratios) rather than frozen at insertion.
///
/// Dot products accumulate through an inverted index in ascending term order,
/// which yields bit-identical results to a dense pairwise computation.
class WeightedCosineKnn {
 public:
  void add(SparseCounts doc, int day) {
    const auto idx = static_cast<std::uint32_t>(docs_.size());
    for (const auto& [term, tf] : doc) {
      if (term >= postings_.size()) postings_.resize(term + 1);
      postings_[term].push_back(Posting{idx, tf});
    }
    docs_.push_back(std::move(doc));
    days_.push_back(day);
  }

  std::size_t size() const noexcept { return docs_.size(); }

  /// Restricts neighbours to documents with day >= min_day.
  void set_min_day(int min_day) {
    first_active_ = static_cast<std::size_t>(
        std::lower_bound(days_.begin(), days_.end(), min_day) - days_.begin());
  }

  std::size_t active_size() const noexcept { return docs_.size() - first_active_; }

  /// Recomputes history norms under `weights`. Must be called before score()
  /// whenever the weights change.
  void prepare(std::span<const double> weights) {
    weights_.assign(weights.begin(), weights.end());
    norms_.resize(docs_.size());
    for (std::size_t i = first_active_; i < docs_.size(); ++i) norms_[i] = weighted_norm(docs_[i], weights_);
    acc_.assign(docs_.size(), 0.0);
  }

  /// Cosine similarities of `query` to every active history document,
  /// in history order.
  std::vector<double> similarities(const SparseCounts& query) {
    std::vector<double> out(active_size(), 0.0);
    const double qn = weighted_norm(query, weights_);
    touched_.clear();
    accumulate(query);
    for (auto i : touched_) {
      out[i - first_active_] = cosine_from_parts(acc_[i], qn, norms_[i]);
      acc_[i] = 0.0;
    }
    return out;
  }

  /// Dissimilarity to the k-th most similar history document. With fewer than
  /// k documents the farthest one is used; with none the score is 1.
  KnnScore score(const SparseCounts& query, std::size_t k) {
    KnnScore result;
    const double qn = weighted_norm(query, weights_);
    if (qn == 0.0) {
      result.dissimilarity = 0.0;
      result.degenerate = true;
      return result;
    }
    const std::size_t n = active_size();
    if (n == 0) return result;

    touched_.clear();
    accumulate(query);
    sims_.clear();
    for (auto i : touched_) {
      sims_.push_back(cosine_from_parts(acc_[i], qn, norms_[i]));
      acc_[i] = 0.0;
    }

    double kth = 0.0;
    if (n < k) {
      // farthest available neighbour
      kth = sims_.size() < n ? 0.0 : *std::min_element(sims_.begin(), sims_.end());
    } else if (sims_.size() >= k) {
      auto nth = sims_.begin() + static_cast<std::ptrdiff_t>(k - 1);
      std::nth_element(sims_.begin(), nth, sims_.end(), std::greater<>());
      kth = *nth;
    }
    result.dissimilarity = std::max(0.0, 1.0 - kth);
    return result;
  }

 private:
  struct Posting {
    std::uint32_t doc;
    std::uint32_t tf;
  };

  void accumulate(const SparseCounts& query) {
    for (const auto& [term, tf] : query) {
      if (term >= postings_.size()) continue;
      const double w = weights_[term];
      if (w == 0.0) continue;
      const double qx = static_cast<double>(tf) * w;
      const auto& plist = postings_[term];
      auto it = std::lower_bound(plist.begin(), plist.end(), first_active_,
                                 [](const Posting& p, std::size_t v) { return p.doc < v; });
      for (; it != plist.end(); ++it) {
        double& a = acc_[it->doc];
        if (a == 0.0) touched_.push_back(it->doc);
        a += qx * (static_cast<double>(it->tf) * w);
      }
    }
  }

  std::vector<SparseCounts> docs_;
  std::vector<int> days_;
  std::vector<std::vector<Posting>> postings_;
  std::size_t first_active_ = 0;
  std::vector<double> weights_;
  std::vector<double> norms_;
  std::vector<double> acc_;
  std::vector<std::uint32_t> touched_;
  std::vector<double> sims_;
};

}  // namespace novelty
