// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "novelty/corpus.hpp"
#include "novelty/error.hpp"

namespace novelty {

struct ScoredTerm {
  TermId term;
  double score;
};

struct ScoredDoc {
  std::string doc_id;
  double score;
};

struct Alert {
  int day = 0;
  std::vector<TermId> trigger_terms;  // sorted ascending
  double strength = 0.0;
};

/// One detector's output for one day.
struct DayReport {
  int day = 0;
  std::vector<ScoredTerm> word_scores;  // terms scored today, ascending term id
  std::vector<TermId> flagged_words;    // score-descending, ties by ascending id
  std::vector<ScoredDoc> doc_scores;    // today's documents, batch order
  std::vector<std::string> flagged_docs;
  std::vector<Alert> alerts;
};

/// Ranks by descending score with ascending-id tie-break and keeps at most
/// `limit` entries.
inline std::vector<TermId> rank_terms(std::vector<ScoredTerm> scored, std::size_t limit) {
  std::sort(scored.begin(), scored.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
    return a.score > b.score || (a.score == b.score && a.term < b.term);
  });
  if (scored.size() > limit) scored.resize(limit);
  std::vector<TermId> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.term);
  return out;
}

inline std::vector<std::string> rank_docs(std::vector<ScoredDoc> scored) {
  std::sort(scored.begin(), scored.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    return a.score > b.score || (a.score == b.score && a.doc_id < b.doc_id);
  });
  std::vector<std::string> out;
  out.reserve(scored.size());
  for (auto& s : scored) out.push_back(std::move(s.doc_id));
  return out;
}

/// Per-day observation contract shared by all detectors. Implementations are
/// single-writer state machines; reports are plain values.
class Detector {
 public:
  virtual ~Detector() = default;

  virtual std::string_view name() const = 0;

  DayReport observe(const DayBatch& batch) {
    if (has_day_ && batch.day <= last_day_) {
      throw ProtocolError("batch for day " + std::to_string(batch.day) + " arrived after day " +
                          std::to_string(last_day_));
    }
    for (const auto& d : batch.documents) {
      if (d.day != batch.day) throw ProtocolError("document " + d.id + " does not belong to day " + std::to_string(batch.day));
    }
    DayReport r = observe_day(batch);
    r.day = batch.day;
    for (auto& a : r.alerts) a.day = batch.day;
    has_day_ = true;
    last_day_ = batch.day;
    ++days_seen_;
    return r;
  }

  int days_seen() const noexcept { return days_seen_; }

 protected:
  virtual DayReport observe_day(const DayBatch& batch) = 0;

 private:
  bool has_day_ = false;
  int last_day_ = 0;
  int days_seen_ = 0;
};

namespace detail {
inline double finite_or_zero(double x) { return std::isfinite(x) ? x : 0.0; }
}  // namespace detail

}  // namespace novelty
