// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "novelty/corpus.hpp"
#include "novelty/detectors/report.hpp"

namespace novelty {

struct Prf {
  double precision = 1.0;
  std::optional<double> recall;  // absent when the truth set is empty
  std::optional<double> f;
};

inline double f_measure(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

/// Precision/recall/F from raw counts. Empty predictions give precision 1.
inline Prf prf_counts(std::size_t tp, std::size_t n_pred, std::size_t n_truth) {
  Prf out;
  out.precision = n_pred == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(n_pred);
  if (n_truth > 0) {
    out.recall = static_cast<double>(tp) / static_cast<double>(n_truth);
    out.f = f_measure(out.precision, *out.recall);
  }
  return out;
}

template <typename T>
Prf prf(const std::set<T>& predicted, const std::set<T>& truth) {
  std::size_t tp = 0;
  for (const auto& p : predicted) tp += truth.count(p);
  return prf_counts(tp, predicted.size(), truth.size());
}

struct DelayResult {
  std::optional<int> delay;
  int false_alerts = 0;
};

/// Delay of the first alert on or after onset; earlier alerts are false.
inline DelayResult detection_delay(std::span<const Alert> alerts, int onset_day) {
  DelayResult r;
  std::optional<int> first;
  for (const auto& a : alerts) {
    if (a.day < onset_day) {
      ++r.false_alerts;
    } else if (!first || a.day < *first) {
      first = a.day;
    }
  }
  if (first) r.delay = *first - onset_day;
  return r;
}

/// Mann-Whitney AUC with midranks: probability that a random positive
/// outscores a random negative, ties counting one half.
inline double auc(std::span<const std::pair<double, bool>> scored) {
  std::size_t n_pos = 0;
  for (const auto& s : scored) n_pos += s.second ? 1 : 0;
  const std::size_t n_neg = scored.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("AUC needs both novel and normal documents");

  std::vector<std::pair<double, bool>> sorted(scored.begin(), scored.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (sorted[k].second) rank_sum += midrank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

inline double auc(const std::unordered_map<std::string, double>& scores, const std::unordered_set<std::string>& novel) {
  std::vector<std::pair<double, bool>> v;
  v.reserve(scores.size());
  for (const auto& [id, s] : scores) v.emplace_back(s, novel.count(id) > 0);
  return auc(v);
}

struct EvalOptions {
  bool operator==(const EvalOptions&) const = default;

  bool post_onset_only = true;    // aggregation window
  bool vacuous_precision = true;  // false: days without predictions are skipped in macro precision
};

struct CurveRow {
  int day = 0;
  Prf words;
  Prf docs;
  std::size_t novel_docs = 0;
  double novel_count_normalized = 0.0;
};

struct AggregatePrf {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

struct EvalReport {
  std::vector<CurveRow> per_day;
  AggregatePrf words_micro;
  AggregatePrf docs_micro;
  AggregatePrf words_macro;
  AggregatePrf docs_macro;
  std::optional<int> alert_delay_days;
  int false_alerts = 0;
  std::optional<double> auc;
};

/// Day of each document id; flagged documents are scored on their own day.
using DocDays = std::unordered_map<std::string, int>;

inline DocDays doc_days(const LabeledCorpus& corpus) {
  DocDays out;
  for (const auto& b : corpus.batches) {
    for (const auto& d : b.documents) out.emplace(d.id, d.day);
  }
  return out;
}

namespace detail {

struct Confusion {
  std::size_t tp = 0;
  std::size_t pred = 0;
  std::size_t truth = 0;
  void add(std::size_t t, std::size_t p, std::size_t n) {
    tp += t;
    pred += p;
    truth += n;
  }
  AggregatePrf result() const {
    const auto r = prf_counts(tp, pred, truth);
    return {r.precision, r.recall.value_or(0.0), r.f.value_or(0.0)};
  }
};

struct MacroAccumulator {
  double p = 0.0, r = 0.0, f = 0.0;
  std::size_t np = 0, nr = 0;
  void add(const Prf& x, bool had_predictions, bool vacuous) {
    if (had_predictions || vacuous) {
      p += x.precision;
      ++np;
    }
    if (x.recall) {
      r += *x.recall;
      f += *x.f;
      ++nr;
    }
  }
  AggregatePrf result() const {
    return {np ? p / static_cast<double>(np) : 0.0, nr ? r / static_cast<double>(nr) : 0.0,
            nr ? f / static_cast<double>(nr) : 0.0};
  }
};

}  // namespace detail

/// Per-day precision/recall rows for words (truth: the fixed novel word set
/// from onset on) and documents (truth: that day's novel documents), plus
/// micro and macro aggregates over the aggregation window.
inline EvalReport evaluate_reports(std::span<const DayReport> reports, const GroundTruth& truth, const DocDays& days,
                                   const EvalOptions& options = {}) {
  EvalReport out;
  const std::set<TermId> truth_words(truth.novel_words.begin(), truth.novel_words.end());
  std::map<int, std::set<std::string>> novel_by_day;
  for (const auto& id : truth.novel_doc_ids) {
    auto it = days.find(id);
    if (it == days.end()) throw std::invalid_argument("novel doc " + id + " has no known day");
    novel_by_day[it->second].insert(id);
  }
  std::size_t max_count = 0;
  for (const auto& [d, s] : novel_by_day) max_count = std::max(max_count, s.size());

  detail::Confusion wmicro, dmicro;
  detail::MacroAccumulator wmacro, dmacro;
  std::vector<Alert> alerts;
  static const std::set<std::string> kNoDocs;

  for (const auto& rep : reports) {
    CurveRow row;
    row.day = rep.day;
    const bool post = rep.day >= truth.onset_day;

    std::size_t wtp = 0;
    for (TermId t : rep.flagged_words) wtp += truth_words.count(t);
    const std::size_t wtruth = post ? truth_words.size() : 0;
    if (!post) wtp = 0;
    row.words = prf_counts(wtp, rep.flagged_words.size(), wtruth);

    auto nd = novel_by_day.find(rep.day);
    const auto& day_truth = nd == novel_by_day.end() ? kNoDocs : nd->second;
    std::size_t dpred = 0, dtp = 0;
    for (const auto& id : rep.flagged_docs) {
      auto it = days.find(id);
      if (it == days.end() || it->second != rep.day) continue;
      ++dpred;
      dtp += day_truth.count(id);
    }
    row.docs = prf_counts(dtp, dpred, day_truth.size());
    row.novel_docs = day_truth.size();
    row.novel_count_normalized =
        max_count ? static_cast<double>(day_truth.size()) / static_cast<double>(max_count) : 0.0;

    if (post || !options.post_onset_only) {
      wmicro.add(wtp, rep.flagged_words.size(), wtruth);
      dmicro.add(dtp, dpred, day_truth.size());
      wmacro.add(row.words, !rep.flagged_words.empty(), options.vacuous_precision);
      dmacro.add(row.docs, dpred > 0, options.vacuous_precision);
    }
    alerts.insert(alerts.end(), rep.alerts.begin(), rep.alerts.end());
    out.per_day.push_back(std::move(row));
  }
  out.words_micro = wmicro.result();
  out.docs_micro = dmicro.result();
  out.words_macro = wmacro.result();
  out.docs_macro = dmacro.result();
  const auto delay = detection_delay(alerts, truth.onset_day);
  out.alert_delay_days = delay.delay;
  out.false_alerts = delay.false_alerts;
  return out;
}

/// AUC of the pooled document scores of all reports against the novel set.
inline double pooled_auc(std::span<const DayReport> reports, const GroundTruth& truth, int from_day = 0) {
  std::vector<std::pair<double, bool>> v;
  for (const auto& r : reports) {
    if (r.day < from_day) continue;
    for (const auto& s : r.doc_scores) v.emplace_back(s.score, truth.is_novel_doc(s.doc_id));
  }
  return auc(v);
}

inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline std::string format_optional(const std::optional<double>& x) { return x ? format_number(*x) : ""; }

/// day,word_P,word_R,doc_P,doc_R,novel_count_normalized
inline void write_curves_csv(const EvalReport& report, std::ostream& out) {
  out << "day,word_P,word_R,doc_P,doc_R,novel_count_normalized\n";
  for (const auto& r : report.per_day) {
    out << r.day << ',' << format_number(r.words.precision) << ',' << format_number(r.words.recall.value_or(0.0)) << ','
        << format_number(r.docs.precision) << ',' << format_number(r.docs.recall.value_or(0.0)) << ','
        << format_number(r.novel_count_normalized) << '\n';
  }
}

}  // namespace novelty
