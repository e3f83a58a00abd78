// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "novelty/corpus.hpp"
#include "novelty/detectors.hpp"
#include "novelty/error.hpp"
#include "novelty/evaluation.hpp"

namespace novelty {

/// Removes every document of `category` published before `historic_days`;
/// the surviving category documents become the novel set. Word truth is a
/// proxy: the 100 terms most over-represented in the category against the
/// rest of the corpus (add-one smoothed relative frequencies).
inline LabeledCorpus holdout_inject(const LabeledCorpus& corpus, const std::string& category, int historic_days) {
  if (historic_days < 0) throw ConfigError("historic window must be non-negative");
  if (!corpus.batches.empty() && historic_days > corpus.batches.back().day) {
    throw ConfigError("historic window covers the whole corpus");
  }
  LabeledCorpus out;
  out.vocabulary = corpus.vocabulary;
  GroundTruth truth;
  truth.novel_label = category;
  truth.onset_day = -1;
  truth.words_are_proxy = true;

  const std::size_t v = corpus.vocabulary.size();
  std::vector<double> in_cat(v, 0.0), background(v, 0.0);
  double n_cat = 0.0, n_bg = 0.0;
  for (const auto& b : corpus.batches) {
    DayBatch kept{b.day, {}};
    for (const auto& d : b.documents) {
      const bool is_cat = d.label && *d.label == category;
      if (is_cat && d.day < historic_days) continue;
      if (is_cat) {
        truth.novel_doc_ids.push_back(d.id);
        if (truth.onset_day < 0) truth.onset_day = d.day;
        for (TermId t : d.tokens) in_cat[t] += 1.0;
        n_cat += static_cast<double>(d.tokens.size());
      } else {
        for (TermId t : d.tokens) background[t] += 1.0;
        n_bg += static_cast<double>(d.tokens.size());
      }
      kept.documents.push_back(d);
    }
    if (!kept.documents.empty()) out.batches.push_back(std::move(kept));
  }
  if (truth.novel_doc_ids.empty()) {
    throw ConfigError("category '" + category + "' has no documents after day " + std::to_string(historic_days - 1));
  }

  std::vector<ScoredTerm> ratio;
  const double dv = static_cast<double>(v);
  for (TermId t = 0; t < v; ++t) {
    if (in_cat[t] == 0.0) continue;
    ratio.push_back({t, ((in_cat[t] + 1.0) / (n_cat + dv)) / ((background[t] + 1.0) / (n_bg + dv))});
  }
  truth.novel_words = rank_terms(std::move(ratio), 100);
  std::sort(truth.novel_words.begin(), truth.novel_words.end());
  std::sort(truth.novel_doc_ids.begin(), truth.novel_doc_ids.end());
  out.ground_truth = std::move(truth);
  return out;
}

/// AUC of one detector on an injected corpus: the detector sees the historic
/// window first, then every document after it is scored and pooled.
inline double rank_and_auc(const LabeledCorpus& injected, const std::string& detector, const DetectorSuiteConfig& config,
                           int historic_days) {
  if (!injected.ground_truth) throw std::invalid_argument("corpus has no ground truth");
  auto det = make_detector(detector, config, injected.vocabulary.size());
  const auto reports = run_detector(*det, injected);
  return pooled_auc(reports, *injected.ground_truth, historic_days);
}

/// Default historic window for real corpora: the first quarter of the days.
inline int default_historic_days(const LabeledCorpus& corpus) {
  if (corpus.batches.empty()) return 0;
  const int first = corpus.batches.front().day;
  const int last = corpus.batches.back().day;
  return first + (last - first + 1) / 4;
}

// ---- ingest ---------------------------------------------------------------

namespace detail {

/// Seconds since the Unix epoch from either an integer or an ISO date
/// "YYYY-MM-DD" optionally followed by "THH:MM[:SS][Z]" (taken as UTC).
inline std::int64_t parse_timestamp(std::string_view s, std::size_t line) {
  if (auto secs = parse_int<std::int64_t>(s)) return *secs;
  auto num = [&](std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) throw ParseError("bad timestamp '" + std::string(s) + "'", line);
    auto v = parse_int<int>(s.substr(pos, len));
    if (!v) throw ParseError("bad timestamp '" + std::string(s) + "'", line);
    return *v;
  };
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw ParseError("bad timestamp '" + std::string(s) + "'", line);
  const std::chrono::year_month_day ymd{std::chrono::year{num(0, 4)}, std::chrono::month{static_cast<unsigned>(num(5, 2))},
                                        std::chrono::day{static_cast<unsigned>(num(8, 2))}};
  if (!ymd.ok()) throw ParseError("invalid date '" + std::string(s) + "'", line);
  std::int64_t secs = std::chrono::sys_days{ymd}.time_since_epoch().count() * 86400LL;
  if (s.size() > 10) {
    if (s[10] != 'T' && s[10] != ' ') throw ParseError("bad timestamp '" + std::string(s) + "'", line);
    secs += num(11, 2) * 3600LL + num(14, 2) * 60LL;
    if (s.size() > 16 && s[16] == ':') secs += num(17, 2);
  }
  return secs;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

}  // namespace detail

/// Converts raw labeled text (doc_id<TAB>timestamp<TAB>text[<TAB>label]) to
/// a corpus. Timestamps are bucketed into days at midnight UTC, counted from
/// the earliest day present; text is split on whitespace.
inline LabeledCorpus ingest_raw(std::istream& in, bool lowercase = false) {
  struct Row {
    detail::RawDocument doc;
    std::int64_t day;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = detail::split(line, '\t');
    if (f.size() < 3 || f.size() > 4) throw ParseError("expected 3 or 4 tab-separated fields", line_no);
    if (f[0].empty()) throw ParseError("empty doc_id", line_no);
    Row row;
    row.doc.id = std::string(f[0]);
    row.day = detail::floor_div(detail::parse_timestamp(f[1], line_no), 86400);
    std::string text(f[2]);
    if (lowercase) std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
    std::string tok;
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) row.doc.tokens.push_back(std::move(tok));
        tok.clear();
      } else {
        tok += c;
      }
    }
    if (!tok.empty()) row.doc.tokens.push_back(std::move(tok));
    if (row.doc.tokens.empty()) throw ParseError("document '" + row.doc.id + "' has no tokens", line_no);
    if (f.size() == 4 && !f[3].empty()) row.doc.label = std::string(f[3]);
    rows.push_back(std::move(row));
  }
  std::int64_t first = 0;
  if (!rows.empty()) {
    first = std::min_element(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.day < b.day; })->day;
  }
  std::vector<detail::RawDocument> raw;
  raw.reserve(rows.size());
  for (auto& r : rows) {
    r.doc.day = static_cast<int>(r.day - first);
    raw.push_back(std::move(r.doc));
  }
  return build_corpus(std::move(raw));
}

}  // namespace novelty
