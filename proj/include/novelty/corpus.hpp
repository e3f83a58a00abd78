// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "novelty/error.hpp"

namespace novelty {

using TermId = std::uint32_t;

/// Sorted, deduplicated term list with a term -> id index. Ids are the
/// positions in sorted order, so two corpora over the same term set agree.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary from_terms(std::vector<std::string> terms) {
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    Vocabulary v;
    v.terms_ = std::move(terms);
    v.index_.reserve(v.terms_.size());
    for (std::size_t i = 0; i < v.terms_.size(); ++i) {
      v.index_.emplace(v.terms_[i], static_cast<TermId>(i));
    }
    return v;
  }

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  const std::string& term(TermId id) const { return terms_.at(id); }

  std::optional<TermId> find(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TermId id(std::string_view term) const {
    auto found = find(term);
    if (!found) throw std::out_of_range("unknown term '" + std::string(term) + "'");
    return *found;
  }

  const std::vector<std::string>& terms() const noexcept { return terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> index_;
};

struct Document {
  std::string id;
  int day = 0;
  // Bag of words; order is kept only so that files round-trip byte for byte.
  std::vector<TermId> tokens;
  std::optional<std::string> label;
};

struct DayBatch {
  int day = 0;
  std::vector<Document> documents;
};

struct GroundTruth {
  std::string novel_label;
  int onset_day = 0;
  std::vector<TermId> novel_words;          // sorted ascending
  std::vector<std::string> novel_doc_ids;   // sorted ascending
  bool words_are_proxy = false;              // true for holdout-derived truth

  bool is_novel_doc(const std::string& id) const {
    return std::binary_search(novel_doc_ids.begin(), novel_doc_ids.end(), id);
  }
};

struct LabeledCorpus {
  Vocabulary vocabulary;
  std::vector<DayBatch> batches;  // strictly increasing day
  std::optional<GroundTruth> ground_truth;

  std::size_t document_count() const {
    std::size_t n = 0;
    for (const auto& b : batches) n += b.documents.size();
    return n;
  }
};

/// (term, count) pairs sorted by term id.
using SparseCounts = std::vector<std::pair<TermId, std::uint32_t>>;

inline SparseCounts count_terms(std::span<const TermId> tokens) {
  std::vector<TermId> sorted(tokens.begin(), tokens.end());
  std::sort(sorted.begin(), sorted.end());
  SparseCounts out;
  for (TermId t : sorted) {
    if (!out.empty() && out.back().first == t) {
      ++out.back().second;
    } else {
      out.emplace_back(t, 1U);
    }
  }
  return out;
}

struct DayTermStats {
  std::vector<std::uint32_t> tf;  // token count per term
  std::vector<std::uint32_t> df;  // document count per term
  std::uint64_t n_tokens = 0;
  std::size_t n_docs = 0;
};

inline DayTermStats day_term_stats(const DayBatch& batch, const Vocabulary& vocab) {
  DayTermStats s;
  s.tf.assign(vocab.size(), 0);
  s.df.assign(vocab.size(), 0);
  s.n_docs = batch.documents.size();
  for (const auto& doc : batch.documents) {
    for (const auto& [term, count] : count_terms(doc.tokens)) {
      s.tf[term] += count;
      s.df[term] += 1;
      s.n_tokens += count;
    }
  }
  return s;
}

/// Checks the structural invariants of a corpus; throws std::invalid_argument.
inline void validate(const LabeledCorpus& corpus) {
  const auto v = corpus.vocabulary.size();
  int prev_day = -1;
  bool first = true;
  for (const auto& batch : corpus.batches) {
    if (!first && batch.day <= prev_day) {
      throw std::invalid_argument("batches are not in strictly increasing day order");
    }
    first = false;
    prev_day = batch.day;
    for (const auto& doc : batch.documents) {
      if (doc.day != batch.day) throw std::invalid_argument("document " + doc.id + " is in the wrong batch");
      if (doc.tokens.empty()) throw std::invalid_argument("document " + doc.id + " has no tokens");
      for (TermId t : doc.tokens) {
        if (t >= v) throw std::invalid_argument("document " + doc.id + " has an out-of-vocabulary token");
      }
    }
  }
  if (corpus.ground_truth) {
    const auto& gt = *corpus.ground_truth;
    std::map<std::string, const Document*> by_id;
    for (const auto& b : corpus.batches) {
      for (const auto& d : b.documents) by_id.emplace(d.id, &d);
    }
    for (const auto& id : gt.novel_doc_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw std::invalid_argument("ground truth references unknown doc " + id);
      if (it->second->label != gt.novel_label) throw std::invalid_argument("novel doc " + id + " has the wrong label");
      if (it->second->day < gt.onset_day) throw std::invalid_argument("novel doc " + id + " precedes onset");
    }
    for (TermId t : gt.novel_words) {
      if (t >= v) throw std::invalid_argument("ground truth word out of vocabulary");
    }
  }
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

struct RawDocument {
  std::string id;
  int day;
  std::vector<std::string> tokens;
  std::optional<std::string> label;
};

}  // namespace detail

/// Builds a corpus from documents whose tokens are still strings. Documents
/// are grouped by day (stable within a day) and the vocabulary is the sorted
/// union of all tokens.
inline LabeledCorpus build_corpus(std::vector<detail::RawDocument> raw) {
  std::vector<std::string> terms;
  for (const auto& d : raw) terms.insert(terms.end(), d.tokens.begin(), d.tokens.end());
  LabeledCorpus corpus;
  corpus.vocabulary = Vocabulary::from_terms(std::move(terms));

  std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.day < b.day; });
  for (auto& r : raw) {
    if (corpus.batches.empty() || corpus.batches.back().day != r.day) {
      corpus.batches.push_back(DayBatch{r.day, {}});
    }
    Document doc;
    doc.id = std::move(r.id);
    doc.day = r.day;
    doc.label = std::move(r.label);
    doc.tokens.reserve(r.tokens.size());
    for (const auto& t : r.tokens) doc.tokens.push_back(corpus.vocabulary.id(t));
    corpus.batches.back().documents.push_back(std::move(doc));
  }
  return corpus;
}

/// Parses the tab-separated corpus format:
///   doc_id<TAB>day<TAB>space separated tokens[<TAB>label]
/// Lines starting with '#' and blank lines are skipped.
inline LabeledCorpus read_corpus(std::istream& in) {
  std::vector<detail::RawDocument> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = detail::split(line, '\t');
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError("expected 3 or 4 tab-separated fields, got " + std::to_string(fields.size()), line_no);
    }
    if (fields[0].empty()) throw ParseError("empty doc_id", line_no);
    auto day = detail::parse_int<int>(fields[1]);
    if (!day) throw ParseError("day is not an integer: '" + std::string(fields[1]) + "'", line_no);
    if (*day < 0) throw ParseError("negative day " + std::to_string(*day), line_no);

    detail::RawDocument doc;
    doc.id = std::string(fields[0]);
    doc.day = *day;
    for (auto tok : detail::split(fields[2], ' ')) {
      if (!tok.empty()) doc.tokens.emplace_back(tok);
    }
    if (doc.tokens.empty()) throw ParseError("document '" + doc.id + "' has no tokens", line_no);
    if (fields.size() == 4 && !fields[3].empty()) doc.label = std::string(fields[3]);
    raw.push_back(std::move(doc));
  }
  return build_corpus(std::move(raw));
}

inline LabeledCorpus read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path);
  return read_corpus(in);
}

/// Adds terms that never occur in any document. Token ids are remapped to
/// the enlarged sorted vocabulary.
inline void extend_vocabulary(LabeledCorpus& corpus, std::vector<std::string> extra) {
  const Vocabulary old = corpus.vocabulary;
  extra.insert(extra.end(), old.terms().begin(), old.terms().end());
  corpus.vocabulary = Vocabulary::from_terms(std::move(extra));
  if (corpus.vocabulary.size() == old.size()) return;
  std::vector<TermId> remap(old.size());
  for (std::size_t i = 0; i < remap.size(); ++i) remap[i] = corpus.vocabulary.id(old.term(static_cast<TermId>(i)));
  for (auto& batch : corpus.batches) {
    for (auto& doc : batch.documents) {
      for (auto& t : doc.tokens) t = remap[t];
    }
  }
}

inline void write_corpus(const LabeledCorpus& corpus, std::ostream& out) {
  const auto& vocab = corpus.vocabulary;
  for (const auto& batch : corpus.batches) {
    for (const auto& doc : batch.documents) {
      out << doc.id << '\t' << doc.day << '\t';
      for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
        if (i) out << ' ';
        out << vocab.term(doc.tokens[i]);
      }
      if (doc.label) out << '\t' << *doc.label;
      out << '\n';
    }
  }
}

inline void write_corpus(const LabeledCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file " + path);
  write_corpus(corpus, out);
  if (!out) throw IoError("write failed for " + path);
}

/// Contiguous day sequence from the first to the last batch, with empty
/// batches for days that have no documents. Detectors consume this.
inline std::vector<const DayBatch*> contiguous_days(const LabeledCorpus& corpus, std::vector<DayBatch>& empties) {
  std::vector<const DayBatch*> out;
  if (corpus.batches.empty()) return out;
  const int first = corpus.batches.front().day;
  const int last = corpus.batches.back().day;
  empties.clear();
  empties.reserve(static_cast<std::size_t>(last - first + 1));
  std::size_t next = 0;
  for (int day = first; day <= last; ++day) {
    if (next < corpus.batches.size() && corpus.batches[next].day == day) {
      out.push_back(&corpus.batches[next++]);
    } else {
      empties.push_back(DayBatch{day, {}});
      out.push_back(&empties.back());
    }
  }
  return out;
}

}  // namespace novelty
