// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "novelty/corpus.hpp"
#include "novelty/detectors/report.hpp"
#include "novelty/error.hpp"

namespace novelty {

// Report stream, one tab-separated record per line, days ascending:
//   R   day                      day header, always present
//   W   day term score           word score
//   FW  day term                 flagged word, rank order
//   S   day doc_id score         document score, batch order
//   FD  day doc_id               flagged document, rank order
//   A   day strength terms       alert; trigger terms space-separated
// Terms are written as strings; scores with 17 significant digits.

namespace detail {

inline std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_double(std::string_view s, std::size_t line) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("bad number '" + std::string(s) + "'", line);
  }
}

inline TermId lookup(const Vocabulary& vocab, std::string_view term, std::size_t line) {
  auto id = vocab.find(std::string(term));
  if (!id) throw ParseError("term '" + std::string(term) + "' is not in the corpus vocabulary", line);
  return *id;
}

}  // namespace detail

inline void write_reports(std::span<const DayReport> reports, const Vocabulary& vocab, const std::string& detector,
                          std::ostream& out) {
  using detail::exact;
  out << "# novbench reports v1\n# detector " << detector << '\n';
  for (const auto& r : reports) {
    out << "R\t" << r.day << '\n';
    for (const auto& w : r.word_scores) out << "W\t" << r.day << '\t' << vocab.term(w.term) << '\t' << exact(w.score) << '\n';
    for (TermId t : r.flagged_words) out << "FW\t" << r.day << '\t' << vocab.term(t) << '\n';
    for (const auto& d : r.doc_scores) out << "S\t" << r.day << '\t' << d.doc_id << '\t' << exact(d.score) << '\n';
    for (const auto& id : r.flagged_docs) out << "FD\t" << r.day << '\t' << id << '\n';
    for (const auto& a : r.alerts) {
      out << "A\t" << r.day << '\t' << exact(a.strength) << '\t';
      for (std::size_t i = 0; i < a.trigger_terms.size(); ++i) out << (i ? " " : "") << vocab.term(a.trigger_terms[i]);
      out << '\n';
    }
  }
}

inline std::vector<DayReport> read_reports(std::istream& in, const Vocabulary& vocab) {
  std::vector<DayReport> reports;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = detail::split(line, '\t');
    if (f.size() < 2) throw ParseError("record needs a type and a day", line_no);
    const auto parsed_day = detail::parse_int<int>(f[1]);
    if (!parsed_day) throw ParseError("day is not an integer: '" + std::string(f[1]) + "'", line_no);
    const int day = *parsed_day;
    const std::string_view type = f[0];
    if (type == "R") {
      if (!reports.empty() && day <= reports.back().day) throw ParseError("days must increase", line_no);
      reports.push_back(DayReport{});
      reports.back().day = day;
      continue;
    }
    if (reports.empty() || reports.back().day != day) throw ParseError("record outside its day header", line_no);
    auto& r = reports.back();
    auto need = [&](std::size_t n) {
      if (f.size() != n) throw ParseError(std::string(type) + " record needs " + std::to_string(n) + " fields", line_no);
    };
    if (type == "W") {
      need(4);
      r.word_scores.push_back({detail::lookup(vocab, f[2], line_no), detail::parse_double(f[3], line_no)});
    } else if (type == "FW") {
      need(3);
      r.flagged_words.push_back(detail::lookup(vocab, f[2], line_no));
    } else if (type == "S") {
      need(4);
      r.doc_scores.push_back({std::string(f[2]), detail::parse_double(f[3], line_no)});
    } else if (type == "FD") {
      need(3);
      r.flagged_docs.emplace_back(f[2]);
    } else if (type == "A") {
      need(4);
      Alert a;
      a.day = day;
      a.strength = detail::parse_double(f[2], line_no);
      for (auto t : detail::split(f[3], ' ')) {
        if (!t.empty()) a.trigger_terms.push_back(detail::lookup(vocab, t, line_no));
      }
      r.alerts.push_back(std::move(a));
    } else {
      throw ParseError("unknown record type '" + std::string(type) + "'", line_no);
    }
  }
  return reports;
}

inline nlohmann::json truth_to_json(const GroundTruth& truth, const Vocabulary& vocab) {
  nlohmann::json j;
  j["novel_label"] = truth.novel_label;
  j["onset_day"] = truth.onset_day;
  j["words_are_proxy"] = truth.words_are_proxy;
  auto& words = j["novel_words"] = nlohmann::json::array();
  for (TermId t : truth.novel_words) words.push_back(vocab.term(t));
  j["novel_doc_ids"] = truth.novel_doc_ids;
  return j;
}

inline GroundTruth truth_from_json(const nlohmann::json& j, const Vocabulary& vocab) {
  GroundTruth t;
  try {
    t.novel_label = j.at("novel_label").get<std::string>();
    t.onset_day = j.at("onset_day").get<int>();
    t.words_are_proxy = j.value("words_are_proxy", false);
    for (const auto& w : j.at("novel_words")) {
      auto id = vocab.find(w.get<std::string>());
      if (!id) throw ParseError("truth word '" + w.get<std::string>() + "' is not in the corpus vocabulary", 0);
      t.novel_words.push_back(*id);
    }
    t.novel_doc_ids = j.at("novel_doc_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("truth file: ") + e.what(), 0);
  }
  std::sort(t.novel_words.begin(), t.novel_words.end());
  std::sort(t.novel_doc_ids.begin(), t.novel_doc_ids.end());
  return t;
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace novelty
