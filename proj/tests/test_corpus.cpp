// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#include <catch_amalgamated.hpp>

#include <map>
#include <random>
#include <sstream>

#include "novelty/corpus.hpp"
#include "novelty/simulator.hpp"

using namespace novelty;

namespace {

LabeledCorpus parse(const std::string& text) {
  std::istringstream in(text);
  return read_corpus(in);
}

std::string dump(const LabeledCorpus& c) {
  std::ostringstream out;
  write_corpus(c, out);
  return out.str();
}

}  // namespace

TEST_CASE("read_corpus groups documents into ascending day batches", "[corpus]") {
  auto c = parse("a\t0\tx y\n# comment\nb\t0\ty z\nc\t1\tx\n");
  REQUIRE(c.batches.size() == 2);
  CHECK(c.batches[0].documents.size() == 2);
  CHECK(c.batches[1].documents.size() == 1);

  auto d = parse("a\t3\tx\nb\t1\ty\nc\t1\tz\n");
  REQUIRE(d.batches.size() == 2);
  CHECK(d.batches[0].day == 1);
  CHECK(d.batches[1].day == 3);
  CHECK(d.batches[0].documents.size() == 2);
  CHECK(d.batches[0].documents[0].id == "b");  // stable within a day
  CHECK(d.batches[0].documents[1].id == "c");
}

TEST_CASE("vocabulary is the sorted union of tokens", "[corpus]") {
  auto c = parse("a\t0\tpear apple\nb\t0\tzebra\n");
  REQUIRE(c.vocabulary.size() == 3);
  CHECK(c.vocabulary.term(0) == "apple");
  CHECK(c.vocabulary.term(1) == "pear");
  CHECK(c.vocabulary.term(2) == "zebra");
  for (TermId t = 0; t < c.vocabulary.size(); ++t) CHECK(c.vocabulary.id(c.vocabulary.term(t)) == t);
  CHECK_FALSE(c.vocabulary.find("kiwi").has_value());
}

TEST_CASE("malformed lines name their line number", "[corpus]") {
  auto line_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("a\t0\tx\nb\t0\n") == 2);
  CHECK(line_of("# c\na\t-1\tx\n") == 2);
  CHECK(line_of("a\tday\tx\n") == 1);
  CHECK(line_of("a\t0\t \n") == 1);
  CHECK(line_of("\t0\tx\n") == 1);
  CHECK(line_of("a\t0\tx\tl\textra\n") == 1);
}

TEST_CASE("labels are optional and an empty label field means none", "[corpus]") {
  auto c = parse("a\t0\tx\tsport\nb\t0\ty\t\nc\t0\tz\n");
  const auto& docs = c.batches[0].documents;
  CHECK(docs[0].label == std::optional<std::string>("sport"));
  CHECK_FALSE(docs[1].label.has_value());
  CHECK_FALSE(docs[2].label.has_value());
  CHECK(dump(c) == "a\t0\tx\tsport\nb\t0\ty\nc\t0\tz\n");
}

TEST_CASE("write then read round-trips term strings, days and labels", "[corpus]") {
  const std::string one = "doc1\t4\tb a b\tL\n";
  CHECK(dump(parse(one)) == one);

  SimulatorConfig sc;
  sc.vocab_size = 300;
  sc.horizon_days = 12;
  sc.background_docs_per_topic_per_day = 3;
  sc.doc_length = 20;
  for (const auto& spec : default_scenarios(12)) {
    const auto sim = generate_corpus(sc, spec);
    const auto text = dump(sim.corpus);
    const auto back = parse(text);
    CHECK(dump(back) == text);
    REQUIRE(back.batches.size() == sim.corpus.batches.size());
    for (std::size_t i = 0; i < back.batches.size(); ++i) {
      CHECK(back.batches[i].documents.size() == sim.corpus.batches[i].documents.size());
    }
  }
}

TEST_CASE("day_term_stats counts term and document frequencies", "[corpus]") {
  auto c = parse("d1\t0\ta a b\nd2\t0\tb c\n");
  const auto s = day_term_stats(c.batches[0], c.vocabulary);
  const TermId a = c.vocabulary.id("a"), b = c.vocabulary.id("b"), cc = c.vocabulary.id("c");
  CHECK(s.tf[a] == 2);
  CHECK(s.df[a] == 1);
  CHECK(s.tf[b] == 2);
  CHECK(s.df[b] == 2);
  CHECK(s.tf[cc] == 1);
  CHECK(s.n_tokens == 5);
  CHECK(s.n_docs == 2);

  const auto empty = day_term_stats(DayBatch{7, {}}, c.vocabulary);
  CHECK(empty.n_tokens == 0);
  CHECK(empty.n_docs == 0);
  for (auto x : empty.tf) CHECK(x == 0);

  auto r = parse("d\t0\ta a a\n");
  const auto rs = day_term_stats(r.batches[0], r.vocabulary);
  CHECK(rs.tf[0] == 3);
  CHECK(rs.df[0] == 1);
}

TEST_CASE("day_term_stats agrees with a naive recount on random batches", "[corpus]") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> term(0, 29), len(1, 12), ndocs(0, 15);
  std::vector<std::string> terms;
  for (int i = 0; i < 30; ++i) terms.push_back("t" + std::to_string(i));
  const auto vocab = Vocabulary::from_terms(terms);
  for (int trial = 0; trial < 50; ++trial) {
    DayBatch b{trial, {}};
    const int n = ndocs(rng);
    for (int d = 0; d < n; ++d) {
      Document doc;
      doc.id = "x" + std::to_string(d);
      doc.day = trial;
      for (int i = len(rng); i > 0; --i) doc.tokens.push_back(static_cast<TermId>(term(rng)));
      b.documents.push_back(doc);
    }
    const auto s = day_term_stats(b, vocab);
    std::map<TermId, std::uint64_t> tf, df;
    std::uint64_t total = 0;
    for (const auto& doc : b.documents) {
      std::set<TermId> seen;
      for (auto t : doc.tokens) {
        ++tf[t];
        ++total;
        if (seen.insert(t).second) ++df[t];
      }
    }
    std::uint64_t sum = 0;
    for (TermId t = 0; t < vocab.size(); ++t) {
      CHECK(s.tf[t] == tf[t]);
      CHECK(s.df[t] == df[t]);
      CHECK(s.df[t] <= s.n_docs);
      sum += s.tf[t];
    }
    CHECK(sum == s.n_tokens);
    CHECK(s.n_tokens == total);
  }
}

TEST_CASE("contiguous_days fills gaps with empty batches", "[corpus]") {
  auto c = parse("a\t2\tx\nb\t5\ty\n");
  std::vector<DayBatch> empties;
  const auto days = contiguous_days(c, empties);
  REQUIRE(days.size() == 4);
  CHECK(days[0]->day == 2);
  CHECK(days[1]->day == 3);
  CHECK(days[1]->documents.empty());
  CHECK(days[3]->day == 5);
}

TEST_CASE("extending the vocabulary keeps documents intact", "[corpus]") {
  std::istringstream in("a\t0\tpear apple\nb\t1\tzebra apple\n");
  auto c = read_corpus(in);
  auto text = [](const LabeledCorpus& x) {
    std::ostringstream out;
    write_corpus(x, out);
    return out.str();
  };
  const auto before = text(c);
  extend_vocabulary(c, {"banana", "apple", "yak"});
  CHECK(c.vocabulary.terms() == std::vector<std::string>{"apple", "banana", "pear", "yak", "zebra"});
  CHECK(text(c) == before);
  CHECK(c.batches[1].documents[0].tokens == std::vector<TermId>{4, 0});
}
