// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "novelty/evaluation.hpp"

using namespace novelty;
using Catch::Matchers::WithinAbs;

namespace {

// O(n^2) pair counting.
double pair_auc(const std::vector<std::pair<double, bool>>& v) {
  double wins = 0.0, pairs = 0.0;
  for (const auto& p : v) {
    if (!p.second) continue;
    for (const auto& n : v) {
      if (n.second) continue;
      pairs += 1.0;
      wins += p.first > n.first ? 1.0 : (p.first == n.first ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

Alert alert_on(int day) {
  Alert a;
  a.day = day;
  return a;
}

}  // namespace

TEST_CASE("precision, recall and F on small sets", "[evaluation]") {
  const auto r = prf<int>({1, 2, 3, 4}, {3, 4, 5, 6, 7, 8});
  CHECK(r.precision == 0.5);
  CHECK_THAT(*r.recall, WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(*r.f, WithinAbs(0.4, 1e-12));

  const auto empty_pred = prf<int>({}, {1});
  CHECK(empty_pred.precision == 1.0);
  CHECK(*empty_pred.recall == 0.0);
  CHECK(*empty_pred.f == 0.0);

  const auto empty_truth = prf<int>({1}, {});
  CHECK(empty_truth.precision == 0.0);
  CHECK_FALSE(empty_truth.recall.has_value());
  CHECK(f_measure(0.0, 0.0) == 0.0);
}

TEST_CASE("detection delay counts early alerts as false", "[evaluation]") {
  const std::vector<Alert> alerts{alert_on(48), alert_on(53), alert_on(60)};
  const auto r = detection_delay(alerts, 50);
  CHECK(r.delay == 3);
  CHECK(r.false_alerts == 1);
  CHECK(detection_delay(std::vector<Alert>{alert_on(50)}, 50).delay == 0);
  CHECK_FALSE(detection_delay(std::vector<Alert>{alert_on(10)}, 50).delay.has_value());
}

TEST_CASE("AUC equals pair counting", "[evaluation]") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coarse(0, 20);  // plenty of ties
  std::bernoulli_distribution label(0.3);
  std::vector<std::pair<double, bool>> v;
  for (int i = 0; i < 500; ++i) v.emplace_back(coarse(rng), label(rng));
  CHECK_THAT(auc(v), WithinAbs(pair_auc(v), 1e-12));

  // monotone transforms do not change ranks
  auto w = v;
  for (auto& p : w) p.first = std::exp(0.3 * p.first) - 7.0;
  CHECK_THAT(auc(w), WithinAbs(auc(v), 1e-12));

  std::vector<std::pair<double, bool>> ties{{1.0, true}, {1.0, false}, {1.0, true}, {1.0, false}};
  CHECK(auc(ties) == 0.5);
  CHECK(auc(std::vector<std::pair<double, bool>>{{3.0, true}, {1.0, false}, {2.0, true}}) == 1.0);
  CHECK(auc(std::vector<std::pair<double, bool>>{{3.0, false}, {1.0, false}, {2.0, true}}) == 0.5);
  CHECK_THROWS_AS(auc(std::vector<std::pair<double, bool>>{{1.0, true}}), std::invalid_argument);
}

TEST_CASE("micro pools counts while macro averages days", "[evaluation]") {
  GroundTruth truth;
  truth.onset_day = 1;
  truth.novel_words = {0, 1};
  truth.novel_doc_ids = {"n1", "n2a", "n2b", "n2c"};
  const DocDays days{{"a0", 0}, {"n1", 1}, {"x1", 1}, {"n2a", 2}, {"n2b", 2}, {"n2c", 2}, {"x2", 2}};

  std::vector<DayReport> reports(3);
  reports[0].day = 0;
  reports[0].flagged_words = {0};
  reports[0].flagged_docs = {"a0"};
  reports[1].day = 1;
  reports[1].flagged_words = {0, 5};
  reports[1].flagged_docs = {"n1", "x1"};
  reports[2].day = 2;
  reports[2].flagged_words = {0, 1};
  reports[2].flagged_docs = {"n2a", "n1"};  // n1 belongs to day 1 and is ignored here
  reports[2].alerts = {alert_on(2)};
  reports[0].alerts = {alert_on(0)};

  const auto r = evaluate_reports(reports, truth, days);
  REQUIRE(r.per_day.size() == 3);
  // day 1: docs P 1/2 R 1/1; day 2: docs P 1/1 R 1/3
  CHECK(r.per_day[1].docs.precision == 0.5);
  CHECK(*r.per_day[1].docs.recall == 1.0);
  CHECK(r.per_day[2].docs.precision == 1.0);
  CHECK_THAT(*r.per_day[2].docs.recall, WithinAbs(1.0 / 3.0, 1e-15));
  CHECK(r.per_day[0].docs.precision == 0.0);
  CHECK_FALSE(r.per_day[0].words.recall.has_value());

  CHECK_THAT(r.docs_micro.precision, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_THAT(r.docs_micro.recall, WithinAbs(2.0 / 4.0, 1e-15));
  CHECK_THAT(r.docs_macro.precision, WithinAbs(0.75, 1e-15));
  CHECK_THAT(r.docs_macro.recall, WithinAbs((1.0 + 1.0 / 3.0) / 2.0, 1e-15));
  // words: day 1 tp 1 of 2, day 2 tp 2 of 2, truth 2 per day
  CHECK_THAT(r.words_micro.precision, WithinAbs(0.75, 1e-15));
  CHECK_THAT(r.words_micro.recall, WithinAbs(0.75, 1e-15));
  CHECK_THAT(r.words_micro.f, WithinAbs(0.75, 1e-15));
  CHECK(r.alert_delay_days == 1);
  CHECK(r.false_alerts == 1);
  CHECK(r.per_day[2].novel_count_normalized == 1.0);
  CHECK_THAT(r.per_day[1].novel_count_normalized, WithinAbs(1.0 / 3.0, 1e-15));

  EvalOptions whole;
  whole.post_onset_only = false;
  const auto w = evaluate_reports(reports, truth, days, whole);
  CHECK_THAT(w.docs_micro.precision, WithinAbs(2.0 / 4.0, 1e-15));
  CHECK_THAT(w.words_micro.precision, WithinAbs(3.0 / 5.0, 1e-15));
}

TEST_CASE("days without predictions and vacuous precision", "[evaluation]") {
  GroundTruth truth;
  truth.onset_day = 0;
  truth.novel_doc_ids = {"n"};
  const DocDays days{{"n", 0}, {"x", 1}};
  std::vector<DayReport> reports(2);
  reports[0].day = 0;
  reports[0].flagged_docs = {"x"};  // wrong day, ignored
  reports[1].day = 1;
  reports[1].flagged_docs = {"x"};
  const auto vac = evaluate_reports(reports, truth, days);
  CHECK(vac.docs_macro.precision == 0.5);
  EvalOptions strict;
  strict.vacuous_precision = false;
  const auto s = evaluate_reports(reports, truth, days, strict);
  CHECK(s.docs_macro.precision == 0.0);
}

TEST_CASE("pooled AUC and curve output", "[evaluation]") {
  GroundTruth truth;
  truth.novel_doc_ids = {"b"};
  std::vector<DayReport> reports(2);
  reports[0].day = 0;
  reports[0].doc_scores = {{"a", 0.9}};
  reports[1].day = 1;
  reports[1].doc_scores = {{"b", 0.5}, {"c", 0.1}};
  CHECK(pooled_auc(reports, truth) == 0.5);
  CHECK(pooled_auc(reports, truth, 1) == 1.0);

  EvalReport r;
  r.per_day.push_back(CurveRow{3, prf_counts(1, 2, 4), prf_counts(0, 0, 0), 0, 0.25});
  std::ostringstream out;
  write_curves_csv(r, out);
  CHECK(out.str() ==
        "day,word_P,word_R,doc_P,doc_R,novel_count_normalized\n"
        "3,0.500000,0.250000,1.000000,0.000000,0.250000\n");
}
