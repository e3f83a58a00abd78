// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "novelty/divergence.hpp"
#include "novelty/simulator.hpp"

using namespace novelty;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SimulatorConfig small_config(std::uint64_t seed = 1) {
  SimulatorConfig c;
  c.vocab_size = 2000;
  c.horizon_days = 100;
  c.seed = seed;
  return c;
}

std::string dump(const LabeledCorpus& c) {
  std::ostringstream out;
  write_corpus(c, out);
  return out.str();
}

}  // namespace

TEST_CASE("KL and JS match hand-computed values", "[divergence]") {
  const std::vector<double> p{0.5, 0.5}, q{0.9, 0.1};
  // direct sums, no smoothing needed since q > 0
  const double pq = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  const double qp = 0.9 * std::log(0.9 / 0.5) + 0.1 * std::log(0.1 / 0.5);
  CHECK_THAT(kl_divergence(p, q), WithinAbs(pq, 1e-9));
  CHECK_THAT(kl_divergence(q, p), WithinAbs(qp, 1e-9));
  CHECK_THAT(pq, WithinAbs(0.5108, 1e-4));
  CHECK_THAT(qp, WithinAbs(0.3681, 1e-4));
  CHECK_THAT(symmetric_kl(p, q), WithinAbs(0.5 * (pq + qp), 1e-9));
  CHECK(kl_divergence(p, p) == 0.0);

  const std::vector<double> a{1.0, 0.0}, b{0.0, 1.0};
  CHECK_THAT(js_divergence(a, b), WithinAbs(std::log(2.0), 1e-12));
  CHECK(js_divergence(a, a) == 0.0);
  CHECK(std::isfinite(kl_divergence(a, b)));
  CHECK_THROWS_AS(kl_divergence(p, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("Dirichlet draws are distributions whose concentration follows alpha", "[simulator]") {
  std::mt19937_64 rng(5);
  const auto flat = sample_dirichlet(1000, 1e6, rng);
  CHECK_THAT(std::accumulate(flat.begin(), flat.end(), 0.0), WithinAbs(1.0, 1e-9));
  for (double x : flat) CHECK_THAT(x, WithinRel(1e-3, 0.05));

  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 r(static_cast<std::uint64_t>(seed));
    auto p = sample_dirichlet(10000, 0.01, r);
    CHECK_THAT(std::accumulate(p.begin(), p.end(), 0.0), WithinAbs(1.0, 1e-9));
    std::sort(p.begin(), p.end(), std::greater<>());
    CHECK(std::accumulate(p.begin(), p.begin() + 100, 0.0) > 0.5);
  }
  CHECK_THROWS_AS(sample_dirichlet(10, 0.0, rng), ConfigError);
}

TEST_CASE("calibration hits the requested symmetric KL to the nearest topic", "[simulator]") {
  std::mt19937_64 rng(3);
  const auto topics = sample_topics(small_config(), rng);
  const auto r = calibrate_divergence(topics, 0.1);
  CHECK(r.achieved_kl >= 0.095);
  CHECK(r.achieved_kl <= 0.105);
  // independent recomputation from the returned topics
  const auto& novel = r.topics.back().probs;
  const auto& near = r.topics[static_cast<std::size_t>(r.nearest_topic)].probs;
  CHECK_THAT(symmetric_kl(novel, near), WithinRel(r.achieved_kl, 1e-9));
  CHECK(r.lambda > 0.0);
  CHECK(r.lambda < 1.0);
  for (std::size_t z = 0; z + 1 < topics.size(); ++z) CHECK(r.topics[z].probs == topics[z].probs);

  double prev = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double lambda = i / 10.0;
    const auto mixed = mix_topics(topics.back().probs, topics[static_cast<std::size_t>(r.nearest_topic)].probs, lambda);
    const double d = symmetric_kl(mixed, topics[static_cast<std::size_t>(r.nearest_topic)].probs);
    CHECK(d >= prev);
    prev = d;
  }
  CHECK_THROWS_AS(calibrate_divergence(topics, r.max_achievable_kl * 2.0), ConfigError);
  CHECK_THROWS_AS(calibrate_divergence(topics, 0.0), ConfigError);
}

TEST_CASE("scenario curves follow their family", "[simulator]") {
  const auto e = emergent_scenario(5, 100, 2.0);
  CHECK(scenario_curve(e, 49) == 0);
  CHECK(scenario_curve(e, 50) == 0);
  CHECK(scenario_curve(e, 51) == 2);
  CHECK(scenario_curve(e, 60) == 20);
  CHECK(scenario_curve(e, 99) == 40);

  const auto ev = event_scenario(9, 100, 1.0);
  CHECK(scenario_curve(ev, 66) == 0);
  CHECK(scenario_curve(ev, 70) == 50);
  CHECK(scenario_curve(ev, 73) == static_cast<int>(std::lround(50.0 * std::exp(-4.5))));
  CHECK(scenario_curve(ev, 73) == 1);
  CHECK(scenario_curve(ev, 74) == 0);
  CHECK(scenario_curve(ev, 67) == scenario_curve(ev, 73));

  const auto c = cyclical_scenario(2, 100, 20);
  for (int d = 0; d < 50; ++d) CHECK(scenario_curve(c, d) == 0);
  for (int d = 50; d < 100; ++d) CHECK(scenario_curve(c, d) == (((d - 50) % 20) < 10 ? 40 : 0));

  const auto all = default_scenarios(100);
  REQUIRE(all.size() == 9);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].scenario_id == static_cast<int>(i) + 1);
}

TEST_CASE("generated corpus has the documented shape and truth", "[simulator]") {
  const auto sim = generate_corpus(small_config(), emergent_scenario(5, 100, 2.0));
  const auto& c = sim.corpus;
  REQUIRE(c.batches.size() == 100);
  CHECK(c.batches[0].documents.size() == 180);
  CHECK(c.batches[60].documents.size() == 200);
  REQUIRE(c.ground_truth);
  const auto& t = *c.ground_truth;
  CHECK(t.onset_day == 51);
  CHECK(t.novel_words.size() == 100);
  CHECK(std::is_sorted(t.novel_words.begin(), t.novel_words.end()));
  std::size_t novel = 0;
  for (const auto& b : c.batches) {
    int today = 0;
    for (const auto& d : b.documents) {
      CHECK(d.tokens.size() == 100);
      const bool is_novel = d.label == std::optional<std::string>("9");
      CHECK(t.is_novel_doc(d.id) == is_novel);
      today += is_novel;
    }
    CHECK(today == scenario_curve(emergent_scenario(5, 100, 2.0), b.day));
    novel += static_cast<std::size_t>(today);
  }
  CHECK(novel == t.novel_doc_ids.size());

  // truth words are the novel topic's top terms
  auto top = top_terms(sim.topics.back().probs, 100);
  std::sort(top.begin(), top.end());
  CHECK(top == t.novel_words);
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("generation is deterministic in the seed", "[simulator]") {
  const auto spec = event_scenario(8, 100, 2.0);
  const auto a = dump(generate_corpus(small_config(7), spec).corpus);
  const auto b = dump(generate_corpus(small_config(7), spec).corpus);
  const auto c = dump(generate_corpus(small_config(8), spec).corpus);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("amplitude zero yields a null corpus", "[simulator]") {
  auto spec = emergent_scenario(0, 100, 1.0);
  spec.amplitude = 0.0;
  const auto sim = generate_corpus(small_config(), spec);
  CHECK(sim.corpus.ground_truth->novel_doc_ids.empty());
  CHECK(sim.corpus.ground_truth->onset_day == 50);
  for (const auto& b : sim.corpus.batches) CHECK(b.documents.size() == 180);
}

TEST_CASE("bad simulator settings are rejected", "[simulator]") {
  auto c = small_config();
  c.n_topics = 1;
  CHECK_THROWS_AS(generate_corpus(c, emergent_scenario(4, 100, 1.0)), ConfigError);
  auto s = emergent_scenario(4, 100, 1.0);
  s.slope = 0.0;
  CHECK_THROWS_AS(generate_corpus(small_config(), s), ConfigError);
  CHECK_THROWS_AS(parse_family("sideways"), ConfigError);
  CHECK(parse_family("event") == ScenarioFamily::event);
}
