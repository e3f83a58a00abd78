// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "novelty/detectors/topic_sketch.hpp"
#include "novelty/simulator.hpp"

using namespace novelty;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// A day whose only document holds `counts[t]` copies of term t.
DayBatch day_of(int day, const std::vector<int>& counts) {
  Document d;
  d.id = "d" + std::to_string(day);
  d.day = day;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    for (int i = 0; i < counts[t]; ++i) d.tokens.push_back(static_cast<TermId>(t));
  }
  return DayBatch{day, {d}};
}

struct Recurrence {
  double f = 0, s = 0, v = 0, a = 0;
  bool started = false;
  void step(double x, double df, double ds) {
    if (!started) {
      f = s = x;
      v = 0;
      a = 0;
      started = true;
      return;
    }
    f = df * f + (1 - df) * x;
    s = ds * s + (1 - ds) * x;
    const double nv = f - s;
    a = nv - v;
    v = nv;
  }
};

}  // namespace

TEST_CASE("exact rates follow the EWMA recurrence", "[topicsketch]") {
  TopicSketchConfig cfg;
  TopicSketchDetector det(cfg, 3);
  const double df = std::exp2(-1.0 / cfg.fast_halflife), ds = std::exp2(-1.0 / cfg.slow_halflife);
  CHECK(df == 0.5);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> cnt(0, 20);
  std::vector<Recurrence> oracle(3);
  for (int day = 0; day < 40; ++day) {
    std::vector<int> c{cnt(rng) + 1, cnt(rng) + 1, cnt(rng) + 1};
    const double n = c[0] + c[1] + c[2];
    det.observe(day_of(day, c));
    for (TermId t = 0; t < 3; ++t) {
      oracle[t].step(c[t] / n, df, ds);
      CHECK(det.rate_fast(t) == oracle[t].f);
      CHECK(det.rate_slow(t) == oracle[t].s);
      CHECK(det.velocity(t) == oracle[t].v);
      CHECK(det.acceleration(t) == oracle[t].a);
    }
  }
}

TEST_CASE("a constant stream has zero velocity and acceleration", "[topicsketch]") {
  TopicSketchDetector det({}, 2);
  for (int day = 0; day < 60; ++day) {
    const auto r = det.observe(day_of(day, {30, 70}));
    CHECK(r.alerts.empty());
  }
  CHECK(std::abs(det.acceleration(0)) < 1e-6);
  CHECK(std::abs(det.velocity(0)) < 1e-6);
  CHECK_THAT(det.rate_slow(0), WithinAbs(0.3, 1e-12));
}

TEST_CASE("a step in frequency gives positive velocity and acceleration", "[topicsketch]") {
  TopicSketchDetector det({}, 2);
  for (int day = 0; day < 20; ++day) det.observe(day_of(day, {10, 90}));
  det.observe(day_of(20, {50, 50}));
  CHECK(det.velocity(0) > 0.0);
  CHECK(det.acceleration(0) > 0.0);
  const double a0 = det.acceleration(0);
  det.observe(day_of(21, {50, 50}));
  CHECK(det.velocity(0) > 0.0);
  CHECK(det.acceleration(0) < a0);  // growth slows once the step is absorbed
  CHECK(det.acceleration(1) < 0.0);
}

TEST_CASE("noise gain matches the closed-form filter energy", "[topicsketch]") {
  // impulse response of a_t for h_j = (1-df) df^j - (1-ds) ds^j
  const double df = 0.5, ds = std::exp2(-1.0 / 7.0);
  double gain = 0.0, prev = 0.0;
  for (int j = 0; j < 5000; ++j) {
    const double h = (1 - df) * std::pow(df, j) - (1 - ds) * std::pow(ds, j);
    gain += (h - prev) * (h - prev);
    prev = h;
  }
  CHECK_THAT(acceleration_noise_gain(df, ds), WithinRel(gain, 1e-9));
}

TEST_CASE("decayed count sketch approximates rates when wide enough", "[topicsketch]") {
  const int n_terms = 200;
  DecayedCountSketch sk(5, 4 * n_terms, 3);
  std::vector<double> exact(n_terms, 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int day = 0; day < 10; ++day) {
    sk.decay(0.9);
    for (auto& e : exact) e *= 0.9;
    for (TermId t = 0; t < n_terms; ++t) {
      const double x = u(rng) * (t < 10 ? 20.0 : 1.0);
      sk.add(t, x);
      exact[t] += x;
    }
  }
  int close = 0;
  for (TermId t = 0; t < n_terms; ++t) close += std::abs(sk.estimate(t) - exact[t]) <= 0.1 * exact[t];
  CHECK(close >= static_cast<int>(0.9 * n_terms));
  for (TermId t = 0; t < 10; ++t) CHECK_THAT(sk.estimate(t), WithinRel(exact[t], 0.1));
}

TEST_CASE("sketched rates track the exact detector", "[topicsketch]") {
  TopicSketchConfig exact_cfg, sketch_cfg;
  sketch_cfg.sketch.enabled = true;
  sketch_cfg.sketch.width = 4096;
  sketch_cfg.sketch.depth = 5;
  TopicSketchDetector exact(exact_cfg, 50), sketched(sketch_cfg, 50);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> cnt(1, 30);
  for (int day = 0; day < 30; ++day) {
    std::vector<int> c(50);
    for (auto& x : c) x = cnt(rng);
    exact.observe(day_of(day, c));
    sketched.observe(day_of(day, c));
  }
  for (TermId t = 0; t < 50; ++t) CHECK_THAT(sketched.rate_slow(t), WithinRel(exact.rate_slow(t), 0.1));
}

TEST_CASE("no alerts during warm-up even on a burst", "[topicsketch]") {
  TopicSketchConfig cfg;
  cfg.min_alert_terms = 1;
  TopicSketchDetector det(cfg, 10);
  std::vector<int> base(10, 10);
  for (int day = 0; day < cfg.warmup_days; ++day) {
    auto c = base;
    if (day == 3) c[0] = 500;
    CHECK(det.observe(day_of(day, c)).alerts.empty());
  }
}

TEST_CASE("null stream stays quiet and an emerging topic alerts", "[topicsketch]") {
  SimulatorConfig sc;
  sc.vocab_size = 2000;
  sc.horizon_days = 100;
  sc.seed = 5;
  auto null_spec = emergent_scenario(0, 100, 1.0);
  null_spec.amplitude = 0.0;
  const auto null_sim = generate_corpus(sc, null_spec);
  TopicSketchDetector quiet({}, null_sim.corpus.vocabulary.size());
  int null_alerts = 0;
  for (const auto& b : null_sim.corpus.batches) null_alerts += static_cast<int>(quiet.observe(b).alerts.size());
  CHECK(null_alerts <= 1);

  const auto sim = generate_corpus(sc, event_scenario(9, 100, 1.0));
  TopicSketchDetector det({}, sim.corpus.vocabulary.size());
  std::optional<int> first;
  int early = 0;
  for (const auto& b : sim.corpus.batches) {
    const auto r = det.observe(b);
    if (r.alerts.empty()) continue;
    if (b.day < sim.corpus.ground_truth->onset_day) ++early;
    else if (!first) first = b.day;
  }
  CHECK(early <= 1);
  REQUIRE(first.has_value());
  CHECK(*first - sim.corpus.ground_truth->onset_day <= 3);
}

TEST_CASE("invalid TopicSketch settings are rejected", "[topicsketch]") {
  TopicSketchConfig cfg;
  cfg.slow_halflife = 0.5;
  CHECK_THROWS_AS(TopicSketchDetector(cfg, 10), ConfigError);
  cfg = {};
  cfg.fade_ratio = 1.0;
  CHECK_THROWS_AS(TopicSketchDetector(cfg, 10), ConfigError);
  cfg = {};
  cfg.sketch.enabled = true;
  cfg.sketch.width = 0;
  CHECK_THROWS_AS(TopicSketchDetector(cfg, 10), ConfigError);
}

TEST_CASE("sharp event: median first-alert delay over five seeds", "[topicsketch]") {
  SimulatorConfig sc;
  sc.vocab_size = 2000;
  sc.horizon_days = 100;
  std::vector<int> delays;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    sc.seed = seed;
    const auto sim = generate_corpus(sc, event_scenario(9, 100, 1.0));
    TopicSketchDetector det({}, sim.corpus.vocabulary.size());
    int delay = 1000;
    for (const auto& b : sim.corpus.batches) {
      if (!det.observe(b).alerts.empty() && b.day >= sim.corpus.ground_truth->onset_day && delay == 1000) {
        delay = b.day - sim.corpus.ground_truth->onset_day;
      }
    }
    delays.push_back(delay);
  }
  std::sort(delays.begin(), delays.end());
  CHECK(delays[2] <= 2);
}
