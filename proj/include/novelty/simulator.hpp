// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "novelty/corpus.hpp"
#include "novelty/divergence.hpp"
#include "novelty/error.hpp"

namespace novelty {

struct SimulatorConfig {
  bool operator==(const SimulatorConfig&) const = default;

  int vocab_size = 10000;
  int n_topics = 10;  // the last topic is the novel one
  int doc_length = 100;
  int horizon_days = 100;
  int background_docs_per_topic_per_day = 20;
  double alpha = 0.01;
  std::optional<double> target_kl;
  std::uint64_t seed = 1;

  void validate() const {
    if (vocab_size <= 0) throw ConfigError("vocab_size must be positive");
    if (n_topics < 2) throw ConfigError("n_topics must be at least 2");
    if (doc_length <= 0) throw ConfigError("doc_length must be positive");
    if (horizon_days <= 0) throw ConfigError("horizon_days must be positive");
    if (background_docs_per_topic_per_day <= 0) throw ConfigError("background_docs_per_topic_per_day must be positive");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (target_kl && !(*target_kl > 0.0)) throw ConfigError("target_kl must be positive");
  }
};

struct Topic {
  int id = 0;
  std::vector<double> probs;
};

/// Term strings used for simulated vocabularies: "w" followed by a
/// zero-padded index, so sorted order equals index order.
inline std::string simulated_term(int index, int vocab_size) {
  int width = 1;
  for (int n = vocab_size - 1; n >= 10; n /= 10) ++width;
  std::string digits = std::to_string(index);
  return "w" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') + digits;
}

/// One symmetric Dirichlet(alpha) draw over `dim` entries. Gamma variates are
/// drawn in log space (G_a = G_{a+1} * U^{1/a}) so that small alpha does not
/// underflow every entry to zero.
template <typename Rng>
std::vector<double> sample_dirichlet(int dim, double alpha, Rng& rng) {
  if (!(alpha > 0.0)) throw ConfigError("Dirichlet alpha must be positive");
  std::gamma_distribution<double> gamma(alpha + 1.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> logs(static_cast<std::size_t>(dim));
  for (auto& l : logs) {
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    l = std::log(gamma(rng)) + std::log(u) / alpha;
  }
  const double mx = *std::max_element(logs.begin(), logs.end());
  std::vector<double> p(logs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logs[i] - mx);
    total += p[i];
  }
  for (auto& x : p) x /= total;
  return p;
}

template <typename Rng>
std::vector<Topic> sample_topics(const SimulatorConfig& config, Rng& rng) {
  config.validate();
  std::vector<Topic> topics;
  topics.reserve(static_cast<std::size_t>(config.n_topics));
  for (int z = 0; z < config.n_topics; ++z) {
    topics.push_back(Topic{z, sample_dirichlet(config.vocab_size, config.alpha, rng)});
  }
  return topics;
}

struct CalibrationResult {
  std::vector<Topic> topics;
  int nearest_topic = 0;
  double lambda = 1.0;
  double achieved_kl = 0.0;   // symmetric
  double kl_novel_to_nearest = 0.0;
  double kl_nearest_to_novel = 0.0;
  double max_achievable_kl = 0.0;
  int iterations = 0;
};

inline std::vector<double> mix_topics(std::span<const double> fresh, std::span<const double> base, double lambda) {
  std::vector<double> out(fresh.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda * fresh[i] + (1.0 - lambda) * base[i];
  return out;
}

/// Index of the normal topic (all but the last) closest to the last topic in
/// symmetric KL.
inline int nearest_normal_topic(const std::vector<Topic>& topics) {
  const auto& novel = topics.back().probs;
  int best = 0;
  double best_kl = std::numeric_limits<double>::infinity();
  for (std::size_t z = 0; z + 1 < topics.size(); ++z) {
    const double d = symmetric_kl(novel, topics[z].probs);
    if (d < best_kl) {
      best_kl = d;
      best = static_cast<int>(z);
    }
  }
  return best;
}

/// Replaces the novel (last) topic by lambda * novel + (1 - lambda) * nearest
/// normal topic, with lambda bisected so the symmetric KL to that normal
/// topic hits `target_kl`. Normal topics are returned unchanged.
inline CalibrationResult calibrate_divergence(std::vector<Topic> topics, double target_kl,
                                              double relative_tolerance = 1e-4, int max_iterations = 60) {
  if (!(target_kl > 0.0)) throw ConfigError("target_kl must be positive");
  if (topics.size() < 2) throw ConfigError("calibration needs at least two topics");

  CalibrationResult r;
  r.nearest_topic = nearest_normal_topic(topics);
  const std::vector<double> fresh = topics.back().probs;
  const auto& base = topics[static_cast<std::size_t>(r.nearest_topic)].probs;
  r.max_achievable_kl = symmetric_kl(fresh, base);
  if (target_kl > r.max_achievable_kl) {
    throw ConfigError("target_kl " + std::to_string(target_kl) + " exceeds the achievable maximum " +
                      std::to_string(r.max_achievable_kl));
  }

  double lo = 0.0;
  double hi = 1.0;
  double lambda = 1.0;
  double achieved = r.max_achievable_kl;
  for (int it = 1; it <= max_iterations; ++it) {
    lambda = 0.5 * (lo + hi);
    achieved = symmetric_kl(mix_topics(fresh, base, lambda), base);
    r.iterations = it;
    if (std::abs(achieved - target_kl) <= relative_tolerance * target_kl) break;
    if (achieved < target_kl) {
      lo = lambda;
    } else {
      hi = lambda;
    }
  }

  auto mixed = mix_topics(fresh, base, lambda);
  r.lambda = lambda;
  r.achieved_kl = achieved;
  r.kl_novel_to_nearest = kl_divergence(mixed, base);
  r.kl_nearest_to_novel = kl_divergence(base, mixed);
  topics.back().probs = std::move(mixed);
  r.topics = std::move(topics);
  return r;
}

enum class ScenarioFamily { cyclical, emergent, event };

inline const char* to_string(ScenarioFamily f) {
  switch (f) {
    case ScenarioFamily::cyclical: return "cyclical";
    case ScenarioFamily::emergent: return "emergent";
    case ScenarioFamily::event: return "event";
  }
  return "?";
}

inline ScenarioFamily parse_family(const std::string& s) {
  if (s == "cyclical") return ScenarioFamily::cyclical;
  if (s == "emergent") return ScenarioFamily::emergent;
  if (s == "event") return ScenarioFamily::event;
  throw ConfigError("unknown scenario family '" + s + "'");
}

/// Daily document count curve of the novel topic. Only the fields of the
/// chosen family are read. `onset_day` is the first pulse start (cyclical),
/// t0 (emergent), or the clamped start of the event window.
struct ScenarioSpec {
  bool operator==(const ScenarioSpec&) const = default;

  int scenario_id = 0;
  ScenarioFamily family = ScenarioFamily::emergent;
  double amplitude = 40.0;
  int onset_day = 50;
  // cyclical
  int period_days = 10;
  int pulse_width_days = 5;
  // emergent, docs/day^2
  double slope = 1.0;
  // event
  double peak_day = 70.0;
  double width_days = 1.0;

  void validate() const {
    if (amplitude < 0.0) throw ConfigError("amplitude must be non-negative");
    if (onset_day < 0) throw ConfigError("onset_day must be non-negative");
    if (family == ScenarioFamily::cyclical && (period_days <= 0 || pulse_width_days <= 0)) {
      throw ConfigError("cyclical scenario needs positive period and pulse width");
    }
    if (family == ScenarioFamily::emergent && !(slope > 0.0)) throw ConfigError("emergent slope must be positive");
    if (family == ScenarioFamily::event && !(width_days > 0.0)) throw ConfigError("event width must be positive");
  }
};

inline int scenario_curve(const ScenarioSpec& spec, int day) {
  if (day < spec.onset_day) return 0;
  switch (spec.family) {
    case ScenarioFamily::cyclical:
      return ((day - spec.onset_day) % spec.period_days) < spec.pulse_width_days
                 ? static_cast<int>(std::lround(spec.amplitude))
                 : 0;
    case ScenarioFamily::emergent:
      return static_cast<int>(std::lround(std::min(spec.amplitude, spec.slope * (day - spec.onset_day))));
    case ScenarioFamily::event: {
      const double dt = day - spec.peak_day;
      if (std::abs(dt) > 3.0 * spec.width_days) return 0;
      return static_cast<int>(std::lround(spec.amplitude * std::exp(-dt * dt / (2.0 * spec.width_days * spec.width_days))));
    }
  }
  return 0;
}

inline ScenarioSpec cyclical_scenario(int id, int horizon, int period) {
  ScenarioSpec s;
  s.scenario_id = id;
  s.family = ScenarioFamily::cyclical;
  s.amplitude = 40.0;
  s.onset_day = horizon / 2;
  s.period_days = period;
  s.pulse_width_days = std::max(1, period / 2);
  return s;
}

inline ScenarioSpec emergent_scenario(int id, int horizon, double slope) {
  ScenarioSpec s;
  s.scenario_id = id;
  s.family = ScenarioFamily::emergent;
  s.amplitude = 40.0;
  s.onset_day = horizon / 2;
  s.slope = slope;
  return s;
}

inline ScenarioSpec event_scenario(int id, int horizon, double width) {
  ScenarioSpec s;
  s.scenario_id = id;
  s.family = ScenarioFamily::event;
  s.amplitude = 50.0;
  s.peak_day = 0.7 * horizon;
  s.width_days = width;
  s.onset_day = std::max(horizon / 2, static_cast<int>(std::ceil(s.peak_day - 3.0 * width)));
  return s;
}

/// The nine default scenarios: 1-3 cyclical (period 10, 20, 30), 4-6 emergent
/// (slope 1, 2, 5), 7-9 event (width 4, 2, 1; scenario 9 is the sharpest).
inline std::vector<ScenarioSpec> default_scenarios(int horizon = 100) {
  return {cyclical_scenario(1, horizon, 10), cyclical_scenario(2, horizon, 20), cyclical_scenario(3, horizon, 30),
          emergent_scenario(4, horizon, 1.0), emergent_scenario(5, horizon, 2.0), emergent_scenario(6, horizon, 5.0),
          event_scenario(7, horizon, 4.0),    event_scenario(8, horizon, 2.0),    event_scenario(9, horizon, 1.0)};
}

/// Terms ranked by probability (ties by ascending id), first `n` of them.
inline std::vector<TermId> top_terms(std::span<const double> probs, std::size_t n) {
  std::vector<TermId> ids(probs.size());
  std::iota(ids.begin(), ids.end(), TermId{0});
  n = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](TermId a, TermId b) { return probs[a] > probs[b] || (probs[a] == probs[b] && a < b); });
  ids.resize(n);
  return ids;
}

inline constexpr std::size_t kGroundTruthWords = 100;

struct SimulationResult {
  LabeledCorpus corpus;
  std::vector<Topic> topics;
  std::optional<CalibrationResult> calibration;
  std::vector<double> normal_kl_to_novel;  // symmetric KL, one per normal topic
  std::uint64_t seed = 0;
};

template <typename Rng>
std::vector<std::vector<TermId>> sample_documents(const Topic& topic, int count, int doc_length, Rng& rng) {
  std::discrete_distribution<TermId> draw(topic.probs.begin(), topic.probs.end());
  std::vector<std::vector<TermId>> docs(static_cast<std::size_t>(count));
  for (auto& d : docs) {
    d.resize(static_cast<std::size_t>(doc_length));
    for (auto& t : d) t = draw(rng);
  }
  return docs;
}

inline std::string simulated_doc_id(int day, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "d%04d-%04d", day, index);
  return buf;
}

/// Mixture-model corpus: every day each normal topic emits a fixed number of
/// documents and the novel topic emits scenario_curve(spec, day) documents.
/// Each document draws doc_length i.i.d. tokens from its single topic.
inline SimulationResult generate_corpus(const SimulatorConfig& config, const ScenarioSpec& spec) {
  config.validate();
  spec.validate();
  std::mt19937_64 rng(config.seed);

  SimulationResult result;
  result.seed = config.seed;
  result.topics = sample_topics(config, rng);
  if (config.target_kl) {
    auto cal = calibrate_divergence(std::move(result.topics), *config.target_kl);
    result.topics = cal.topics;
    cal.topics.clear();
    result.calibration = std::move(cal);
  }
  const auto& novel = result.topics.back();
  for (std::size_t z = 0; z + 1 < result.topics.size(); ++z) {
    result.normal_kl_to_novel.push_back(symmetric_kl(novel.probs, result.topics[z].probs));
  }

  std::vector<std::string> terms;
  terms.reserve(static_cast<std::size_t>(config.vocab_size));
  for (int i = 0; i < config.vocab_size; ++i) terms.push_back(simulated_term(i, config.vocab_size));
  auto& corpus = result.corpus;
  corpus.vocabulary = Vocabulary::from_terms(std::move(terms));

  std::vector<std::discrete_distribution<TermId>> draws;
  draws.reserve(result.topics.size());
  for (const auto& t : result.topics) draws.emplace_back(t.probs.begin(), t.probs.end());

  const int novel_id = config.n_topics - 1;
  GroundTruth truth;
  truth.novel_label = std::to_string(novel_id);
  truth.onset_day = -1;
  auto top = top_terms(novel.probs, kGroundTruthWords);
  std::sort(top.begin(), top.end());
  truth.novel_words = std::move(top);

  for (int day = 0; day < config.horizon_days; ++day) {
    std::vector<int> assignment;
    for (int z = 0; z < novel_id; ++z) {
      assignment.insert(assignment.end(), static_cast<std::size_t>(config.background_docs_per_topic_per_day), z);
    }
    const int novel_count = scenario_curve(spec, day);
    assignment.insert(assignment.end(), static_cast<std::size_t>(novel_count), novel_id);
    if (novel_count > 0 && truth.onset_day < 0) truth.onset_day = day;
    std::shuffle(assignment.begin(), assignment.end(), rng);

    DayBatch batch{day, {}};
    batch.documents.reserve(assignment.size());
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      const int z = assignment[i];
      Document doc;
      doc.id = simulated_doc_id(day, static_cast<int>(i));
      doc.day = day;
      doc.label = std::to_string(z);
      doc.tokens.resize(static_cast<std::size_t>(config.doc_length));
      for (auto& t : doc.tokens) t = draws[static_cast<std::size_t>(z)](rng);
      if (z == novel_id) truth.novel_doc_ids.push_back(doc.id);
      batch.documents.push_back(std::move(doc));
    }
    corpus.batches.push_back(std::move(batch));
  }
  if (truth.onset_day < 0) truth.onset_day = spec.onset_day;
  std::sort(truth.novel_doc_ids.begin(), truth.novel_doc_ids.end());
  corpus.ground_truth = std::move(truth);
  return result;
}

}  // namespace novelty
