// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <string_view>
#include <map>
#include <optional>
#include <vector>

#include "novelty/corpus.hpp"
#include "novelty/detectors/report.hpp"

namespace novelty {

struct SketchConfig {
  bool operator==(const SketchConfig&) const = default;

  bool enabled = false;
  int depth = 4;
  int width = 1 << 14;
  std::uint64_t seed = 17;
};

struct TopicSketchConfig {
  bool operator==(const TopicSketchConfig&) const = default;

  double fast_halflife = 1.0;  // days
  double slow_halflife = 7.0;
  double alert_sigmas = 3.0;   // c
  int warmup_days = 7;
  int min_alert_terms = 5;     // co-accelerating terms needed to raise a day alert
  int baseline_days = 7;       // quiet warm days needed before the alerting-term count is judged
  double fade_ratio = 0.05;    // tracked term dropped once its fast rate falls below this share of its peak (~4 fast halflives)
  double doc_threshold = 0.1;  // share of a document's tokens that are tracked terms
  double topic_lift = 5.0;     // burst-document rate over stream rate for a term to join the topic
  double min_topic_count = 3.0;
  SketchConfig sketch;
  int max_flagged_words = 100;

  void validate() const {
    if (!(fast_halflife > 0.0) || !(slow_halflife > fast_halflife)) {
      throw ConfigError("topicsketch halflives must satisfy 0 < fast < slow");
    }
    if (!(alert_sigmas > 0.0)) throw ConfigError("topicsketch.c must be positive");
    if (warmup_days < 0) throw ConfigError("topicsketch.warmup_days must be non-negative");
    if (min_alert_terms < 1) throw ConfigError("topicsketch.min_alert_terms must be at least 1");
    if (baseline_days < 2) throw ConfigError("topicsketch.baseline_days must be at least 2");
    if (!(fade_ratio >= 0.0 && fade_ratio < 1.0)) throw ConfigError("topicsketch.fade_ratio must be in [0, 1)");
    if (sketch.enabled && (sketch.depth < 1 || sketch.width < 1)) throw ConfigError("sketch depth and width must be positive");
    if (!(doc_threshold > 0.0 && doc_threshold <= 1.0)) throw ConfigError("topicsketch.doc_threshold must be in (0, 1]");
    if (!(topic_lift > 1.0)) throw ConfigError("topicsketch.topic_lift must exceed 1");
    if (min_topic_count < 0.0) throw ConfigError("topicsketch.min_topic_count must be non-negative");
    if (max_flagged_words < 0) throw ConfigError("topicsketch.M must be non-negative");
  }
};

inline double halflife_decay(double halflife) { return std::exp2(-1.0 / halflife); }

/// Sum of squared coefficients of the linear filter mapping the daily rate
/// series x_t to acceleration a_t = v_t - v_{t-1}, v_t = EWMA_fast - EWMA_slow.
/// For independent daily noise of variance s^2, var(a) = gain * s^2.
inline double acceleration_noise_gain(double fast_decay, double slow_decay) {
  double gain = 0.0;
  double prev_h = 0.0;
  double pf = 1.0;
  double ps = 1.0;
  for (int j = 0; j < 2000; ++j) {
    const double h = (1.0 - fast_decay) * pf - (1.0 - slow_decay) * ps;
    gain += (h - prev_h) * (h - prev_h);
    prev_h = h;
    pf *= fast_decay;
    ps *= slow_decay;
  }
  return gain;
}

/// Signed count sketch over exponentially decayed rates; a term's estimate is
/// the median of its h signed buckets.
class DecayedCountSketch {
 public:
  DecayedCountSketch(int depth, int width, std::uint64_t seed)
      : depth_(static_cast<std::size_t>(depth)), width_(static_cast<std::size_t>(width)), cells_(depth_ * width_, 0.0) {
    std::mt19937_64 rng(seed);
    for (std::size_t r = 0; r < depth_; ++r) {
      salts_.push_back(rng() | 1U);
      sign_salts_.push_back(rng() | 1U);
    }
  }

  void decay(double d) {
    for (auto& c : cells_) c *= d;
  }

  void add(TermId term, double value) {
    for (std::size_t r = 0; r < depth_; ++r) cells_[r * width_ + bucket(r, term)] += sign(r, term) * value;
  }

  double estimate(TermId term) const {
    std::vector<double> v(depth_);
    for (std::size_t r = 0; r < depth_; ++r) v[r] = sign(r, term) * cells_[r * width_ + bucket(r, term)];
    std::sort(v.begin(), v.end());
    const std::size_t mid = depth_ / 2;
    return depth_ % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
  }
  std::size_t bucket(std::size_t row, TermId t) const { return mix(salts_[row] * (t + 1ULL)) % width_; }
  double sign(std::size_t row, TermId t) const { return (mix(sign_salts_[row] ^ (t * 0x9e3779b97f4a7c15ULL)) & 1U) ? 1.0 : -1.0; }

  std::size_t depth_;
  std::size_t width_;
  std::vector<double> cells_;
  std::vector<std::uint64_t> salts_;
  std::vector<std::uint64_t> sign_salts_;
};

/// Speed and acceleration monitor over daily term frequencies. Each term's
/// relative frequency feeds a fast and a slow exponentially weighted average;
/// velocity is their difference and acceleration its day-over-day change.
/// Terms accelerating beyond c noise scales are alerting. A day alert needs
/// enough of them at once, and more than c standard deviations above the
/// count seen on quiet days (some terms always cross by chance). Alerted terms are tracked until their fast rate
/// fades, and remain flagged while tracked.
class TopicSketchDetector final : public Detector {
 public:
  TopicSketchDetector(TopicSketchConfig config, std::size_t vocab_size)
      : config_(config),
        vocab_size_(vocab_size),
        fast_decay_(halflife_decay(config.fast_halflife)),
        slow_decay_(halflife_decay(config.slow_halflife)),
        noise_gain_(acceleration_noise_gain(fast_decay_, slow_decay_)),
        r_fast_(vocab_size, 0.0),
        r_slow_(vocab_size, 0.0),
        velocity_(vocab_size, 0.0),
        accel_(vocab_size, 0.0),
        strength_(vocab_size, 0.0),
        welford_n_(vocab_size, 0),
        welford_mean_(vocab_size, 0.0),
        welford_m2_(vocab_size, 0.0),
        seen_(vocab_size, 0) {
    config_.validate();
    if (config_.sketch.enabled) {
      fast_sketch_.emplace(config_.sketch.depth, config_.sketch.width, config_.sketch.seed);
      slow_sketch_.emplace(config_.sketch.depth, config_.sketch.width, config_.sketch.seed);
    }
  }

  std::string_view name() const override { return "topicsketch"; }

  double rate_fast(TermId t) const { return r_fast_[t]; }
  double rate_slow(TermId t) const { return r_slow_[t]; }
  double velocity(TermId t) const { return velocity_[t]; }
  double acceleration(TermId t) const { return accel_[t]; }
  double strength(TermId t) const { return strength_[t]; }

  /// Sample standard deviation of the accelerations recorded so far.
  double accel_stddev(TermId t) const {
    return welford_n_[t] > 1 ? std::sqrt(welford_m2_[t] / static_cast<double>(welford_n_[t] - 1)) : 0.0;
  }

  double noise_gain() const noexcept { return noise_gain_; }

  std::vector<TermId> tracked_terms() const {
    std::vector<TermId> out;
    for (const auto& [t, peak] : tracked_) out.push_back(t);
    std::sort(out.begin(), out.end());
    return out;
  }

 protected:
  DayReport observe_day(const DayBatch& batch) override {
    DayReport report;
    std::vector<double> tf(vocab_size_, 0.0);
    double n_tokens = 0.0;
    for (const auto& doc : batch.documents) {
      for (TermId t : doc.tokens) {
        tf[t] += 1.0;
        seen_[t] = 1;
      }
      n_tokens += static_cast<double>(doc.tokens.size());
    }
    const bool first_day = days_seen() == 0;
    const bool warm = days_seen() >= config_.warmup_days;

    if (fast_sketch_) {
      fast_sketch_->decay(fast_decay_);
      slow_sketch_->decay(slow_decay_);
      if (n_tokens > 0.0) {
        // the first day seeds the averages with the observed rate
        const double fast_gain = first_day ? 1.0 : 1.0 - fast_decay_;
        const double slow_gain = first_day ? 1.0 : 1.0 - slow_decay_;
        for (TermId t = 0; t < vocab_size_; ++t) {
          if (tf[t] == 0.0) continue;
          fast_sketch_->add(t, fast_gain * (tf[t] / n_tokens));
          slow_sketch_->add(t, slow_gain * (tf[t] / n_tokens));
        }
      }
    }

    std::vector<TermId> alerting;
    for (TermId t = 0; t < vocab_size_; ++t) {
      if (!seen_[t]) continue;
      const double x = n_tokens > 0.0 ? tf[t] / n_tokens : 0.0;
      const double hist_rate = r_slow_[t];
      if (fast_sketch_) {
        r_fast_[t] = fast_sketch_->estimate(t);
        r_slow_[t] = slow_sketch_->estimate(t);
      } else if (first_day) {
        r_fast_[t] = x;
        r_slow_[t] = x;
      } else {
        r_fast_[t] = fast_decay_ * r_fast_[t] + (1.0 - fast_decay_) * x;
        r_slow_[t] = slow_decay_ * r_slow_[t] + (1.0 - slow_decay_) * x;
      }
      const double v = r_fast_[t] - r_slow_[t];
      const double a = first_day ? 0.0 : v - velocity_[t];
      velocity_[t] = v;
      accel_[t] = a;

      const double sigma = std::max(accel_stddev(t), noise_floor(hist_rate, n_tokens));
      strength_[t] = sigma > 0.0 ? a / sigma : 0.0;
      if (warm && n_tokens > 0.0 && a > config_.alert_sigmas * sigma) alerting.push_back(t);

      // Welford update with today's acceleration
      welford_n_[t] += 1;
      const double delta = a - welford_mean_[t];
      welford_mean_[t] += delta / static_cast<double>(welford_n_[t]);
      welford_m2_[t] += delta * (a - welford_mean_[t]);
    }

    const double n_alerting = static_cast<double>(alerting.size());
    bool day_alert = false;
    if (warm && n_tokens > 0.0) {
      const double sd = quiet_n_ > 1 ? std::sqrt(quiet_m2_ / static_cast<double>(quiet_n_ - 1)) : 0.0;
      day_alert = quiet_n_ >= config_.baseline_days && static_cast<int>(alerting.size()) >= config_.min_alert_terms &&
                  n_alerting > quiet_mean_ + config_.alert_sigmas * std::max(sd, std::sqrt(quiet_mean_));
      if (!day_alert) {
        ++quiet_n_;
        const double delta = n_alerting - quiet_mean_;
        quiet_mean_ += delta / static_cast<double>(quiet_n_);
        quiet_m2_ += delta * (n_alerting - quiet_mean_);
      }
    }

    if (day_alert) {
      Alert alert;
      alert.trigger_terms = alerting;
      double s = 0.0;
      for (TermId t : alerting) {
        s += strength_[t];
        auto& peak = tracked_[t];
        peak = std::max(peak, r_fast_[t]);
      }
      alert.strength = s / static_cast<double>(alerting.size());
      report.alerts.push_back(std::move(alert));
    } else {
      alerting.clear();
    }

    // Tracked bursts fade once the fast rate drops well below its peak.
    for (auto it = tracked_.begin(); it != tracked_.end();) {
      it->second = std::max(it->second, r_fast_[it->first]);
      if (r_fast_[it->first] < config_.fade_ratio * it->second) {
        it = tracked_.erase(it);
      } else {
        ++it;
      }
    }

    std::vector<char> tracked_term(vocab_size_, 0);
    for (const auto& [t, peak] : tracked_) tracked_term[t] = 1;

    std::vector<ScoredDoc> flagged_docs;
    std::vector<double> topic_tf(vocab_size_, 0.0);
    double topic_tokens = 0.0;
    for (const auto& doc : batch.documents) {
      double pos = 0.0;
      double hits = 0.0;
      for (TermId t : doc.tokens) {
        pos += std::max(0.0, strength_[t]);
        if (tracked_term[t]) hits += 1.0;
      }
      const double len = static_cast<double>(doc.tokens.size());
      report.doc_scores.push_back({doc.id, pos / len});
      if (hits > 0.0 && hits / len >= config_.doc_threshold) {
        flagged_docs.push_back({doc.id, hits / len});
        for (TermId t : doc.tokens) topic_tf[t] += 1.0;
        topic_tokens += len;
      }
    }

    // Words of the bursting topic: tracked terms plus terms much more common
    // in today's burst documents than in the stream as a whole.
    std::vector<ScoredTerm> flagged;
    for (TermId t = 0; t < vocab_size_; ++t) {
      const double share = topic_tokens > 0.0 ? topic_tf[t] / topic_tokens : 0.0;
      const bool lifted = topic_tf[t] >= config_.min_topic_count &&
                          share >= config_.topic_lift * std::max(r_slow_[t], 1.0 / std::max(n_tokens, 1.0));
      if (tracked_term[t] || lifted) flagged.push_back({t, share});
    }
    report.flagged_words = rank_terms(std::move(flagged), static_cast<std::size_t>(config_.max_flagged_words));

    for (TermId t = 0; t < vocab_size_; ++t) {
      if (tf[t] > 0.0) report.word_scores.push_back({t, strength_[t]});
    }

    // Earlier documents responsible for today's alert, within the slow halflife.
    if (!alerting.empty()) {
      std::vector<char> trig(vocab_size_, 0);
      for (TermId t : alerting) trig[t] = 1;
      for (const auto& past : recent_) {
        if (past.day < batch.day - static_cast<int>(std::ceil(config_.slow_halflife))) continue;
        double hits = 0.0;
        for (const auto& [t, c] : past.terms) {
          if (trig[t]) hits += c;
        }
        const double share = hits / static_cast<double>(past.length);
        if (hits > 0.0 && share >= config_.doc_threshold) flagged_docs.push_back({past.id, share});
      }
    }
    report.flagged_docs = rank_docs(std::move(flagged_docs));

    remember(batch);
    return report;
  }

 private:
  /// Poisson noise scale of the acceleration for a term whose historic rate
  /// is `rate` on a day of `n_tokens` tokens (at least one expected token).
  double noise_floor(double rate, double n_tokens) const {
    if (n_tokens <= 0.0) return 0.0;
    const double p = std::max(rate, 1.0 / n_tokens);
    return std::sqrt(noise_gain_ * p / n_tokens);
  }

  struct PastDoc {
    std::string id;
    int day;
    std::size_t length;
    SparseCounts terms;
  };

  void remember(const DayBatch& batch) {
    const int keep = static_cast<int>(std::ceil(config_.slow_halflife));
    for (const auto& doc : batch.documents) {
      recent_.push_back(PastDoc{doc.id, doc.day, doc.tokens.size(), count_terms(doc.tokens)});
    }
    while (!recent_.empty() && recent_.front().day <= batch.day - keep) recent_.pop_front();
  }

  TopicSketchConfig config_;
  std::size_t vocab_size_;
  double fast_decay_;
  double slow_decay_;
  double noise_gain_;
  std::vector<double> r_fast_;
  std::vector<double> r_slow_;
  std::vector<double> velocity_;
  std::vector<double> accel_;
  std::vector<double> strength_;
  std::vector<std::uint32_t> welford_n_;
  std::vector<double> welford_mean_;
  std::vector<double> welford_m2_;
  std::vector<char> seen_;
  std::optional<DecayedCountSketch> fast_sketch_;
  std::optional<DecayedCountSketch> slow_sketch_;
  std::map<TermId, double> tracked_;  // term -> peak fast rate
  int quiet_n_ = 0;                   // alerting-term counts on days without an alert
  double quiet_mean_ = 0.0;
  double quiet_m2_ = 0.0;
  std::deque<PastDoc> recent_;
};

}  // namespace novelty
