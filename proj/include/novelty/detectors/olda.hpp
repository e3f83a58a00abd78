// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "novelty/corpus.hpp"
#include "novelty/detectors/report.hpp"

namespace novelty {

struct OldaConfig {
  bool operator==(const OldaConfig&) const = default;

  int n_topics = 15;
  double decay = 0.8;  // omega
  int gibbs_sweeps = 20;
  double js_threshold = 0.1;
  double doc_threshold = 0.5;
  double doc_alpha = 0.1;
  double word_beta = 0.01;
  int snapshot_window_days = 0;  // 0 compares against every previous day
  int warmup_days = 14;          // no detection before topics settle
  int snapshot_gap_days = 7;     // snapshots younger than this are skipped: topics drift slowly
  int max_flagged_words = 100;
  std::uint64_t seed = 7;

  void validate(std::size_t vocab_size) const {
    if (n_topics < 2) throw ConfigError("olda.K must be at least 2");
    if (static_cast<std::size_t>(n_topics) > vocab_size) throw ConfigError("olda.K exceeds the vocabulary size");
    if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("olda.decay must be in (0, 1]");
    if (gibbs_sweeps < 1) throw ConfigError("olda.gibbs_sweeps must be at least 1");
    if (!(js_threshold > 0.0)) throw ConfigError("olda.js_threshold must be positive");
    if (!(doc_threshold > 0.0)) throw ConfigError("olda.doc_threshold must be positive");
    if (!(doc_alpha > 0.0) || !(word_beta > 0.0)) throw ConfigError("olda priors must be positive");
    if (snapshot_window_days < 0) throw ConfigError("olda.snapshot_window_days must be non-negative");
    if (warmup_days < 0) throw ConfigError("olda.warmup_days must be non-negative");
    if (snapshot_gap_days < 1) throw ConfigError("olda.snapshot_gap_days must be at least 1");
    if (snapshot_window_days > 0 && snapshot_window_days < snapshot_gap_days) {
      throw ConfigError("olda.snapshot_window_days must not be shorter than olda.snapshot_gap_days");
    }
    if (max_flagged_words < 0) throw ConfigError("olda.M must be non-negative");
  }

  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (js_threshold >= std::numbers::ln2) {
      w.push_back("olda.js_threshold >= ln 2: the JS divergence never exceeds ln 2, detection is impossible");
    }
    return w;
  }
};

namespace detail {

/// Per-coordinate Jensen-Shannon term; JS(P, Q) = sum over w of js_term(p_w, q_w).
inline double js_term(double p, double q) {
  const double m = p + q;
  double s = 0.0;
  if (p > 0.0) s += p * std::log(2.0 * p / m);
  if (q > 0.0) s += q * std::log(2.0 * q / m);
  return 0.5 * s;
}

}  // namespace detail

/// A topic-word distribution frozen at the end of a day. Entries carry the
/// terms with non-zero counts, sorted by descending probability; every other
/// term has probability `floor`.
struct TopicSnapshot {
  int day = 0;
  int topic = 0;
  double floor = 0.0;
  std::vector<std::pair<TermId, double>> entries;
};

struct OldaDetection {
  int topic = 0;
  double js = 0.0;  // min JS against all earlier snapshots
};

/// Online LDA: each day runs collapsed Gibbs sampling over the day's tokens
/// with the previous word-topic counts, decayed by omega, acting as the prior.
/// A topic whose minimum Jensen-Shannon divergence to every snapshot of the
/// previous days exceeds the threshold is reported as novel.
class OldaDetector final : public Detector {
 public:
  OldaDetector(OldaConfig config, std::size_t vocab_size)
      : config_(config),
        vocab_size_(vocab_size),
        k_(static_cast<std::size_t>(config.n_topics)),
        word_topic_(vocab_size * k_, 0.0),
        topic_total_(k_, 0.0),
        rng_(config.seed),
        stamp_(vocab_size, 0) {
    config_.validate(vocab_size);
  }

  std::string_view name() const override { return "olda"; }

  std::size_t topics() const noexcept { return k_; }

  /// phi_k(w) = (n_kw + beta) / (n_k + V beta)
  std::vector<double> topic_distribution(std::size_t k) const {
    std::vector<double> phi(vocab_size_);
    const double denom = topic_total_[k] + static_cast<double>(vocab_size_) * config_.word_beta;
    for (std::size_t w = 0; w < vocab_size_; ++w) phi[w] = (word_topic_[w * k_ + k] + config_.word_beta) / denom;
    return phi;
  }

  double topic_mass(std::size_t k) const { return topic_total_[k]; }

  const std::optional<OldaDetection>& last_detection() const noexcept { return detection_; }
  const std::vector<double>& last_min_js() const noexcept { return min_js_; }
  const std::vector<TopicSnapshot>& snapshots() const noexcept { return snapshots_; }

  /// Topic proportions of the documents of the last observed day.
  const std::vector<std::vector<double>>& last_doc_topics() const noexcept { return doc_topics_; }

 protected:
  DayReport observe_day(const DayBatch& batch) override {
    DayReport report;
    detection_.reset();
    decay_counts();
    gibbs(batch);

    std::vector<std::vector<double>> phi(k_);
    for (std::size_t k = 0; k < k_; ++k) phi[k] = topic_distribution(k);

    min_js_.assign(k_, 0.0);
    const bool warm = days_seen() >= config_.warmup_days && !snapshots_.empty() &&
                      snapshots_.front().day <= batch.day - config_.snapshot_gap_days;
    if (warm) {
      for (std::size_t k = 0; k < k_; ++k) min_js_[k] = min_js_to_history(k, phi[k], batch.day);
      std::size_t best = 0;
      for (std::size_t k = 1; k < k_; ++k) {
        if (min_js_[k] > min_js_[best]) best = k;
      }
      if (min_js_[best] > config_.js_threshold) {
        detection_ = OldaDetection{static_cast<int>(best), min_js_[best]};
      }
    }

    // word scores: novelty-weighted topic probability of today's terms
    std::vector<char> seen(vocab_size_, 0);
    for (const auto& doc : batch.documents) {
      for (TermId t : doc.tokens) seen[t] = 1;
    }
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      if (!seen[w]) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < k_; ++k) s += min_js_[k] * phi[k][w];
      report.word_scores.push_back({static_cast<TermId>(w), s});
    }

    std::vector<ScoredDoc> flagged;
    for (std::size_t d = 0; d < batch.documents.size(); ++d) {
      double s = 0.0;
      for (std::size_t k = 0; k < k_; ++k) s += doc_topics_[d][k] * min_js_[k];
      report.doc_scores.push_back({batch.documents[d].id, s});
      if (detection_) {
        const double share = doc_topics_[d][static_cast<std::size_t>(detection_->topic)];
        if (share > config_.doc_threshold) flagged.push_back({batch.documents[d].id, share});
      }
    }
    report.flagged_docs = rank_docs(std::move(flagged));

    // One alert per detection episode: a topic detected on consecutive days
    // alerts on the first.
    const std::optional<int> topic = detection_ ? std::optional<int>(detection_->topic) : std::nullopt;
    const bool new_episode = topic && topic != previous_topic_;
    previous_topic_ = topic;
    if (detection_) {
      const auto& p = phi[static_cast<std::size_t>(detection_->topic)];
      std::vector<ScoredTerm> words;
      words.reserve(vocab_size_);
      for (std::size_t w = 0; w < vocab_size_; ++w) words.push_back({static_cast<TermId>(w), p[w]});
      report.flagged_words = rank_terms(std::move(words), static_cast<std::size_t>(config_.max_flagged_words));
      Alert a;
      a.trigger_terms = report.flagged_words;
      std::sort(a.trigger_terms.begin(), a.trigger_terms.end());
      a.strength = detection_->js;
      if (new_episode) report.alerts.push_back(std::move(a));
    }

    take_snapshots(phi, batch.day);
    return report;
  }

 private:
  void decay_counts() {
    if (config_.decay == 1.0) return;
    std::fill(topic_total_.begin(), topic_total_.end(), 0.0);
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      for (std::size_t k = 0; k < k_; ++k) {
        double& c = word_topic_[w * k_ + k];
        c *= config_.decay;
        if (c < kPruneCount) c = 0.0;
        topic_total_[k] += c;
      }
    }
  }

  void gibbs(const DayBatch& batch) {
    const double vbeta = static_cast<double>(vocab_size_) * config_.word_beta;
    const double alpha = config_.doc_alpha;
    const double beta = config_.word_beta;
    const std::size_t n_docs = batch.documents.size();
    std::vector<std::vector<std::uint16_t>> z(n_docs);
    std::vector<std::vector<double>> doc_topic(n_docs, std::vector<double>(k_, 0.0));
    std::vector<double> p(k_);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    auto sample = [&](TermId w, const std::vector<double>& nd) {
      double total = 0.0;
      const double* nw = &word_topic_[static_cast<std::size_t>(w) * k_];
      for (std::size_t k = 0; k < k_; ++k) {
        total += (nd[k] + alpha) * (nw[k] + beta) / (topic_total_[k] + vbeta);
        p[k] = total;
      }
      const double u = unif(rng_) * total;
      std::size_t k = 0;
      while (k + 1 < k_ && p[k] < u) ++k;
      return k;
    };

    // sequential initialisation against the decayed prior
    for (std::size_t d = 0; d < n_docs; ++d) {
      const auto& tokens = batch.documents[d].tokens;
      z[d].resize(tokens.size());
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto k = sample(tokens[i], doc_topic[d]);
        z[d][i] = static_cast<std::uint16_t>(k);
        doc_topic[d][k] += 1.0;
        word_topic_[tokens[i] * k_ + k] += 1.0;
        topic_total_[k] += 1.0;
      }
    }
    for (int sweep = 1; sweep < config_.gibbs_sweeps; ++sweep) {
      for (std::size_t d = 0; d < n_docs; ++d) {
        const auto& tokens = batch.documents[d].tokens;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
          const TermId w = tokens[i];
          std::size_t k = z[d][i];
          doc_topic[d][k] -= 1.0;
          word_topic_[w * k_ + k] -= 1.0;
          topic_total_[k] -= 1.0;
          k = sample(w, doc_topic[d]);
          z[d][i] = static_cast<std::uint16_t>(k);
          doc_topic[d][k] += 1.0;
          word_topic_[w * k_ + k] += 1.0;
          topic_total_[k] += 1.0;
        }
      }
    }

    doc_topics_.assign(n_docs, std::vector<double>(k_, 0.0));
    for (std::size_t d = 0; d < n_docs; ++d) {
      const double len = static_cast<double>(batch.documents[d].tokens.size());
      for (std::size_t k = 0; k < k_; ++k) {
        doc_topics_[d][k] = (doc_topic[d][k] + alpha) / (len + static_cast<double>(k_) * alpha);
      }
    }
  }

  double floor_of(std::size_t k) const {
    return config_.word_beta / (topic_total_[k] + static_cast<double>(vocab_size_) * config_.word_beta);
  }

  /// JS between a live topic (dense phi, its support and floor) and a
  /// snapshot; returns early with a value > bound once the partial sum of the
  /// non-negative terms exceeds it.
  double js_to_snapshot(const std::vector<double>& phi, const std::vector<TermId>& support, double cur_floor,
                        const TopicSnapshot& snap, double bound) {
    ++stamp_gen_;
    double sum = 0.0;
    for (const auto& [w, q] : snap.entries) {
      stamp_[w] = stamp_gen_;
      sum += detail::js_term(phi[w], q);
      if (sum > bound) return sum;
    }
    std::size_t covered = snap.entries.size();
    for (TermId w : support) {
      if (stamp_[w] == stamp_gen_) continue;
      ++covered;
      sum += detail::js_term(phi[w], snap.floor);
      if (sum > bound) return sum;
    }
    sum += static_cast<double>(vocab_size_ - covered) * detail::js_term(cur_floor, snap.floor);
    return std::max(0.0, sum);
  }

  double min_js_to_history(std::size_t k, const std::vector<double>& phi, int day) {
    std::vector<TermId> support;
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      if (word_topic_[w * k_ + k] > 0.0) support.push_back(static_cast<TermId>(w));
    }
    const double cur_floor = floor_of(k);
    const int min_day = config_.snapshot_window_days > 0 ? day - config_.snapshot_window_days
                                                          : std::numeric_limits<int>::min();
    const int max_day = day - config_.snapshot_gap_days;
    double best = std::numeric_limits<double>::infinity();
    // Most recent eligible snapshot of the same topic first: usually the
    // closest, which makes the early-abort bound tight for all others.
    for (auto it = snapshots_.rbegin(); it != snapshots_.rend(); ++it) {
      if (it->day > max_day) continue;
      if (it->topic == static_cast<int>(k)) {
        if (it->day >= min_day) best = js_to_snapshot(phi, support, cur_floor, *it, best);
        break;
      }
    }
    for (auto it = snapshots_.rbegin(); it != snapshots_.rend(); ++it) {
      if (it->day > max_day) continue;
      if (it->day < min_day) break;
      const double js = js_to_snapshot(phi, support, cur_floor, *it, best);
      if (js < best) best = js;
    }
    if (!std::isfinite(best)) return 0.0;
    return std::min(best, std::numbers::ln2);
  }

  void take_snapshots(const std::vector<std::vector<double>>& phi, int day) {
    for (std::size_t k = 0; k < k_; ++k) {
      TopicSnapshot s;
      s.day = day;
      s.topic = static_cast<int>(k);
      s.floor = floor_of(k);
      for (std::size_t w = 0; w < vocab_size_; ++w) {
        if (word_topic_[w * k_ + k] > 0.0) s.entries.emplace_back(static_cast<TermId>(w), phi[k][w]);
      }
      std::sort(s.entries.begin(), s.entries.end(),
                [](const auto& a, const auto& b) { return a.second > b.second || (a.second == b.second && a.first < b.first); });
      snapshots_.push_back(std::move(s));
    }
  }

  // Decayed counts below this are dropped so topic supports stay bounded.
  static constexpr double kPruneCount = 1e-3;

  OldaConfig config_;
  std::size_t vocab_size_;
  std::size_t k_;
  std::vector<double> word_topic_;  // [w * K + k]
  std::vector<double> topic_total_;
  std::mt19937_64 rng_;
  std::vector<TopicSnapshot> snapshots_;
  std::vector<std::vector<double>> doc_topics_;
  std::vector<double> min_js_;
  std::optional<OldaDetection> detection_;
  std::optional<int> previous_topic_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t stamp_gen_ = 0;
};

}  // namespace novelty
