// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "novelty/detectors.hpp"
#include "novelty/error.hpp"
#include "novelty/evaluation.hpp"
#include "novelty/simulator.hpp"

namespace novelty {

using ConfigTree = boost::property_tree::ptree;

/// Parameter sweep: every listed path is set to each value in turn.
struct SweepSpec {
  std::string name;
  std::vector<std::string> parameters;
  std::vector<std::string> values;
};

struct ExperimentConfig {
  SimulatorConfig simulator;
  std::vector<ScenarioSpec> scenarios;
  std::vector<std::string> detectors;
  DetectorSuiteConfig detector_config;
  std::vector<std::uint64_t> seeds{1};
  EvalOptions evaluation;
  std::optional<SweepSpec> sweep;
  std::string output_dir = "results";
  int jobs = 1;
  bool write_curves = true;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if constexpr (std::is_same_v<T, bool>) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + s + "'");
  } else if constexpr (std::is_same_v<T, std::string>) {
    return s;
  } else {
    T value{};
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (s.empty() || ec != std::errc{} || ptr != last) {
      throw ConfigError(key + ": cannot parse '" + s + "' as a number");
    }
    return value;
  }
}

// Known keys per section. Scenario sections are named "scenario<N>".
inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"experiment", {"scenarios", "detectors", "seeds", "output_dir", "jobs", "curves"}},
      {"simulator",
       {"vocab_size", "n_topics", "doc_length", "horizon_days", "background_docs_per_topic_per_day", "alpha",
        "target_kl"}},
      {"evaluation", {"window", "vacuous_precision"}},
      {"tfidf", {"k", "window_days", "doc_threshold", "M"}},
      {"bs", {"aggregation", "z_threshold", "doc_threshold", "M"}},
      {"df", {"ratio_threshold", "jaccard_threshold", "k", "doc_threshold", "min_cluster_size", "M"}},
      {"olda",
       {"K", "decay", "gibbs_sweeps", "js_threshold", "doc_threshold", "doc_alpha", "word_beta",
        "snapshot_window_days", "snapshot_gap_days", "warmup_days", "M", "seed"}},
      {"topicsketch",
       {"fast_halflife", "slow_halflife", "c", "warmup_days", "min_alert_terms", "baseline_days", "fade_ratio",
        "doc_threshold", "topic_lift", "min_topic_count", "M", "sketch", "sketch_depth", "sketch_width",
        "sketch_seed"}},
      {"sweep", {"parameter", "values"}},
  };
  return schema;
}

inline const std::set<std::string>& scenario_keys() {
  static const std::set<std::string> keys{"family",    "amplitude", "onset_day",  "period_days",
                                          "pulse_width_days", "slope", "peak_day", "width_days"};
  return keys;
}

inline std::optional<int> scenario_section_id(const std::string& section) {
  constexpr std::string_view prefix = "scenario";
  if (!section.starts_with(prefix) || section.size() == prefix.size()) return std::nullopt;
  int id = 0;
  const auto* first = section.data() + prefix.size();
  const auto* last = section.data() + section.size();
  const auto [ptr, ec] = std::from_chars(first, last, id);
  if (ec != std::errc{} || ptr != last || id < 1) return std::nullopt;
  return id;
}

inline bool is_known_key(const std::string& section, const std::string& key) {
  if (scenario_section_id(section)) return scenario_keys().count(key) > 0;
  const auto& schema = config_schema();
  auto it = schema.find(section);
  return it != schema.end() && it->second.count(key) > 0;
}

inline void check_schema(const ConfigTree& tree) {
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside of any section");
    if (!scenario_section_id(section) && !config_schema().count(section)) {
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!is_known_key(section, key)) throw ConfigError("unknown config key " + section + "." + key);
    }
  }
}

/// Reads section.key into `out` when present.
template <typename T>
void read(const ConfigTree& tree, const std::string& section, const std::string& key, T& out) {
  auto sec = tree.get_child_optional(section);
  if (!sec) return;
  auto value = sec->get_optional<std::string>(boost::property_tree::ptree::path_type(key, '\0'));
  if (value) out = parse_value<T>(section + "." + key, *value);
}

inline ScenarioSpec resolve_scenario(const ConfigTree& tree, int id, int horizon) {
  const std::string section = "scenario" + std::to_string(id);
  const auto sec = tree.get_child_optional(section);
  ScenarioSpec spec;
  const auto defaults = default_scenarios(horizon);
  if (id >= 1 && id <= static_cast<int>(defaults.size())) {
    spec = defaults[static_cast<std::size_t>(id - 1)];
  } else if (!sec || !sec->get_child_optional("family")) {
    throw ConfigError("scenario " + std::to_string(id) + " is not built in and has no [" + section + "] family");
  }
  if (!sec) return spec;

  std::string family = to_string(spec.family);
  read(tree, section, "family", family);
  const auto fam = parse_family(family);
  if (fam != spec.family || !(id >= 1 && id <= static_cast<int>(defaults.size()))) {
    switch (fam) {
      case ScenarioFamily::cyclical: spec = cyclical_scenario(id, horizon, 10); break;
      case ScenarioFamily::emergent: spec = emergent_scenario(id, horizon, 1.0); break;
      case ScenarioFamily::event: spec = event_scenario(id, horizon, 1.0); break;
    }
  }
  const bool explicit_onset = sec->get_child_optional("onset_day").has_value();
  const bool explicit_width = sec->get_child_optional("pulse_width_days").has_value();
  read(tree, section, "amplitude", spec.amplitude);
  read(tree, section, "onset_day", spec.onset_day);
  read(tree, section, "period_days", spec.period_days);
  read(tree, section, "pulse_width_days", spec.pulse_width_days);
  read(tree, section, "slope", spec.slope);
  read(tree, section, "peak_day", spec.peak_day);
  read(tree, section, "width_days", spec.width_days);
  if (spec.family == ScenarioFamily::cyclical && !explicit_width) spec.pulse_width_days = std::max(1, spec.period_days / 2);
  if (spec.family == ScenarioFamily::event && !explicit_onset) {
    spec.onset_day = std::max(horizon / 2, static_cast<int>(std::ceil(spec.peak_day - 3.0 * spec.width_days)));
  }
  spec.validate();
  return spec;
}

}  // namespace detail

inline ConfigTree load_config_tree(std::istream& in) {
  ConfigTree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return tree;
}

inline ConfigTree load_config_tree(const std::filesystem::path& path) {
  ConfigTree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return tree;
}

/// Builds a validated experiment from a config tree; absent keys keep their
/// defaults, unknown sections or keys are errors.
inline ExperimentConfig parse_experiment(const ConfigTree& tree) {
  using detail::read;
  detail::check_schema(tree);
  ExperimentConfig cfg;

  auto& sim = cfg.simulator;
  read(tree, "simulator", "vocab_size", sim.vocab_size);
  read(tree, "simulator", "n_topics", sim.n_topics);
  read(tree, "simulator", "doc_length", sim.doc_length);
  read(tree, "simulator", "horizon_days", sim.horizon_days);
  read(tree, "simulator", "background_docs_per_topic_per_day", sim.background_docs_per_topic_per_day);
  read(tree, "simulator", "alpha", sim.alpha);
  std::string kl;
  read(tree, "simulator", "target_kl", kl);
  if (!kl.empty() && kl != "none") sim.target_kl = detail::parse_value<double>("simulator.target_kl", kl);
  sim.validate();

  std::string scenarios = "all9";
  read(tree, "experiment", "scenarios", scenarios);
  std::vector<int> ids;
  if (scenarios == "all9" || scenarios == "all") {
    for (int i = 1; i <= 9; ++i) ids.push_back(i);
  } else {
    for (const auto& s : detail::split_list(scenarios)) ids.push_back(detail::parse_value<int>("experiment.scenarios", s));
  }
  if (ids.empty()) throw ConfigError("experiment.scenarios is empty");
  for (int id : ids) cfg.scenarios.push_back(detail::resolve_scenario(tree, id, sim.horizon_days));

  std::string detectors = "tfidf,bs,df,olda,topicsketch";
  read(tree, "experiment", "detectors", detectors);
  cfg.detectors = detail::split_list(detectors);
  if (cfg.detectors.empty()) throw ConfigError("experiment.detectors is empty");
  for (const auto& d : cfg.detectors) {
    const auto& known = detector_names();
    if (std::find(known.begin(), known.end(), d) == known.end()) throw ConfigError("unknown detector '" + d + "'");
  }

  std::string seeds = "1";
  read(tree, "experiment", "seeds", seeds);
  cfg.seeds.clear();
  for (const auto& s : detail::split_list(seeds)) cfg.seeds.push_back(detail::parse_value<std::uint64_t>("experiment.seeds", s));
  if (cfg.seeds.empty()) throw ConfigError("experiment.seeds is empty");
  read(tree, "experiment", "output_dir", cfg.output_dir);
  read(tree, "experiment", "jobs", cfg.jobs);
  if (cfg.jobs < 1) throw ConfigError("experiment.jobs must be at least 1");
  read(tree, "experiment", "curves", cfg.write_curves);

  std::string window = "post_onset";
  read(tree, "evaluation", "window", window);
  if (window == "post_onset") {
    cfg.evaluation.post_onset_only = true;
  } else if (window == "whole_run") {
    cfg.evaluation.post_onset_only = false;
  } else {
    throw ConfigError("evaluation.window must be post_onset or whole_run");
  }
  read(tree, "evaluation", "vacuous_precision", cfg.evaluation.vacuous_precision);

  auto& dc = cfg.detector_config;
  read(tree, "tfidf", "k", dc.tfidf.k);
  read(tree, "tfidf", "window_days", dc.tfidf.window_days);
  read(tree, "tfidf", "doc_threshold", dc.tfidf.doc_threshold);
  read(tree, "tfidf", "M", dc.tfidf.max_flagged_words);
  dc.tfidf.validate();

  std::string aggregation = to_string(dc.bs.aggregation);
  read(tree, "bs", "aggregation", aggregation);
  dc.bs.aggregation = parse_aggregation(aggregation);
  read(tree, "bs", "z_threshold", dc.bs.z_threshold);
  read(tree, "bs", "doc_threshold", dc.bs.doc_threshold);
  read(tree, "bs", "M", dc.bs.max_flagged_words);
  dc.bs.validate();

  read(tree, "df", "ratio_threshold", dc.df.ratio_threshold);
  read(tree, "df", "jaccard_threshold", dc.df.jaccard_threshold);
  read(tree, "df", "k", dc.df.k);
  read(tree, "df", "doc_threshold", dc.df.doc_threshold);
  read(tree, "df", "min_cluster_size", dc.df.min_cluster_size);
  read(tree, "df", "M", dc.df.max_flagged_words);
  dc.df.validate();

  read(tree, "olda", "K", dc.olda.n_topics);
  read(tree, "olda", "decay", dc.olda.decay);
  read(tree, "olda", "gibbs_sweeps", dc.olda.gibbs_sweeps);
  read(tree, "olda", "js_threshold", dc.olda.js_threshold);
  read(tree, "olda", "doc_threshold", dc.olda.doc_threshold);
  read(tree, "olda", "doc_alpha", dc.olda.doc_alpha);
  read(tree, "olda", "word_beta", dc.olda.word_beta);
  read(tree, "olda", "snapshot_window_days", dc.olda.snapshot_window_days);
  read(tree, "olda", "snapshot_gap_days", dc.olda.snapshot_gap_days);
  read(tree, "olda", "warmup_days", dc.olda.warmup_days);
  read(tree, "olda", "M", dc.olda.max_flagged_words);
  read(tree, "olda", "seed", dc.olda.seed);
  dc.olda.validate(static_cast<std::size_t>(sim.vocab_size));

  auto& ts = dc.topicsketch;
  read(tree, "topicsketch", "fast_halflife", ts.fast_halflife);
  read(tree, "topicsketch", "slow_halflife", ts.slow_halflife);
  read(tree, "topicsketch", "c", ts.alert_sigmas);
  read(tree, "topicsketch", "warmup_days", ts.warmup_days);
  read(tree, "topicsketch", "min_alert_terms", ts.min_alert_terms);
  read(tree, "topicsketch", "baseline_days", ts.baseline_days);
  read(tree, "topicsketch", "fade_ratio", ts.fade_ratio);
  read(tree, "topicsketch", "doc_threshold", ts.doc_threshold);
  read(tree, "topicsketch", "topic_lift", ts.topic_lift);
  read(tree, "topicsketch", "min_topic_count", ts.min_topic_count);
  read(tree, "topicsketch", "M", ts.max_flagged_words);
  read(tree, "topicsketch", "sketch", ts.sketch.enabled);
  read(tree, "topicsketch", "sketch_depth", ts.sketch.depth);
  read(tree, "topicsketch", "sketch_width", ts.sketch.width);
  read(tree, "topicsketch", "sketch_seed", ts.sketch.seed);
  ts.validate();

  if (auto sweep = tree.get_child_optional("sweep")) {
    SweepSpec s;
    s.name = "custom";
    std::string parameter, values;
    read(tree, "sweep", "parameter", parameter);
    read(tree, "sweep", "values", values);
    s.parameters = detail::split_list(parameter);
    s.values = detail::split_list(values);
    if (s.parameters.empty() || s.values.empty()) throw ConfigError("[sweep] needs parameter and values");
    cfg.sweep = std::move(s);
  }
  return cfg;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return parse_experiment(load_config_tree(path));
}

/// Sets "section.key" in the tree; the key must be part of the schema.
inline void set_parameter(ConfigTree& tree, const std::string& path, const std::string& value) {
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    throw ConfigError("sweep parameter '" + path + "' is not of the form section.key");
  }
  const std::string section = path.substr(0, dot);
  const std::string key = path.substr(dot + 1);
  if (!detail::is_known_key(section, key)) throw ConfigError("sweep parameter '" + path + "' is not a config key");
  auto sec = tree.get_child_optional(section);
  if (!sec) sec = tree.put_child(section, ConfigTree{});
  sec->put(boost::property_tree::ptree::path_type(key, '\0'), value);
}

/// The experiment for one sweep value.
inline ExperimentConfig with_sweep_value(const ConfigTree& tree, const SweepSpec& sweep, const std::string& value) {
  ConfigTree copy = tree;
  copy.erase("sweep");
  for (const auto& p : sweep.parameters) set_parameter(copy, p, value);
  return parse_experiment(copy);
}

/// Built-in sweeps. The tree is amended with the preset's default scenario
/// and detectors unless the config already names them.
inline SweepSpec sweep_preset(const std::string& name, ConfigTree& tree) {
  SweepSpec s;
  s.name = name;
  std::string detectors;
  if (name == "kl") {
    s.parameters = {"simulator.target_kl"};
    s.values = {"0.01", "0.05", "0.1", "0.5", "0.9", "0.99"};
  } else if (name == "k") {
    s.parameters = {"tfidf.k", "df.k"};
    s.values = {"1", "5", "10"};
  } else if (name == "slope") {
    s.parameters = {"scenario5.slope"};
    s.values = {"0.5", "1", "2", "5", "10"};
    detectors = "olda,topicsketch";
  } else {
    throw ConfigError("unknown sweep preset '" + name + "' (expected kl, k or slope)");
  }
  if (!tree.get_optional<std::string>("experiment.scenarios")) tree.put("experiment.scenarios", "5");
  if (!detectors.empty() && !tree.get_optional<std::string>("experiment.detectors")) {
    tree.put("experiment.detectors", detectors);
  }
  return s;
}

}  // namespace novelty
