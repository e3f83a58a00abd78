// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "novelty/config.hpp"
#include "novelty/detectors.hpp"
#include "novelty/evaluation.hpp"
#include "novelty/simulator.hpp"

namespace novelty {

struct ResultCell {
  int scenario_id = 0;
  std::string detector;
  std::uint64_t seed = 0;
  std::string sweep_value;  // empty outside sweeps
  bool ok = true;
  std::string error;
  EvalReport report;
  double runtime_seconds = 0.0;

  auto key() const { return std::tie(sweep_value, scenario_id, detector, seed); }
};

/// Post-onset days whose document recall reaches `level`.
inline int days_with_doc_recall(const EvalReport& report, int onset_day, double level = 0.5) {
  int n = 0;
  for (const auto& row : report.per_day) {
    if (row.day >= onset_day && row.docs.recall && *row.docs.recall >= level) ++n;
  }
  return n;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Streams one corpus through one detector and scores the run.
inline EvalReport evaluate_detector(const std::string& name, const DetectorSuiteConfig& config, const LabeledCorpus& corpus,
                                    const EvalOptions& options, std::vector<DayReport>* reports_out = nullptr) {
  if (!corpus.ground_truth) throw std::invalid_argument("corpus has no ground truth");
  const auto& truth = *corpus.ground_truth;
  auto detector = make_detector(name, config, corpus.vocabulary.size());
  auto reports = run_detector(*detector, corpus);
  auto report = evaluate_reports(reports, truth, doc_days(corpus), options);
  if (!truth.novel_doc_ids.empty()) {
    try {
      report.auc = pooled_auc(reports, truth, truth.onset_day);
    } catch (const std::invalid_argument&) {
      report.auc.reset();
    }
  }
  if (reports_out) *reports_out = std::move(reports);
  return report;
}

/// Runs every (scenario, seed) corpus through every configured detector.
/// Work units are (scenario, seed) pairs so each corpus is generated once;
/// results do not depend on `jobs`. A failing cell is recorded, not thrown.
inline std::vector<ResultCell> run_experiment(const ExperimentConfig& config, const std::string& sweep_value = {}) {
  struct Unit {
    const ScenarioSpec* spec;
    std::uint64_t seed;
  };
  std::vector<Unit> units;
  for (const auto& spec : config.scenarios) {
    for (auto seed : config.seeds) units.push_back({&spec, seed});
  }

  std::vector<std::vector<ResultCell>> per_unit(units.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < units.size(); i = next++) {
      const auto& u = units[i];
      std::optional<SimulationResult> sim;
      std::string gen_error;
      try {
        SimulatorConfig sc = config.simulator;
        sc.seed = u.seed;
        sim = generate_corpus(sc, *u.spec);
      } catch (const std::exception& e) {
        gen_error = std::string("simulation failed: ") + e.what();
      }
      for (const auto& name : config.detectors) {
        ResultCell cell;
        cell.scenario_id = u.spec->scenario_id;
        cell.detector = name;
        cell.seed = u.seed;
        cell.sweep_value = sweep_value;
        if (!sim) {
          cell.ok = false;
          cell.error = gen_error;
        } else {
          const auto start = std::chrono::steady_clock::now();
          try {
            cell.report = evaluate_detector(name, config.detector_config, sim->corpus, config.evaluation);
          } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
          }
          cell.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        per_unit[i].push_back(std::move(cell));
      }
    }
  };

  const auto n_threads = static_cast<std::size_t>(std::max(1, config.jobs));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(n_threads, units.size()); ++t) pool.emplace_back(worker);
  }

  std::vector<ResultCell> cells;
  for (auto& u : per_unit) {
    for (auto& c : u) cells.push_back(std::move(c));
  }
  std::sort(cells.begin(), cells.end(), [](const ResultCell& a, const ResultCell& b) { return a.key() < b.key(); });
  return cells;
}

/// Cells of a sweep, one run_experiment per value, tagged with the value.
inline std::vector<ResultCell> run_sweep(const ConfigTree& tree, const SweepSpec& sweep, int jobs = 0) {
  std::vector<ResultCell> cells;
  for (const auto& value : sweep.values) {
    auto cfg = with_sweep_value(tree, sweep, value);
    if (jobs > 0) cfg.jobs = jobs;
    auto part = run_experiment(cfg, value);
    cells.insert(cells.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return cells;
}

inline bool any_failed(const std::vector<ResultCell>& cells) {
  return std::any_of(cells.begin(), cells.end(), [](const ResultCell& c) { return !c.ok; });
}

// ---- CSV output -----------------------------------------------------------

inline void write_summary_csv(const std::vector<ResultCell>& cells, std::ostream& out) {
  out << "sweep_value,scenario,detector,seed,status,word_P,word_R,word_F,doc_P,doc_R,doc_F,word_F_macro,doc_F_macro,"
         "alert_delay,false_alerts,auc\n";
  for (const auto& c : cells) {
    out << c.sweep_value << ',' << c.scenario_id << ',' << c.detector << ',' << c.seed << ',' << (c.ok ? "ok" : "failed");
    if (!c.ok) {
      out << ",,,,,,,,,,,\n";
      continue;
    }
    const auto& r = c.report;
    out << ',' << format_number(r.words_micro.precision) << ',' << format_number(r.words_micro.recall) << ','
        << format_number(r.words_micro.f) << ',' << format_number(r.docs_micro.precision) << ','
        << format_number(r.docs_micro.recall) << ',' << format_number(r.docs_micro.f) << ','
        << format_number(r.words_macro.f) << ',' << format_number(r.docs_macro.f) << ','
        << (r.alert_delay_days ? std::to_string(*r.alert_delay_days) : "") << ',' << r.false_alerts << ','
        << format_optional(r.auc) << '\n';
  }
}

inline void write_runtime_csv(const std::vector<ResultCell>& cells, std::ostream& out) {
  out << "sweep_value,scenario,detector,seed,seconds\n";
  for (const auto& c : cells) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", c.runtime_seconds);
    out << c.sweep_value << ',' << c.scenario_id << ',' << c.detector << ',' << c.seed << ',' << buf << '\n';
  }
}

/// Methods as rows, scenarios x {P,R,F} as columns, one block per task;
/// medians over seeds of the successful cells.
inline void write_table_csv(const std::vector<ResultCell>& cells, const std::vector<std::string>& detectors,
                            std::ostream& out) {
  std::vector<int> scenarios;
  for (const auto& c : cells) scenarios.push_back(c.scenario_id);
  std::sort(scenarios.begin(), scenarios.end());
  scenarios.erase(std::unique(scenarios.begin(), scenarios.end()), scenarios.end());

  out << "task,method";
  for (int s : scenarios) out << ",s" << s << "_P,s" << s << "_R,s" << s << "_F";
  out << '\n';
  for (const char* task : {"words", "docs"}) {
    const bool words = std::string_view(task) == "words";
    for (const auto& d : detectors) {
      out << task << ',' << display_name(d);
      for (int s : scenarios) {
        std::vector<double> p, r, f;
        for (const auto& c : cells) {
          if (!c.ok || c.detector != d || c.scenario_id != s) continue;
          const auto& a = words ? c.report.words_micro : c.report.docs_micro;
          p.push_back(a.precision);
          r.push_back(a.recall);
          f.push_back(a.f);
        }
        if (f.empty()) {
          out << ",,,";
        } else {
          out << ',' << format_number(median(p)) << ',' << format_number(median(r)) << ',' << format_number(median(f));
        }
      }
      out << '\n';
    }
  }
}

/// One row per (sweep value, scenario, detector): medians over seeds.
inline void write_sweep_csv(const std::vector<ResultCell>& cells, const std::vector<std::string>& values,
                            std::ostream& out) {
  out << "value,scenario,detector,seeds,word_P,word_R,word_F,doc_P,doc_R,doc_F,doc_recall_days,alert_delay\n";
  std::map<std::tuple<std::size_t, int, std::string>, std::vector<const ResultCell*>> groups;
  for (const auto& c : cells) {
    if (!c.ok) continue;
    const auto pos = static_cast<std::size_t>(std::find(values.begin(), values.end(), c.sweep_value) - values.begin());
    groups[{pos, c.scenario_id, c.detector}].push_back(&c);
  }
  for (const auto& [key, group] : groups) {
    const auto& [pos, scenario, detector] = key;
    std::vector<double> wp, wr, wf, dp, dr, df, days, delay;
    for (const auto* c : group) {
      const auto& r = c->report;
      wp.push_back(r.words_micro.precision);
      wr.push_back(r.words_micro.recall);
      wf.push_back(r.words_micro.f);
      dp.push_back(r.docs_micro.precision);
      dr.push_back(r.docs_micro.recall);
      df.push_back(r.docs_micro.f);
      int onset = 0;
      for (const auto& row : r.per_day) {
        if (row.novel_docs > 0) {
          onset = row.day;
          break;
        }
      }
      days.push_back(days_with_doc_recall(r, onset));
      if (r.alert_delay_days) delay.push_back(*r.alert_delay_days);
    }
    out << (pos < values.size() ? values[pos] : "") << ',' << scenario << ',' << detector << ',' << group.size() << ','
        << format_number(median(wp)) << ',' << format_number(median(wr)) << ',' << format_number(median(wf)) << ','
        << format_number(median(dp)) << ',' << format_number(median(dr)) << ',' << format_number(median(df)) << ','
        << format_number(median(days)) << ',' << (delay.empty() ? "" : format_number(median(delay))) << '\n';
  }
}

/// Writes summary.csv, runtime.csv, table.csv (unless disabled) and, when
/// enabled in the config, one curve file per cell under curves/.
inline void write_outputs(const std::vector<ResultCell>& cells, const ExperimentConfig& config,
                          const std::filesystem::path& dir, bool with_table = true) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(dir / "summary.csv");
    write_summary_csv(cells, out);
  }
  if (with_table) {
    auto out = open(dir / "table.csv");
    write_table_csv(cells, config.detectors, out);
  }
  {
    auto out = open(dir / "runtime.csv");
    write_runtime_csv(cells, out);
  }
  if (config.write_curves) {
    std::filesystem::create_directories(dir / "curves");
    for (const auto& c : cells) {
      if (!c.ok) continue;
      std::string name = "scenario" + std::to_string(c.scenario_id) + "_" + c.detector + "_seed" + std::to_string(c.seed);
      if (!c.sweep_value.empty()) name += "_v" + c.sweep_value;
      auto out = open(dir / "curves" / (name + ".csv"));
      write_curves_csv(c.report, out);
    }
  }
}

}  // namespace novelty
