// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The novbench Authors
//
// novbench: simulate corpora, run detectors, score them, run benchmark grids.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "novelty/bench.hpp"
#include "novelty/config.hpp"
#include "novelty/holdout.hpp"
#include "novelty/report_io.hpp"
#include "novelty/simulator.hpp"

namespace fs = std::filesystem;
using namespace novelty;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int jobs = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_jobs) {
  cmd->add_option("--config", c.config, "Config file (ini)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Seed (overrides experiment.seeds)");
  cmd->add_option("--out", c.out, "Output directory");
  if (with_jobs) cmd->add_option("--jobs", c.jobs, "Concurrent cells")->check(CLI::PositiveNumber);
}

ConfigTree tree_of(const Common& c) {
  ConfigTree tree;
  if (!c.config.empty()) tree = load_config_tree(fs::path(c.config));
  if (c.seed) tree.put("experiment.seeds", std::to_string(*c.seed));
  return tree;
}

ExperimentConfig experiment_of(const Common& c) {
  auto cfg = parse_experiment(tree_of(c));
  if (c.jobs > 0) cfg.jobs = c.jobs;
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json scenario_json(const ScenarioSpec& s) {
  nlohmann::json j{{"scenario_id", s.scenario_id}, {"family", to_string(s.family)}, {"amplitude", s.amplitude},
                   {"onset_day", s.onset_day}};
  switch (s.family) {
    case ScenarioFamily::cyclical:
      j["period_days"] = s.period_days;
      j["pulse_width_days"] = s.pulse_width_days;
      break;
    case ScenarioFamily::emergent: j["slope"] = s.slope; break;
    case ScenarioFamily::event:
      j["peak_day"] = s.peak_day;
      j["width_days"] = s.width_days;
      break;
  }
  return j;
}

int cmd_simulate(const Common& c) {
  const auto cfg = experiment_of(c);
  fs::create_directories(c.out);
  for (const auto& spec : cfg.scenarios) {
    for (auto seed : cfg.seeds) {
      SimulatorConfig sc = cfg.simulator;
      sc.seed = seed;
      const auto sim = generate_corpus(sc, spec);
      const std::string stem = "scenario" + std::to_string(spec.scenario_id) + "_seed" + std::to_string(seed);
      write_corpus(sim.corpus, (fs::path(c.out) / (stem + ".tsv")).string());

      nlohmann::json meta;
      meta["seed"] = seed;
      meta["scenario"] = scenario_json(spec);
      meta["vocab_size"] = sc.vocab_size;
      meta["n_topics"] = sc.n_topics;
      meta["alpha"] = sc.alpha;
      meta["normal_kl_to_novel"] = sim.normal_kl_to_novel;
      if (sim.calibration) {
        const auto& cal = *sim.calibration;
        meta["calibration"] = {{"target_kl", *sc.target_kl},
                               {"achieved_symmetric_kl", cal.achieved_kl},
                               {"kl_novel_to_nearest", cal.kl_novel_to_nearest},
                               {"kl_nearest_to_novel", cal.kl_nearest_to_novel},
                               {"nearest_topic", cal.nearest_topic},
                               {"lambda", cal.lambda},
                               {"iterations", cal.iterations},
                               {"max_achievable_kl", cal.max_achievable_kl}};
      }
      meta["truth"] = truth_to_json(*sim.corpus.ground_truth, sim.corpus.vocabulary);
      write_text((fs::path(c.out) / (stem + ".meta.json")).string(), dump(meta));
      std::cout << stem << ": " << sim.corpus.document_count() << " documents, onset day "
                << sim.corpus.ground_truth->onset_day << '\n';
    }
  }
  return kExitOk;
}

/// Truth from a simulate sidecar (key "truth") or a holdout truth file.
/// Truth words missing from a small sample still count against recall, so
/// they are added to the vocabulary first.
GroundTruth load_truth(const std::string& path, LabeledCorpus& corpus) {
  const auto doc = read_json(path);
  const auto& j = doc.contains("truth") ? doc.at("truth") : doc;
  std::vector<std::string> words;
  if (j.contains("novel_words") && j.at("novel_words").is_array()) {
    for (const auto& w : j.at("novel_words")) {
      if (w.is_string()) words.push_back(w.get<std::string>());
    }
  }
  extend_vocabulary(corpus, std::move(words));
  return truth_from_json(j, corpus.vocabulary);
}

int cmd_detect(const Common& c, const std::string& corpus_path, const std::vector<std::string>& detectors) {
  const auto cfg = experiment_of(c);
  const auto corpus = read_corpus(corpus_path);
  fs::create_directories(c.out);
  for (const auto& name : detectors.empty() ? cfg.detectors : detectors) {
    auto det = make_detector(name, cfg.detector_config, corpus.vocabulary.size());
    const auto reports = run_detector(*det, corpus);
    auto out = open_out(fs::path(c.out) / (name + ".reports"));
    write_reports(reports, corpus.vocabulary, name, out);
    std::cout << name << ": " << reports.size() << " days\n";
  }
  return kExitOk;
}

int cmd_evaluate(const Common& c, const std::string& corpus_path, const std::string& reports_path,
                 const std::string& truth_path) {
  const auto cfg = experiment_of(c);
  auto corpus = read_corpus(corpus_path);
  const auto truth = load_truth(truth_path, corpus);
  std::ifstream in(reports_path);
  if (!in) throw IoError("cannot open " + reports_path);
  const auto reports = read_reports(in, corpus.vocabulary);
  auto report = evaluate_reports(reports, truth, doc_days(corpus), cfg.evaluation);
  if (!truth.novel_doc_ids.empty()) {
    try {
      report.auc = pooled_auc(reports, truth, truth.onset_day);
    } catch (const std::invalid_argument&) {
    }
  }
  fs::create_directories(c.out);
  {
    auto out = open_out(fs::path(c.out) / "curves.csv");
    write_curves_csv(report, out);
  }
  auto out = open_out(fs::path(c.out) / "eval.csv");
  out << "word_P,word_R,word_F,doc_P,doc_R,doc_F,word_F_macro,doc_F_macro,alert_delay,false_alerts,auc\n"
      << format_number(report.words_micro.precision) << ',' << format_number(report.words_micro.recall) << ','
      << format_number(report.words_micro.f) << ',' << format_number(report.docs_micro.precision) << ','
      << format_number(report.docs_micro.recall) << ',' << format_number(report.docs_micro.f) << ','
      << format_number(report.words_macro.f) << ',' << format_number(report.docs_macro.f) << ','
      << (report.alert_delay_days ? std::to_string(*report.alert_delay_days) : "") << ',' << report.false_alerts << ','
      << format_optional(report.auc) << '\n';
  std::cout << "word F " << format_number(report.words_micro.f) << ", doc F " << format_number(report.docs_micro.f)
            << '\n';
  return kExitOk;
}

int report_cells(const std::vector<ResultCell>& cells) {
  int failed = 0;
  for (const auto& cell : cells) {
    if (cell.ok) continue;
    ++failed;
    std::cerr << "cell scenario " << cell.scenario_id << " / " << cell.detector << " / seed " << cell.seed
              << (cell.sweep_value.empty() ? "" : " / value " + cell.sweep_value) << " failed: " << cell.error << '\n';
  }
  std::cout << cells.size() - static_cast<std::size_t>(failed) << " of " << cells.size() << " cells succeeded\n";
  return failed ? kExitPartial : kExitOk;
}

int cmd_bench(const Common& c) {
  const auto cfg = experiment_of(c);
  if (cfg.sweep) throw ConfigError("config has a [sweep] section; use the sweep subcommand");
  const auto cells = run_experiment(cfg);
  write_outputs(cells, cfg, c.out);
  return report_cells(cells);
}

int cmd_sweep(const Common& c, const std::string& preset) {
  auto tree = tree_of(c);
  SweepSpec sweep;
  if (!preset.empty()) {
    sweep = sweep_preset(preset, tree);
    tree.erase("sweep");
  } else {
    const auto parsed = parse_experiment(tree);
    if (!parsed.sweep) throw ConfigError("sweep needs --preset or a [sweep] section");
    sweep = *parsed.sweep;
  }
  const auto cells = run_sweep(tree, sweep, c.jobs);
  auto cfg = with_sweep_value(tree, sweep, sweep.values.front());
  fs::create_directories(c.out);
  {
    auto out = open_out(fs::path(c.out) / ("sweep_" + sweep.name + ".csv"));
    write_sweep_csv(cells, sweep.values, out);
  }
  write_outputs(cells, cfg, c.out, false);
  return report_cells(cells);
}

int cmd_ingest(const Common& c, const std::string& input, bool lowercase) {
  std::ifstream in(input);
  if (!in) throw IoError("cannot open " + input);
  const auto corpus = ingest_raw(in, lowercase);
  fs::create_directories(c.out);
  write_corpus(corpus, (fs::path(c.out) / "corpus.tsv").string());
  std::cout << corpus.document_count() << " documents over " << corpus.batches.size() << " days, "
            << corpus.vocabulary.size() << " terms\n";
  return kExitOk;
}

int cmd_holdout(const Common& c, const std::string& corpus_path, const std::vector<std::string>& categories,
                std::optional<int> historic, bool with_auc) {
  const auto corpus = read_corpus(corpus_path);
  const int days = historic.value_or(default_historic_days(corpus));
  fs::create_directories(c.out);
  ExperimentConfig cfg;
  if (with_auc) cfg = experiment_of(c);

  std::ostringstream auc_csv;
  auc_csv << "detector";
  for (const auto& cat : categories) auc_csv << ',' << cat;
  auc_csv << '\n';
  std::vector<std::vector<double>> auc(cfg.detectors.size());

  for (const auto& cat : categories) {
    const auto injected = holdout_inject(corpus, cat, days);
    const std::string stem = categories.size() == 1 ? std::string("holdout") : "holdout_" + cat;
    write_corpus(injected, (fs::path(c.out) / (stem + ".tsv")).string());
    auto truth = truth_to_json(*injected.ground_truth, injected.vocabulary);
    truth["historic_days"] = days;
    write_text((fs::path(c.out) / (stem + ".truth.json")).string(), dump(truth));
    std::cout << "category " << cat << ": " << injected.ground_truth->novel_doc_ids.size()
              << " novel documents from day " << injected.ground_truth->onset_day << '\n';
    if (with_auc) {
      for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
        auc[d].push_back(rank_and_auc(injected, cfg.detectors[d], cfg.detector_config, days));
      }
    }
  }
  if (with_auc) {
    for (std::size_t d = 0; d < cfg.detectors.size(); ++d) {
      auc_csv << display_name(cfg.detectors[d]);
      for (double a : auc[d]) auc_csv << ',' << format_number(a);
      auc_csv << '\n';
    }
    write_text((fs::path(c.out) / "auc.csv").string(), auc_csv.str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"novbench: novelty detection benchmark"};
  app.require_subcommand(1);

  Common common;
  auto* simulate = app.add_subcommand("simulate", "Generate scenario corpora with truth sidecars");
  add_common(simulate, common, false);

  auto* detect = app.add_subcommand("detect", "Run detectors over a corpus and write report streams");
  add_common(detect, common, false);
  std::string corpus_path;
  std::vector<std::string> detector_list;
  detect->add_option("--corpus", corpus_path, "Corpus file")->required()->check(CLI::ExistingFile);
  detect->add_option("--detector", detector_list, "Detector name (repeatable; default: config list)");

  auto* evaluate = app.add_subcommand("evaluate", "Score a report stream against truth");
  add_common(evaluate, common, false);
  std::string reports_path, truth_path;
  evaluate->add_option("--corpus", corpus_path, "Corpus file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--reports", reports_path, "Report stream from detect")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--truth", truth_path, "Truth JSON (simulate sidecar or holdout truth)")
      ->required()
      ->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "Run the scenario x detector x seed grid");
  add_common(bench, common, true);

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  add_common(sweep, common, true);
  std::string preset;
  sweep->add_option("--preset", preset, "Built-in sweep")->check(CLI::IsMember({"kl", "k", "slope"}));

  auto* ingest = app.add_subcommand("ingest", "Convert raw labeled text to the corpus format");
  add_common(ingest, common, false);
  std::string input;
  bool lowercase = false;
  ingest->add_option("--input", input, "Raw file: doc_id, timestamp, text[, label] (tab-separated)")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_flag("--lowercase", lowercase, "Lowercase text before splitting");

  auto* holdout = app.add_subcommand("holdout", "Remove a category from the historic window and emit its truth");
  add_common(holdout, common, false);
  std::vector<std::string> categories;
  std::optional<int> historic;
  bool with_auc = false;
  holdout->add_option("--corpus", corpus_path, "Corpus file")->required()->check(CLI::ExistingFile);
  holdout->add_option("--category", categories, "Category label (repeatable)")->required();
  holdout->add_option("--historic-days", historic, "Historic window in days (default: first quarter)");
  holdout->add_flag("--auc", with_auc, "Also rank documents with each detector and write auc.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(common);
    if (*detect) return cmd_detect(common, corpus_path, detector_list);
    if (*evaluate) return cmd_evaluate(common, corpus_path, reports_path, truth_path);
    if (*bench) return cmd_bench(common);
    if (*sweep) return cmd_sweep(common, preset);
    if (*ingest) return cmd_ingest(common, input, lowercase);
    if (*holdout) return cmd_holdout(common, corpus_path, categories, historic, with_auc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
