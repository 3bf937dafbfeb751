// Copyright 2026 The VQAG Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Command-line front end: generate, evaluate and stats subcommands.
//
// Exit codes: 0 success, 1 unreadable or malformed input, 2 usage error.

#include <algorithm>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "vqag/answer_extract.hpp"
#include "vqag/conllu.hpp"
#include "vqag/error.hpp"
#include "vqag/jsonl.hpp"
#include "vqag/metrics.hpp"
#include "vqag/question_gen.hpp"
#include "vqag/report.hpp"

namespace vqag::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInputError = 1, kUsageError = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenerateOptions {
  std::string captions;
  std::string objects;
  std::string out;
  bool filter_captions = false;
  bool no_objects_context = false;
  int max_question_len = 24;
  std::string synonyms;
  std::string gazetteer;
  std::string wh_map;
  int jobs = 1;
};

struct EvaluateOptions {
  std::string qa;
  std::string references;
  std::string out;
  std::string metrics = "bleu,rouge_l,meteor";
};

struct StatsOptions {
  std::string qa;
  std::string out;
};

inline MetricSet parse_metric_list(const std::string& list) {
  MetricSet m{false, false, false};
  for (auto item : split(list, ',')) {
    const std::string name = to_lower(trim(item));
    if (name == "bleu") {
      m.bleu = true;
    } else if (name == "rouge_l" || name == "rouge-l" || name == "rougel") {
      m.rouge_l = true;
    } else if (name == "meteor") {
      m.meteor = true;
    } else {
      throw UsageError("unknown metric '" + name + "'");
    }
  }
  return m;
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

struct GenerateSummary {
  std::size_t images = 0;
  std::size_t captions = 0;
  std::size_t filtered = 0;
  std::size_t skipped = 0;
  std::vector<QAPair> pairs;
};

// Per-image work is split into contiguous blocks; results are concatenated in
// input order so the output does not depend on the job count.
inline GenerateSummary run_generation(const std::vector<ImageRecord>& records,
                                      const ExtractConfig& ecfg, const GenConfig& gcfg,
                                      int jobs) {
  const std::size_t n = records.size();
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1,
                                                      std::max<std::size_t>(n, 1));
  std::vector<std::future<std::vector<GenerationResult>>> futures;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    futures.push_back(std::async(workers == 1 ? std::launch::deferred : std::launch::async,
                                 [&records, &ecfg, &gcfg, begin, end]() {
                                   std::vector<GenerationResult> part;
                                   for (std::size_t i = begin; i < end; ++i) {
                                     part.push_back(generate_qa(records[i], ecfg, gcfg));
                                   }
                                   return part;
                                 }));
  }
  GenerateSummary s;
  s.images = n;
  for (const auto& r : records) s.captions += r.captions.size();
  for (auto& f : futures) {
    for (auto& result : f.get()) {
      s.filtered += result.filtered;
      s.skipped += result.skipped;
      for (auto& p : result.pairs) s.pairs.push_back(std::move(p));
    }
  }
  return s;
}

inline int do_generate(const GenerateOptions& o, std::ostream& out) {
  if (o.max_question_len < 3) throw UsageError("--max-question-len must be at least 3");
  if (o.jobs < 1) throw UsageError("--jobs must be at least 1");
  ExtractConfig ecfg;
  ecfg.use_objects_context = !o.no_objects_context;
  ecfg.filter_captions = o.filter_captions;
  if (!o.synonyms.empty()) ecfg.synonyms = load_synonyms(o.synonyms);
  if (!o.gazetteer.empty()) ecfg.animals = load_gazetteer(o.gazetteer);
  GenConfig gcfg;
  gcfg.max_question_tokens = o.max_question_len;
  if (!o.wh_map.empty()) gcfg.wh_mapping = load_wh_mapping(o.wh_map);

  const auto records = build_records(read_conllu(o.captions), read_objects(o.objects));
  const auto summary = run_generation(records, ecfg, gcfg, o.jobs);
  write_qa(summary.pairs, o.out);

  out << "images    " << summary.images << "\n"
      << "captions  " << summary.captions << "\n"
      << "filtered  " << summary.filtered << "\n"
      << "skipped   " << summary.skipped << "\n"
      << "pairs     " << summary.pairs.size() << "\n\n";
  out << render_report(category_distribution(summary.pairs));
  return kOk;
}

inline int do_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  const MetricSet metrics = parse_metric_list(o.metrics);
  const auto pairs = read_qa(o.qa);
  const auto refs = read_references(o.references);
  const auto ev = evaluate_corpus(pairs, refs, metrics);
  for (const auto& id : ev.skipped_ids) err << "no reference for " << id << "\n";
  emit(render_report(category_distribution(pairs), ev.report), o.out, out);
  return kOk;
}

inline int do_stats(const StatsOptions& o, std::ostream& out) {
  emit(render_report(category_distribution(read_qa(o.qa))), o.out, out);
  return kOk;
}

// args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weakly supervised visual question-answer generation from captions"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Generate QA pairs from parsed captions and detections");
  g->add_option("--captions", gen.captions, "CoNLL-U captions")->required();
  g->add_option("--objects", gen.objects, "Detections JSONL")->required();
  g->add_option("--out", gen.out, "QA pairs JSONL to write")->required();
  g->add_flag("--filter-captions", gen.filter_captions,
              "Drop captions that mention no detected object");
  g->add_flag("--no-objects-context", gen.no_objects_context,
              "Ignore detections when choosing answers");
  g->add_option("--max-question-len", gen.max_question_len, "Maximum question length in words")
      ->capture_default_str();
  g->add_option("--synonyms", gen.synonyms, "Synonym TSV: label<TAB>word1,word2");
  g->add_option("--gazetteer", gen.gazetteer, "Animal labels, one per line");
  g->add_option("--wh-map", gen.wh_map, "Category to question word TSV");
  g->add_option("--jobs", gen.jobs, "Worker threads")->capture_default_str();

  EvaluateOptions eval;
  auto* e = app.add_subcommand("evaluate", "Score QA pairs against reference questions");
  e->add_option("--qa", eval.qa, "QA pairs JSONL")->required();
  e->add_option("--references", eval.references, "Reference questions JSONL")->required();
  e->add_option("--out", eval.out, "Report path (default stdout)");
  e->add_option("--metrics", eval.metrics, "Comma-separated: bleu,rouge_l,meteor")
      ->capture_default_str();

  StatsOptions stats;
  auto* s = app.add_subcommand("stats", "Question-word distribution of a QA file");
  s->add_option("--qa", stats.qa, "QA pairs JSONL")->required();
  s->add_option("--out", stats.out, "Report path (default stdout)");

  std::vector<std::string> argv_store{"vqag"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, err, err);
    err << app.help();
    return kUsageError;
  }

  try {
    if (g->parsed()) return do_generate(gen, out);
    if (e->parsed()) return do_evaluate(eval, out, err);
    if (s->parsed()) return do_stats(stats, out);
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n" << app.help();
    return kUsageError;
  } catch (const FormatError& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  } catch (const TreeError& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  } catch (const std::runtime_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kInputError;
  }
  return kUsageError;
}

}  // namespace vqag::cli
