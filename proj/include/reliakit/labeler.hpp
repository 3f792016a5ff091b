// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reliakit/detail/random.hpp"
#include "reliakit/error.hpp"
#include "reliakit/evaluator.hpp"
#include "reliakit/gateway.hpp"
#include "reliakit/parallel.hpp"
#include "reliakit/prompts.hpp"
#include "reliakit/qa_data.hpp"

namespace reliakit {

struct LabelerConfig {
  std::vector<std::string> prompts;  // K templates with a {question} slot
  std::size_t samples_per_prompt = 4;  // L
  double temperature = 0.6;
  int max_tokens = 4096;
  std::uint64_t seed = 0;
  RefusalLexicon lexicon;

  static LabelerConfig with_defaults(std::size_t k = 4, std::size_t l = 4,
                                     std::uint64_t seed = 0) {
    LabelerConfig c;
    c.prompts = prompts::default_labeling_prompts(k);
    c.samples_per_prompt = l;
    c.seed = seed;
    return c;
  }

  std::size_t samples_per_item() const {
    return prompts.size() * samples_per_prompt;
  }

  void validate() const {
    if (prompts.empty()) throw ConfigError("labeler needs at least one prompt");
    if (samples_per_prompt == 0) {
      throw ConfigError("labeler needs at least one sample per prompt");
    }
    for (const auto& p : prompts) {
      if (p.find(prompts::kQuestionSlot) == std::string::npos) {
        throw ConfigError("labeling prompt lacks a {question} slot");
      }
    }
    GenerationRequest probe;
    probe.temperature = temperature;
    probe.max_tokens = max_tokens;
    try {
      probe.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
  }

  /// Stable fingerprint of everything that influences the samples.
  std::string digest() const {
    nlohmann::ordered_json j;
    j["prompts"] = prompts;
    j["samples_per_prompt"] = samples_per_prompt;
    j["temperature"] = temperature;
    j["max_tokens"] = max_tokens;
    j["seed"] = seed;
    j["lexicon"] = lexicon.phrases();
    return detail::hex64(detail::fnv1a(j.dump()));
  }
};

/// All samples drawn for one question, with the verdict for each.
struct SampleSet {
  std::string question_id;
  std::vector<std::size_t> prompt_index;
  std::vector<ModelResponse> samples;
  std::vector<Verdict> verdicts;

  std::size_t matches() const {
    std::size_t n = 0;
    for (const auto& v : verdicts) n += v.kind == VerdictKind::Correct ? 1 : 0;
    return n;
  }
};

inline nlohmann::ordered_json to_json(const SampleSet& s) {
  nlohmann::ordered_json j;
  j["question_id"] = s.question_id;
  j["prompt_index"] = s.prompt_index;
  auto samples = nlohmann::ordered_json::array();
  for (const auto& r : s.samples) samples.push_back(to_json(r));
  j["samples"] = std::move(samples);
  auto verdicts = nlohmann::ordered_json::array();
  for (const auto& v : s.verdicts) verdicts.push_back(to_json(v));
  j["verdicts"] = std::move(verdicts);
  return j;
}

inline SampleSet sample_set_from_json(const nlohmann::ordered_json& j) {
  SampleSet s;
  s.question_id = j.at("question_id").get<std::string>();
  s.prompt_index = j.at("prompt_index").get<std::vector<std::size_t>>();
  for (const auto& r : j.at("samples")) s.samples.push_back(response_from_json(r));
  for (const auto& v : j.at("verdicts")) s.verdicts.push_back(verdict_from_json(v));
  if (s.samples.size() != s.verdicts.size() ||
      s.samples.size() != s.prompt_index.size()) {
    throw ArgumentError("sample set '" + s.question_id +
                        "' has mismatched list lengths");
  }
  return s;
}

inline void write_sample_sets(const std::vector<SampleSet>& sets,
                              const std::string& path,
                              const std::optional<ojson>& meta = std::nullopt) {
  detail::write_lines(sets, path, meta);
}

inline std::vector<SampleSet> read_sample_sets(const std::string& path) {
  return detail::read_lines<SampleSet>(path, sample_set_from_json).records;
}

/// Re-judges persisted samples; used to audit stored labels offline.
inline std::size_t recount_matches(const SampleSet& set, const QAItem& item,
                                   const RefusalLexicon& lexicon = {}) {
  std::size_t n = 0;
  for (const auto& r : set.samples) {
    n += judge(r, item.gold_answers, lexicon).kind == VerdictKind::Correct ? 1 : 0;
  }
  return n;
}

struct LabeledItem {
  QAItem item;
  SampleSet samples;
};

/// Samples K prompts x L completions and labels the item Known iff any
/// completion is judged Correct.
inline LabeledItem label_item(const QAItem& item, const LabelerConfig& config,
                              Gateway& gateway) {
  validate(item);
  LabeledItem out{item, {}};
  out.samples.question_id = item.id;
  for (std::size_t j = 0; j < config.prompts.size(); ++j) {
    GenerationRequest req;
    req.prompt = prompts::fill(config.prompts[j], item.question);
    req.temperature = config.temperature;
    req.max_tokens = config.max_tokens;
    req.n = static_cast<int>(config.samples_per_prompt);
    req.seed = detail::mix_seed(config.seed, j);
    req.question_id = item.id;
    auto responses = gateway.generate(req);
    if (responses.size() != config.samples_per_prompt) {
      throw Error("gateway returned " + std::to_string(responses.size()) +
                  " samples, expected " +
                  std::to_string(config.samples_per_prompt));
    }
    for (auto& r : responses) {
      out.samples.verdicts.push_back(judge(r, item.gold_answers, config.lexicon));
      out.samples.samples.push_back(std::move(r));
      out.samples.prompt_index.push_back(j);
    }
  }
  out.item.label = KnowledgeLabel::from_counts(
      out.samples.samples.size(), out.samples.matches(), config.digest());
  return out;
}

struct LabelOptions {
  bool force = false;       // relabel items that already carry a label
  std::size_t workers = 1;
};

struct LabelFailure {
  std::string id;
  std::string message;
};

struct LabelSummary {
  std::size_t n_items = 0;
  std::size_t n_labeled = 0;  // labeled during this run
  std::size_t n_skipped = 0;  // already labeled, left alone
  std::size_t n_known = 0;    // over all labeled items in the output
  std::size_t n_unknown = 0;
  std::vector<LabelFailure> errors;

  double known_fraction() const {
    const std::size_t n = n_known + n_unknown;
    return n == 0 ? 0.0 : static_cast<double>(n_known) / static_cast<double>(n);
  }
};

struct LabelRun {
  std::vector<QAItem> items;         // input order; failed items unlabeled
  std::vector<SampleSet> sample_sets;  // items labeled in this run, input order
  LabelSummary summary;
};

/// Labels a dataset. Per-item gateway failures are recorded and the batch
/// continues; configuration errors abort.
inline LabelRun label_dataset(const std::vector<QAItem>& items,
                              const LabelerConfig& config, Gateway& gateway,
                              const LabelOptions& options = {}) {
  config.validate();
  LabelRun run;
  run.items = items;
  run.summary.n_items = items.size();

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].label && !options.force) {
      ++run.summary.n_skipped;
    } else {
      todo.push_back(i);
    }
  }

  std::vector<std::optional<SampleSet>> sets(items.size());
  std::vector<std::optional<std::string>> failures(items.size());
  parallel_for(todo.size(), options.workers, [&](std::size_t t) {
    const std::size_t i = todo[t];
    try {
      auto labeled = label_item(items[i], config, gateway);
      run.items[i] = std::move(labeled.item);
      sets[i] = std::move(labeled.samples);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      run.items[i].label.reset();
      failures[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < items.size(); ++i) {
    if (sets[i]) {
      ++run.summary.n_labeled;
      run.sample_sets.push_back(std::move(*sets[i]));
    }
    if (failures[i]) run.summary.errors.push_back({items[i].id, *failures[i]});
    if (run.items[i].label) {
      if (run.items[i].label->value == Knowledge::Known) {
        ++run.summary.n_known;
      } else {
        ++run.summary.n_unknown;
      }
    }
  }
  return run;
}

}  // namespace reliakit
