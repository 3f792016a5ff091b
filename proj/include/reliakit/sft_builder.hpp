// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "reliakit/detail/random.hpp"
#include "reliakit/error.hpp"
#include "reliakit/evaluator.hpp"
#include "reliakit/gateway.hpp"
#include "reliakit/parallel.hpp"
#include "reliakit/prompts.hpp"
#include "reliakit/qa_data.hpp"

namespace reliakit {

struct TraceTemplate {
  Knowledge kind = Knowledge::Known;
  std::string text;

  static TraceTemplate known_default() {
    return {Knowledge::Known, std::string(prompts::kTraceKnown)};
  }
  static TraceTemplate unknown_default() {
    return {Knowledge::Unknown, std::string(prompts::kTraceUnknown)};
  }

  /// Loads a user-supplied template; it must keep the {question} slot, and a
  /// Known template must also keep {ref_answer}.
  static TraceTemplate from_file(Knowledge kind, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open template '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    TraceTemplate t{kind, buf.str()};
    t.validate();
    return t;
  }

  void validate() const {
    if (text.find(prompts::kQuestionSlot) == std::string::npos) {
      throw ConfigError("trace template lacks a {question} slot");
    }
    if (kind == Knowledge::Known &&
        text.find(prompts::kRefAnswerSlot) == std::string::npos) {
      throw ConfigError("known trace template lacks a {ref_answer} slot");
    }
  }
};

struct TraceTemplates {
  TraceTemplate known = TraceTemplate::known_default();
  TraceTemplate unknown = TraceTemplate::unknown_default();

  const TraceTemplate& of(Knowledge k) const {
    return k == Knowledge::Known ? known : unknown;
  }
};

inline std::string reference_answer(const QAItem& item) {
  return item.raw_gold_answers.empty() ? item.gold_answers.front()
                                       : item.raw_gold_answers.front();
}

inline std::string render_trace_prompt(const QAItem& item, Knowledge kind,
                                       const TraceTemplates& templates = {}) {
  if (item.label && item.label->value != kind) {
    throw ArgumentError("item '" + item.id + "' is labeled " +
                        std::string(to_string(item.label->value)) +
                        " but a " + std::string(to_string(kind)) +
                        " trace was requested");
  }
  return prompts::fill(templates.of(kind).text, item.question,
                       reference_answer(item));
}

enum class Violation {
  LeakedGoldAnswer,
  MissingBoxed,
  BoxedMismatch,
  MissingRefusal,
  MissingThinkSegment,
};

inline std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::LeakedGoldAnswer:
      return "leaked_gold_answer";
    case Violation::MissingBoxed:
      return "missing_boxed";
    case Violation::BoxedMismatch:
      return "boxed_mismatch";
    case Violation::MissingRefusal:
      return "missing_refusal";
    case Violation::MissingThinkSegment:
      return "missing_think_segment";
  }
  return "unknown";
}

struct TraceValidationReport {
  std::vector<Violation> violations;

  bool passed() const { return violations.empty(); }
  bool has(Violation v) const {
    for (auto x : violations) {
      if (x == v) return true;
    }
    return false;
  }
};

/// Gold candidate (normalized) occurring anywhere in the text, if any.
inline std::optional<std::string> find_leak(std::string_view text,
                                            const QAItem& item) {
  const std::string haystack = normalize(text);
  for (const auto& g : item.gold_answers) {
    const std::string needle = normalize(g);
    if (!needle.empty() && haystack.find(needle) != std::string::npos) {
      return needle;
    }
  }
  return std::nullopt;
}

inline TraceValidationReport validate_trace(std::string_view generated,
                                            const QAItem& item, Knowledge kind,
                                            const RefusalLexicon& lexicon = {}) {
  TraceValidationReport report;
  const ModelResponse r = make_response(std::string(generated));
  if (!r.reasoning || r.unterminated_reasoning) {
    report.violations.push_back(Violation::MissingThinkSegment);
  }
  const Verdict v = judge(r, item.gold_answers, lexicon);
  if (kind == Knowledge::Known) {
    if (!extract_boxed(answer_text(r))) {
      report.violations.push_back(Violation::MissingBoxed);
    } else if (v.kind != VerdictKind::Correct) {
      report.violations.push_back(Violation::BoxedMismatch);
    }
  } else {
    if (v.kind != VerdictKind::Refusal) {
      report.violations.push_back(Violation::MissingRefusal);
    }
    if (find_leak(generated, item)) {
      report.violations.push_back(Violation::LeakedGoldAnswer);
    }
  }
  return report;
}

/// Re-checks a finished record against the item it came from.
inline TraceValidationReport check_record(const SftRecord& record,
                                          const QAItem& item,
                                          const RefusalLexicon& lexicon = {}) {
  return validate_trace(record.output(), item,
                        record.kind == SftKind::KnownAnswer ? Knowledge::Known
                                                            : Knowledge::Unknown,
                        lexicon);
}

/// Rewrites bare boxed{ to \boxed{ so training targets match the inference
/// prompt's notation.
inline std::string canonical_boxes(std::string text) {
  static constexpr std::string_view kKey = "boxed{";
  for (std::size_t pos = text.find(kKey); pos != std::string::npos;
       pos = text.find(kKey, pos + kKey.size())) {
    if (pos == 0 || text[pos - 1] != '\\') {
      text.insert(pos, 1, '\\');
      ++pos;
    }
  }
  return text;
}

struct BuildOptions {
  Ratio ratio{3, 1};
  std::uint64_t seed = 0;
  std::size_t retries = 2;  // extra attempts after the first
  double temperature = 0.6;
  int max_tokens = 4096;
  std::size_t workers = 1;
  TraceTemplates templates;
  RefusalLexicon lexicon;
};

struct ItemFailure {
  std::string id;
  std::vector<std::string> reasons;  // one per attempt
};

struct BuildReport {
  std::size_t target_known = 0;
  std::size_t target_unknown = 0;
  std::size_t passed_known = 0;
  std::size_t passed_unknown = 0;
  std::size_t emitted_known = 0;
  std::size_t emitted_unknown = 0;
  std::size_t attempts = 0;
  std::size_t retries_used = 0;
  std::size_t generator_errors = 0;
  std::size_t skipped_unlabeled = 0;
  std::map<std::string, std::size_t> violation_counts;
  std::vector<ItemFailure> dropped;

  std::size_t shortfall() const {
    return (target_known + target_unknown) - (emitted_known + emitted_unknown);
  }
};

inline nlohmann::ordered_json to_json(const BuildReport& r) {
  nlohmann::ordered_json j;
  j["target"] = {{"known", r.target_known}, {"unknown", r.target_unknown}};
  j["passed"] = {{"known", r.passed_known}, {"unknown", r.passed_unknown}};
  j["emitted"] = {{"known", r.emitted_known}, {"unknown", r.emitted_unknown}};
  j["shortfall"] = r.shortfall();
  j["attempts"] = r.attempts;
  j["retries_used"] = r.retries_used;
  j["generator_errors"] = r.generator_errors;
  j["skipped_unlabeled"] = r.skipped_unlabeled;
  j["violations"] = r.violation_counts;
  auto dropped = nlohmann::ordered_json::array();
  for (const auto& d : r.dropped) {
    dropped.push_back({{"id", d.id}, {"reasons", d.reasons}});
  }
  j["dropped"] = std::move(dropped);
  return j;
}

struct BuildResult {
  std::vector<SftRecord> records;
  BuildReport report;
};

namespace detail {

struct Attempted {
  std::optional<SftRecord> record;
  std::vector<std::string> reasons;
  std::vector<Violation> violations;
  std::size_t attempts = 0;
  std::size_t generator_errors = 0;
};

inline Attempted construct_one(const QAItem& item, Knowledge kind,
                               Gateway& generator, const BuildOptions& opt) {
  Attempted out;
  const std::string prompt = render_trace_prompt(item, kind, opt.templates);
  for (std::size_t attempt = 0; attempt <= opt.retries; ++attempt) {
    ++out.attempts;
    GenerationRequest req;
    req.prompt = prompt;
    req.temperature = opt.temperature;
    req.max_tokens = opt.max_tokens;
    req.seed = mix_seed(opt.seed, fnv1a(item.id), attempt);
    req.question_id = item.id;
    ModelResponse r;
    try {
      auto responses = generator.generate(req);
      if (responses.empty()) throw Error("generator returned no completion");
      r = std::move(responses.front());
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      ++out.generator_errors;
      out.reasons.push_back(std::string("generator: ") + e.what());
      continue;
    }
    const std::string text = canonical_boxes(r.raw);
    auto report = validate_trace(text, item, kind, opt.lexicon);
    if (report.passed()) {
      const ModelResponse parsed = make_response(text);
      SftRecord rec;
      rec.id = item.id;
      rec.question = item.question;
      rec.trace = std::string(trim_ascii(*parsed.reasoning));
      rec.answer = std::string(trim_ascii(parsed.final));
      rec.kind = kind == Knowledge::Known ? SftKind::KnownAnswer
                                          : SftKind::UnknownRefusal;
      // Trimming must not change the verdict; recheck the assembled record.
      auto final_check = check_record(rec, item, opt.lexicon);
      if (final_check.passed()) {
        out.record = std::move(rec);
        return out;
      }
      report = final_check;
    }
    std::string reason;
    for (auto v : report.violations) {
      out.violations.push_back(v);
      if (!reason.empty()) reason += ",";
      reason += to_string(v);
    }
    out.reasons.push_back(reason);
  }
  return out;
}

}  // namespace detail

/// Selects a ratio-controlled subset of labeled items, generates and
/// validates a trace for each (with retries), and mixes the survivors at the
/// same ratio. Items that never pass are dropped and listed in the report.
inline BuildResult build_sft_dataset(const std::vector<QAItem>& items,
                                     Gateway& generator,
                                     const BuildOptions& opt = {}) {
  opt.templates.known.validate();
  opt.templates.unknown.validate();
  BuildResult result;
  BuildReport& rep = result.report;

  std::vector<QAItem> known, unknown;
  for (const auto& it : items) {
    if (!it.label) {
      ++rep.skipped_unlabeled;
    } else if (it.label->value == Knowledge::Known) {
      known.push_back(it);
    } else {
      unknown.push_back(it);
    }
  }
  auto selected = mix_by_ratio(known, unknown, opt.ratio, opt.seed);
  rep.target_known = selected.n_known;
  rep.target_unknown = selected.n_unknown;

  std::vector<detail::Attempted> attempts(selected.items.size());
  parallel_for(selected.items.size(), opt.workers, [&](std::size_t i) {
    const auto& item = selected.items[i];
    attempts[i] = detail::construct_one(item, item.label->value, generator, opt);
  });

  std::vector<SftRecord> ok_known, ok_unknown;
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    auto& a = attempts[i];
    rep.attempts += a.attempts;
    rep.retries_used += a.attempts - 1;
    rep.generator_errors += a.generator_errors;
    for (auto v : a.violations) ++rep.violation_counts[std::string(to_string(v))];
    if (!a.record) {
      rep.dropped.push_back({selected.items[i].id, std::move(a.reasons)});
    } else if (a.record->kind == SftKind::KnownAnswer) {
      ok_known.push_back(std::move(*a.record));
    } else {
      ok_unknown.push_back(std::move(*a.record));
    }
  }
  rep.passed_known = ok_known.size();
  rep.passed_unknown = ok_unknown.size();
  if (ok_known.size() < opt.ratio.known() ||
      ok_unknown.size() < opt.ratio.unknown()) {
    // Nothing can be mixed at the requested ratio; emit what survived.
    result.records = std::move(ok_known);
    result.records.insert(result.records.end(), ok_unknown.begin(),
                          ok_unknown.end());
    rep.emitted_known = rep.passed_known;
    rep.emitted_unknown = rep.passed_unknown;
    return result;
  }
  auto mixed = mix_by_ratio(ok_known, ok_unknown, opt.ratio,
                            detail::mix_seed(opt.seed, 0x5f7));
  result.records = std::move(mixed.items);
  rep.emitted_known = mixed.n_known;
  rep.emitted_unknown = mixed.n_unknown;
  return result;
}

}  // namespace reliakit
