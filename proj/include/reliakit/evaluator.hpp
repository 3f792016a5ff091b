// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "reliakit/error.hpp"
#include "reliakit/gateway.hpp"
#include "reliakit/prompts.hpp"
#include "reliakit/qa_data.hpp"
#include "reliakit/text.hpp"

namespace reliakit {

enum class VerdictKind { Correct, Refusal, Wrong };

inline std::string_view to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Correct:
      return "correct";
    case VerdictKind::Refusal:
      return "refusal";
    case VerdictKind::Wrong:
      return "wrong";
  }
  return "wrong";
}

inline VerdictKind verdict_from_string(std::string_view s) {
  if (s == "correct") return VerdictKind::Correct;
  if (s == "refusal") return VerdictKind::Refusal;
  if (s == "wrong") return VerdictKind::Wrong;
  throw ArgumentError("unknown verdict '" + std::string(s) + "'");
}

struct Verdict {
  VerdictKind kind = VerdictKind::Wrong;
  std::optional<std::string> extracted_answer;
  std::optional<std::string> matched_gold;
  std::optional<std::string> matched_refusal_phrase;

  bool operator==(const Verdict&) const = default;
};

class RefusalLexicon {
 public:
  RefusalLexicon()
      : RefusalLexicon({"sorry, i don't know", "i don't know",
                        "i do not clearly know", "i do not know"}) {}

  explicit RefusalLexicon(std::vector<std::string> phrases) {
    if (phrases.empty()) throw ArgumentError("refusal lexicon is empty");
    for (auto& p : phrases) {
      std::string n = normalize(p);
      if (n.empty()) throw ArgumentError("refusal phrase is empty");
      phrases_.push_back(std::move(n));
    }
  }

  const std::vector<std::string>& phrases() const { return phrases_; }

  /// First phrase occurring in already-normalized text.
  std::optional<std::string> find_in_normalized(std::string_view text) const {
    for (const auto& p : phrases_) {
      if (text.find(p) != std::string_view::npos) return p;
    }
    return std::nullopt;
  }

  std::optional<std::string> find(std::string_view text) const {
    return find_in_normalized(normalize(text));
  }

 private:
  std::vector<std::string> phrases_;
};

namespace detail {

// Index just past the brace matching the one at `open`, or npos.
inline std::size_t match_brace(std::string_view text, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < text.size(); ++i) {
    if (text[i] == '{') {
      ++depth;
    } else if (text[i] == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

}  // namespace detail

/// Content of the last balanced boxed{...} span. The backslash is optional
/// because the trace-construction prompts ask for a bare boxed{}.
inline std::optional<std::string> extract_boxed(std::string_view text) {
  static constexpr std::string_view kKey = "boxed{";
  std::optional<std::string> last;
  for (std::size_t pos = text.find(kKey); pos != std::string_view::npos;
       pos = text.find(kKey, pos + 1)) {
    const std::size_t open = pos + kKey.size() - 1;
    const std::size_t end = detail::match_brace(text, open);
    if (end == std::string_view::npos) continue;
    last = std::string(text.substr(open + 1, end - open - 2));
  }
  return last;
}

/// Text the evaluator looks at: the final segment, or the whole completion
/// when the final segment is empty.
inline std::string_view answer_text(const ModelResponse& response) {
  return response.final.empty() ? std::string_view(response.raw)
                                : std::string_view(response.final);
}

inline Verdict judge(const ModelResponse& response,
                     const std::vector<std::string>& gold_answers,
                     const RefusalLexicon& lexicon = {}) {
  if (gold_answers.empty()) throw ArgumentError("gold answer list is empty");
  Verdict v;
  std::optional<std::string> boxed = extract_boxed(answer_text(response));
  std::string boxed_norm = boxed ? normalize(*boxed) : std::string();
  if (boxed && !boxed_norm.empty()) {
    v.extracted_answer = *boxed;
    if (auto phrase = lexicon.find_in_normalized(boxed_norm)) {
      v.kind = VerdictKind::Refusal;
      v.matched_refusal_phrase = std::move(phrase);
      return v;
    }
    for (const auto& gold : gold_answers) {
      const std::string g = normalize(gold);
      if (g.empty()) continue;
      if (g.find(boxed_norm) != std::string::npos ||
          boxed_norm.find(g) != std::string::npos) {
        v.kind = VerdictKind::Correct;
        v.matched_gold = gold;
        return v;
      }
    }
    v.kind = VerdictKind::Wrong;
    return v;
  }
  auto phrase = lexicon.find(response.final);
  if (!phrase) phrase = lexicon.find(response.raw);
  if (phrase) {
    v.kind = VerdictKind::Refusal;
    v.matched_refusal_phrase = std::move(phrase);
  }
  return v;
}

inline Verdict judge(const ModelResponse& response, const QAItem& item,
                     const RefusalLexicon& lexicon = {}) {
  return judge(response, item.gold_answers, lexicon);
}

inline nlohmann::ordered_json to_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(v.kind));
  auto opt = [](const std::optional<std::string>& s) {
    return s ? nlohmann::ordered_json(*s) : nlohmann::ordered_json(nullptr);
  };
  j["extracted_answer"] = opt(v.extracted_answer);
  j["matched_gold"] = opt(v.matched_gold);
  j["matched_refusal_phrase"] = opt(v.matched_refusal_phrase);
  return j;
}

inline Verdict verdict_from_json(const nlohmann::ordered_json& j) {
  Verdict v;
  v.kind = verdict_from_string(j.at("kind").get<std::string>());
  auto opt = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
  };
  v.extracted_answer = opt("extracted_answer");
  v.matched_gold = opt("matched_gold");
  v.matched_refusal_phrase = opt("matched_refusal_phrase");
  return v;
}

/// Judge prompt for external LLM adjudication. Slots are filled in one pass
/// so text inside the response can never be re-substituted.
inline std::string render_judge_prompt(const QAItem& item,
                                       const ModelResponse& response) {
  const std::string question = prompts::inference(item.question);
  const std::string golds = nlohmann::json(item.gold_answers).dump();
  const std::string_view hypothesis = answer_text(response);
  const std::string_view tmpl = prompts::kJudge;

  struct Slot {
    std::string_view token;
    std::string_view value;
  };
  const Slot slots[] = {{"[QUESTION]", question},
                        {"[FINAL]", golds},
                        {"[RESPONSE]", hypothesis}};
  std::string out;
  std::size_t cursor = 0;
  for (const auto& s : slots) {
    const std::size_t at = tmpl.find(s.token, cursor);
    if (at == std::string_view::npos) {
      throw Error("judge template lacks slot " + std::string(s.token));
    }
    out.append(tmpl.substr(cursor, at - cursor));
    out.append(s.value);
    cursor = at + s.token.size();
  }
  out.append(tmpl.substr(cursor));
  return out;
}

/// Reads the first bracketed [True]/[False]/[Unknown] token of a judge reply.
inline std::optional<VerdictKind> parse_judge_reply(std::string_view reply) {
  static const std::regex kToken(R"(\[(True|False|Unknown)\])");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(reply.begin(), reply.end(), m, kToken)) {
    return std::nullopt;
  }
  const auto tag = m[1].str();
  if (tag == "True") return VerdictKind::Correct;
  if (tag == "False") return VerdictKind::Wrong;
  return VerdictKind::Refusal;
}

}  // namespace reliakit
