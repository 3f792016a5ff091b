// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reliakit/detail/random.hpp"
#include "reliakit/error.hpp"
#include "reliakit/text.hpp"

namespace reliakit {

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.6;
  int max_tokens = 4096;
  int n = 1;
  std::optional<std::uint64_t> seed;  // honoured by the scripted model only
  std::string question_id;            // routing key for scripted behaviour

  void validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0)) {
      throw ArgumentError("temperature must lie in [0, 2]");
    }
    if (max_tokens <= 0) throw ArgumentError("max_tokens must be positive");
    if (n <= 0) throw ArgumentError("n must be positive");
  }
};

enum class FinishReason { Stop, Length, Error };

inline std::string_view to_string(FinishReason f) {
  switch (f) {
    case FinishReason::Stop:
      return "stop";
    case FinishReason::Length:
      return "length";
    case FinishReason::Error:
      return "error";
  }
  return "error";
}

inline FinishReason finish_from_string(std::string_view s) {
  if (s == "length") return FinishReason::Length;
  if (s == "error") return FinishReason::Error;
  return FinishReason::Stop;
}

struct ReasoningDelimiters {
  std::string open = "<think>";
  std::string close = "</think>";
};

/// Split of a raw completion into its reasoning segment and final answer.
/// `prefix` holds text before the opening delimiter and `gap` the whitespace
/// between the closing delimiter and the final segment, so reassemble()
/// reproduces the raw completion byte for byte.
struct ParsedReasoning {
  std::optional<std::string> reasoning;
  std::string final;
  std::string prefix;
  std::string gap;
  bool implicit_open = false;  // closing delimiter without an opening one
  bool unterminated = false;   // opening delimiter never closed

  std::string reassemble(const ReasoningDelimiters& d = {}) const {
    if (!reasoning) return final;
    std::string out = prefix;
    if (!implicit_open) out += d.open;
    out += *reasoning;
    if (!unterminated) out += d.close;
    out += gap;
    out += final;
    return out;
  }
};

/// Splits on the first delimiter pair. A bare closing delimiter (chat
/// templates that inject the opening tag into the prompt) is treated as the
/// end of a reasoning segment that started at the beginning of the text.
inline ParsedReasoning parse_reasoning(std::string_view raw,
                                       const ReasoningDelimiters& d = {}) {
  ParsedReasoning out;
  const auto open = raw.find(d.open);
  const auto close_any = raw.find(d.close);
  auto split_tail = [&](std::string_view tail) {
    std::size_t lead = 0;
    while (lead < tail.size() && detail::is_ascii_space(tail[lead])) ++lead;
    out.gap = std::string(tail.substr(0, lead));
    out.final = std::string(tail.substr(lead));
  };

  if (open != std::string_view::npos &&
      (close_any == std::string_view::npos || close_any > open)) {
    out.prefix = std::string(raw.substr(0, open));
    const auto body_begin = open + d.open.size();
    const auto close = raw.find(d.close, body_begin);
    if (close == std::string_view::npos) {
      out.reasoning = std::string(raw.substr(body_begin));
      out.unterminated = true;
      return out;
    }
    out.reasoning = std::string(raw.substr(body_begin, close - body_begin));
    split_tail(raw.substr(close + d.close.size()));
    return out;
  }
  if (close_any != std::string_view::npos) {
    out.reasoning = std::string(raw.substr(0, close_any));
    out.implicit_open = true;
    split_tail(raw.substr(close_any + d.close.size()));
    return out;
  }
  out.final = std::string(raw);
  return out;
}

struct ModelResponse {
  std::string raw;
  std::optional<std::string> reasoning;
  std::string final;
  std::size_t reasoning_token_count = 0;
  FinishReason finish = FinishReason::Stop;
  bool unterminated_reasoning = false;

  bool operator==(const ModelResponse&) const = default;
};

/// Builds a response from a raw completion. Token counts cover the reasoning
/// segment when one exists and the whole completion otherwise.
inline ModelResponse make_response(std::string raw,
                                   FinishReason finish = FinishReason::Stop,
                                   const ReasoningDelimiters& d = {}) {
  ParsedReasoning parsed = parse_reasoning(raw, d);
  ModelResponse r;
  r.reasoning = parsed.reasoning;
  r.final = parsed.final;
  r.unterminated_reasoning = parsed.unterminated;
  r.reasoning_token_count =
      count_tokens(parsed.reasoning ? std::string_view(*parsed.reasoning)
                                    : std::string_view(raw));
  r.finish = finish;
  r.raw = std::move(raw);
  return r;
}

inline nlohmann::ordered_json to_json(const ModelResponse& r) {
  nlohmann::ordered_json j;
  j["raw"] = r.raw;
  j["reasoning"] =
      r.reasoning ? nlohmann::ordered_json(*r.reasoning) : nlohmann::ordered_json(nullptr);
  j["final"] = r.final;
  j["reasoning_token_count"] = r.reasoning_token_count;
  j["finish"] = std::string(to_string(r.finish));
  j["unterminated_reasoning"] = r.unterminated_reasoning;
  return j;
}

inline ModelResponse response_from_json(const nlohmann::ordered_json& j) {
  ModelResponse r = make_response(j.at("raw").get<std::string>(),
                                  finish_from_string(j.value("finish", "stop")));
  return r;
}

/// Anything that can answer a prompt with n sampled completions.
class Gateway {
 public:
  virtual ~Gateway() = default;
  virtual std::vector<ModelResponse> generate(
      const GenerationRequest& request) = 0;
};

/// Caps the number of generate() calls in flight on the wrapped gateway.
class BoundedGateway : public Gateway {
 public:
  BoundedGateway(std::shared_ptr<Gateway> inner, std::size_t max_in_flight)
      : inner_(std::move(inner)), limit_(max_in_flight) {
    if (!inner_) throw ArgumentError("BoundedGateway needs a gateway");
    if (limit_ == 0) throw ArgumentError("in-flight bound must be positive");
  }

  std::vector<ModelResponse> generate(const GenerationRequest& request) override {
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return in_flight_ < limit_; });
      ++in_flight_;
    }
    struct Release {
      BoundedGateway* self;
      ~Release() {
        {
          std::lock_guard lock(self->mu_);
          --self->in_flight_;
        }
        self->cv_.notify_one();
      }
    } release{this};
    return inner_->generate(request);
  }

  std::size_t limit() const { return limit_; }

 private:
  std::shared_ptr<Gateway> inner_;
  std::size_t limit_;
  std::size_t in_flight_ = 0;
  std::mutex mu_;
  std::condition_variable cv_;
};

struct CannedCompletion {
  double weight = 1.0;
  std::string completion;
  FinishReason finish = FinishReason::Stop;
};

/// Deterministic test double. Each question id maps to a categorical
/// distribution over canned completions; the entry "*" is the fallback.
/// Draws depend only on (table, model seed, request), never on call history,
/// so concurrent use stays reproducible.
class ScriptedModel : public Gateway {
 public:
  using Table = std::map<std::string, std::vector<CannedCompletion>>;

  ScriptedModel(Table table, std::uint64_t seed)
      : table_(std::move(table)), seed_(seed) {
    for (const auto& [id, dist] : table_) {
      if (dist.empty()) {
        throw ArgumentError("scripted behaviour for '" + id + "' is empty");
      }
      double total = 0.0;
      for (const auto& c : dist) {
        if (!(c.weight > 0.0)) {
          throw ArgumentError("scripted weights must be positive ('" + id +
                              "')");
        }
        total += c.weight;
      }
      if (std::fabs(total - 1.0) > 1e-9) {
        throw ArgumentError("scripted weights for '" + id +
                            "' must sum to 1");
      }
    }
  }

  /// {"seed": 7, "behaviors": {"q1": [{"weight": 1, "completion": "..."}]}}
  static ScriptedModel from_json(const nlohmann::json& j) {
    Table table;
    for (const auto& [id, dist] : j.at("behaviors").items()) {
      auto& out = table[id];
      for (const auto& c : dist) {
        out.push_back({c.value("weight", 1.0),
                       c.at("completion").get<std::string>(),
                       finish_from_string(c.value("finish", "stop"))});
      }
    }
    return ScriptedModel(std::move(table), j.value("seed", std::uint64_t{0}));
  }

  static ScriptedModel from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scripted model '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("invalid scripted model '" + path + "': " + e.what());
    }
  }

  std::vector<ModelResponse> generate(const GenerationRequest& request) override {
    request.validate();
    auto it = table_.find(request.question_id);
    if (it == table_.end()) it = table_.find("*");
    if (it == table_.end()) {
      throw ArgumentError("no scripted behaviour for question '" +
                          request.question_id + "'");
    }
    const auto& dist = it->second;
    const std::uint64_t base = detail::mix_seed(
        seed_, request.seed.value_or(0), detail::fnv1a(request.question_id),
        detail::fnv1a(request.prompt));
    std::vector<ModelResponse> out;
    out.reserve(static_cast<std::size_t>(request.n));
    for (int i = 0; i < request.n; ++i) {
      detail::Rng rng(detail::mix_seed(base, static_cast<std::uint64_t>(i)));
      const double u = rng.uniform();
      double acc = 0.0;
      const CannedCompletion* pick = &dist.back();
      for (const auto& c : dist) {
        acc += c.weight;
        if (u < acc) {
          pick = &c;
          break;
        }
      }
      out.push_back(make_response(pick->completion, pick->finish));
    }
    return out;
  }

 private:
  Table table_;
  std::uint64_t seed_;
};

}  // namespace reliakit
