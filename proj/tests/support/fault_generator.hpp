// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

// Trace generator double that mixes valid traces with every failure mode the
// builder must catch: leaks, missing or wrong boxes, broken think segments,
// transport errors and empty replies.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "reliakit/gateway.hpp"
#include "reliakit/qa_data.hpp"

namespace support {

class FaultGenerator : public reliakit::Gateway {
 public:
  FaultGenerator(const std::vector<reliakit::QAItem>& items, double valid_rate,
                 std::uint64_t seed)
      : valid_rate_(valid_rate), seed_(seed) {
    for (const auto& it : items) items_[it.id] = it;
  }

  std::vector<reliakit::ModelResponse> generate(
      const reliakit::GenerationRequest& req) override {
    using reliakit::detail::mix_seed;
    const auto& item = items_.at(req.question_id);
    const bool known =
        item.label && item.label->value == reliakit::Knowledge::Known;
    reliakit::detail::Rng rng(mix_seed(seed_, req.seed.value_or(0),
                                       reliakit::detail::fnv1a(req.question_id)));
    const std::string gold = item.raw_gold_answers.empty()
                                 ? item.gold_answers.front()
                                 : item.raw_gold_answers.front();
    const std::string refusal =
        "Sorry, I must say that I do not clearly know the answer to your question.";
    std::string text;
    if (rng.uniform() < valid_rate_) {
      if (known) {
        text = rng.below(2) ? "<think>\nWeighing candidates, " + gold +
                                  " fits best.\n</think>\n\nThe answer is \\boxed{" +
                                  gold + "}."
                            : "<think>checked</think>So boxed{" + gold + "}";
      } else {
        text = "<think>\nSeveral candidates come to mind but none holds up.\n"
               "</think>\n\n" + refusal;
      }
      return {reliakit::make_response(text)};
    }
    switch (rng.below(9)) {
      case 0:  // leak in reasoning, refusal after
        text = "<think>It could be " + gold + ", not sure.</think>" + refusal;
        break;
      case 1:  // leak with different casing and spacing
        text = "<think>hmm</think>" + refusal + " (perhaps   " +
               upper(gold) + ")";
        break;
      case 2:  // confident wrong box
        text = "<think>quick guess</think>\\boxed{Zyxwv Qrstu}";
        break;
      case 3:  // no think segment at all
        text = known ? "The answer is \\boxed{" + gold + "}." : refusal;
        break;
      case 4:  // reasoning never closed
        text = "<think>still going... " + std::string(known ? "\\boxed{" + gold + "}" : refusal);
        break;
      case 5:
        throw reliakit::TransportError("injected transport failure");
      case 6:
        return {};
      case 7:  // answer without a box
        text = "<think>ok</think>I believe it is " + gold + ".";
        break;
      default:  // boxed gold answer: right for known, a leak for unknown
        text = "<think>I recall it.</think>\\boxed{" + gold + "}";
        break;
    }
    return {reliakit::make_response(text)};
  }

 private:
  static std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  }

  std::map<std::string, reliakit::QAItem> items_;
  double valid_rate_;
  std::uint64_t seed_;
};

}  // namespace support
