// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

// Scores a handful of canned responses and prints the metric columns.

#include <iostream>
#include <map>

#include "reliakit/reliakit.hpp"

int main() {
  using namespace reliakit;
  const auto item = make_item("q1", "George Cukor directed which 1964 film musical?",
                              {"My Fair Lady"}, "trivia");
  const char* completions[] = {
      "<think>Hepburn, Harrison...</think>\nThe answer is \\boxed{My Fair Lady}.",
      "<think>Not sure.</think>\nSorry, I don't know.",
      "<think>Maybe Gigi?</think>\nThe answer is \\boxed{Gigi}.",
      "The answer is \\boxed{my fair lady}",
  };
  std::map<std::string, Tally> by_source;
  for (const char* c : completions) {
    const auto verdict = judge(make_response(c), item);
    std::cout << to_string(verdict.kind) << "\t" << c << "\n";
    by_source[item.source].add(verdict.kind);
  }
  std::cout << "\n" << to_csv(build_report(by_source));
}
