// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

// Trains the attempt/refuse simulator under three rejection rewards and
// prints the final refusal rate of each question class.

#include <cstdio>

#include "reliakit/reliakit.hpp"

int main() {
  using namespace reliakit;
  SimEnvironment env;
  env.add_class("unknown", 0.05, 32);
  env.add_class("known", 0.9, 32);
  GrpoConfig config;
  config.epochs = 500;

  for (const auto& row : reward_sweep(env, {-1.0, -0.5, 0.9}, config, 1)) {
    std::printf("r_s=%+.1f%s  unknown refuses %.3f  known refuses %.3f  rel %.3f\n",
                row.r_s, row.ablation ? " (no rejection reward)" : "",
                row.class_abstain.at("unknown"), row.class_abstain.at("known"),
                row.metrics.rel);
  }
}
