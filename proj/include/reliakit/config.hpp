// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reliakit/detail/random.hpp"
#include "reliakit/error.hpp"
#include "reliakit/grpo.hpp"
#include "reliakit/qa_data.hpp"
#include "reliakit/version.hpp"

namespace reliakit {

struct EndpointConfig {
  std::string url;    // base URL such as http://localhost:8000/v1, or mock:<file>
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";  // empty: no credential sent
  std::size_t concurrency = 8;
  double timeout_seconds = 120.0;

  static constexpr std::string_view kMockScheme = "mock:";

  bool is_mock() const { return url.rfind(kMockScheme, 0) == 0; }
  std::string mock_path() const { return url.substr(kMockScheme.size()); }
};

struct EnvClassConfig {
  std::string name;
  double p = 0.0;
  std::size_t count = 0;
};

/// Declarative settings shared by every subcommand.
struct RunConfig {
  EndpointConfig endpoint;
  std::optional<EndpointConfig> generator;  // trace generator; defaults to endpoint
  double temperature = 0.6;
  int max_tokens = 4096;
  std::size_t k = 4;
  std::size_t l = 4;
  double r_c = 1.0;
  double r_s = -0.5;
  double r_w = -1.0;
  GrpoConfig grpo;
  std::vector<EnvClassConfig> environment{{"unknown", 0.05, 32},
                                          {"known", 0.9, 32}};
  std::string sft_ratio = "3:1";
  std::size_t sft_retries = 2;
  std::size_t calibration_bins = 10;
  std::map<std::string, std::string> paths;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  RewardSpec reward() const { return RewardSpec(r_c, r_s, r_w); }
  const EndpointConfig& generator_endpoint() const {
    return generator ? *generator : endpoint;
  }

  SimEnvironment sim_environment() const {
    SimEnvironment env;
    for (const auto& c : environment) env.add_class(c.name, c.p, c.count);
    return env;
  }

  void validate() const {
    auto wrap = [](auto&& fn) {
      try {
        fn();
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    };
    wrap([&] { (void)reward(); });
    wrap([&] { grpo.validate(); });
    wrap([&] { sim_environment().validate(); });
    wrap([&] { (void)Ratio::parse(sft_ratio); });
    wrap([&] {
      GenerationRequest probe;
      probe.temperature = temperature;
      probe.max_tokens = max_tokens;
      probe.validate();
    });
    if (k == 0 || l == 0) throw ConfigError("labeler k and l must be positive");
    if (calibration_bins == 0) throw ConfigError("calibration bins must be positive");
    if (workers == 0) throw ConfigError("workers must be positive");
    if (endpoint.concurrency == 0) throw ConfigError("concurrency must be positive");
  }

  nlohmann::ordered_json to_json() const;

  /// Fingerprint of the settings that can change results; parallelism and
  /// timeouts are left out so artifacts do not depend on them.
  std::string digest() const {
    auto j = to_json();
    j.erase("workers");
    for (const char* ep : {"endpoint", "generator"}) {
      if (!j.contains(ep)) continue;
      j[ep].erase("concurrency");
      j[ep].erase("timeout_seconds");
    }
    return detail::hex64(detail::fnv1a(j.dump()));
  }

  static RunConfig from_json(const nlohmann::json& j,
                             const std::filesystem::path& base_dir = {});
  static RunConfig from_file(const std::string& path);
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(std::string(where) + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok |= key == a;
    if (!ok) {
      throw ConfigError("unknown config key '" + std::string(where) + "." +
                        key + "'");
    }
  }
}

template <typename T>
void read_opt(const nlohmann::json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

inline EndpointConfig endpoint_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base,
                                         std::string_view where) {
  check_keys(j, where,
             {"url", "model", "api_key_env", "concurrency", "timeout_seconds"});
  EndpointConfig e;
  read_opt(j, "url", e.url);
  read_opt(j, "model", e.model);
  read_opt(j, "api_key_env", e.api_key_env);
  read_opt(j, "concurrency", e.concurrency);
  read_opt(j, "timeout_seconds", e.timeout_seconds);
  if (e.is_mock() && !base.empty()) {
    std::filesystem::path p(e.mock_path());
    if (p.is_relative()) e.url = std::string(EndpointConfig::kMockScheme) + (base / p).string();
  }
  return e;
}

inline nlohmann::ordered_json endpoint_to_json(const EndpointConfig& e) {
  return {{"url", e.url},
          {"model", e.model},
          {"api_key_env", e.api_key_env},
          {"concurrency", e.concurrency},
          {"timeout_seconds", e.timeout_seconds}};
}

}  // namespace detail

inline nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["endpoint"] = detail::endpoint_to_json(endpoint);
  if (generator) j["generator"] = detail::endpoint_to_json(*generator);
  j["sampling"] = {{"temperature", temperature}, {"max_tokens", max_tokens}};
  j["labeler"] = {{"k", k}, {"l", l}};
  j["reward"] = {{"r_c", r_c}, {"r_s", r_s}, {"r_w", r_w}};
  auto env = nlohmann::ordered_json::array();
  for (const auto& c : environment) {
    env.push_back({{"class", c.name}, {"p", c.p}, {"count", c.count}});
  }
  j["grpo"] = {{"group_size", grpo.group_size},
               {"clip_epsilon", grpo.clip_epsilon},
               {"kl_coefficient", grpo.kl_coefficient},
               {"learning_rate", grpo.learning_rate},
               {"epochs", grpo.epochs},
               {"inner_steps", grpo.inner_steps},
               {"max_grad_norm", grpo.max_grad_norm},
               {"reference_refresh", grpo.reference_refresh},
               {"trace_every", grpo.trace_every},
               {"normalization", std::string(to_string(grpo.normalization))},
               {"warm_start_bonus", grpo.warm_start.refusal_bonus},
               {"warm_start_cutoff", grpo.warm_start.competence_cutoff},
               {"environment", std::move(env)}};
  j["sft"] = {{"ratio", sft_ratio}, {"retries", sft_retries}};
  j["calibration"] = {{"bins", calibration_bins}};
  j["paths"] = paths;
  j["seed"] = seed;
  j["workers"] = workers;
  return j;
}

inline RunConfig RunConfig::from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir) {
  using detail::check_keys;
  using detail::read_opt;
  check_keys(j, "config",
             {"endpoint", "generator", "sampling", "labeler", "reward", "grpo",
              "sft", "calibration", "paths", "seed", "workers"});
  RunConfig c;
  if (auto it = j.find("endpoint"); it != j.end()) {
    c.endpoint = detail::endpoint_from_json(*it, base_dir, "endpoint");
  }
  if (auto it = j.find("generator"); it != j.end() && !it->is_null()) {
    c.generator = detail::endpoint_from_json(*it, base_dir, "generator");
  }
  if (auto it = j.find("sampling"); it != j.end()) {
    check_keys(*it, "sampling", {"temperature", "max_tokens"});
    read_opt(*it, "temperature", c.temperature);
    read_opt(*it, "max_tokens", c.max_tokens);
  }
  if (auto it = j.find("labeler"); it != j.end()) {
    check_keys(*it, "labeler", {"k", "l"});
    read_opt(*it, "k", c.k);
    read_opt(*it, "l", c.l);
  }
  if (auto it = j.find("reward"); it != j.end()) {
    check_keys(*it, "reward", {"r_c", "r_s", "r_w"});
    read_opt(*it, "r_c", c.r_c);
    read_opt(*it, "r_s", c.r_s);
    read_opt(*it, "r_w", c.r_w);
  }
  if (auto it = j.find("grpo"); it != j.end()) {
    const auto& g = *it;
    check_keys(g, "grpo",
               {"group_size", "clip_epsilon", "kl_coefficient", "learning_rate",
                "epochs", "inner_steps", "max_grad_norm", "reference_refresh",
                "trace_every", "normalization", "warm_start_bonus",
                "warm_start_cutoff", "environment"});
    read_opt(g, "group_size", c.grpo.group_size);
    read_opt(g, "clip_epsilon", c.grpo.clip_epsilon);
    read_opt(g, "kl_coefficient", c.grpo.kl_coefficient);
    read_opt(g, "learning_rate", c.grpo.learning_rate);
    read_opt(g, "epochs", c.grpo.epochs);
    read_opt(g, "inner_steps", c.grpo.inner_steps);
    read_opt(g, "max_grad_norm", c.grpo.max_grad_norm);
    read_opt(g, "reference_refresh", c.grpo.reference_refresh);
    read_opt(g, "trace_every", c.grpo.trace_every);
    read_opt(g, "warm_start_bonus", c.grpo.warm_start.refusal_bonus);
    read_opt(g, "warm_start_cutoff", c.grpo.warm_start.competence_cutoff);
    if (auto n = g.find("normalization"); n != g.end()) {
      try {
        c.grpo.normalization = normalization_from_string(n->get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(e.what());
      }
    }
    if (auto e = g.find("environment"); e != g.end()) {
      if (!e->is_array()) throw ConfigError("grpo.environment must be a list");
      c.environment.clear();
      for (const auto& cls : *e) {
        check_keys(cls, "grpo.environment[]", {"class", "p", "count"});
        EnvClassConfig ec;
        read_opt(cls, "class", ec.name);
        read_opt(cls, "p", ec.p);
        read_opt(cls, "count", ec.count);
        c.environment.push_back(ec);
      }
    }
  }
  if (auto it = j.find("sft"); it != j.end()) {
    check_keys(*it, "sft", {"ratio", "retries"});
    read_opt(*it, "ratio", c.sft_ratio);
    read_opt(*it, "retries", c.sft_retries);
  }
  if (auto it = j.find("calibration"); it != j.end()) {
    check_keys(*it, "calibration", {"bins"});
    read_opt(*it, "bins", c.calibration_bins);
  }
  read_opt(j, "paths", c.paths);
  read_opt(j, "seed", c.seed);
  read_opt(j, "workers", c.workers);
  c.validate();
  return c;
}

inline RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j, std::filesystem::path(path).parent_path());
}

/// Provenance stamped into every artifact.
inline ojson artifact_meta(const std::string& config_digest, std::uint64_t seed) {
  ojson m;
  m["tool"] = "reliakit";
  m["version"] = std::string(kVersion);
  m["config_digest"] = config_digest;
  m["seed"] = seed;
  return m;
}

inline std::string csv_meta_line(const ojson& meta) {
  return "# reliakit " + meta.at("version").get<std::string>() +
         " config=" + meta.at("config_digest").get<std::string>() +
         " seed=" + std::to_string(meta.at("seed").get<std::uint64_t>()) + "\n";
}

}  // namespace reliakit
