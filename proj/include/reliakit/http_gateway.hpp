// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// OpenAI-compatible chat-completions client. Kept out of reliakit.hpp so
// that only translation units which talk to a live endpoint pay for
// cpp-httplib and OpenSSL.

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "reliakit/config.hpp"
#include "reliakit/detail/random.hpp"
#include "reliakit/error.hpp"
#include "reliakit/gateway.hpp"

namespace reliakit {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
};

struct HttpReply {
  int status = 0;
  std::string body;
};

/// POSTs a JSON body to `path` relative to the endpoint base. Throws
/// TransportError when no HTTP reply was obtained at all.
using Transport = std::function<HttpReply(const std::string& path,
                                          const std::string& body)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline bool is_retryable_status(int status) {
  return status == 408 || status == 425 || status == 429 ||
         (status >= 500 && status <= 599);
}

class ChatCompletionsGateway : public Gateway {
 public:
  ChatCompletionsGateway(EndpointConfig config, Transport transport,
                         RetryPolicy retry = {},
                         Sleeper sleep = [](std::chrono::milliseconds d) {
                           std::this_thread::sleep_for(d);
                         })
      : config_(std::move(config)),
        transport_(std::move(transport)),
        retry_(retry),
        sleep_(std::move(sleep)) {
    if (retry_.max_attempts < 1) {
      throw ArgumentError("retry budget must allow one attempt");
    }
  }

  std::string request_body(const GenerationRequest& request, int n) const {
    nlohmann::ordered_json body;
    body["model"] = config_.model;
    body["messages"] = nlohmann::ordered_json::array(
        {{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    body["n"] = n;
    return body.dump();
  }

  std::vector<ModelResponse> generate(const GenerationRequest& request) override {
    request.validate();
    std::vector<ModelResponse> out;
    // Some servers ignore n; keep asking for the remainder.
    for (int round = 0; round < request.n && static_cast<int>(out.size()) < request.n;
         ++round) {
      const int want = request.n - static_cast<int>(out.size());
      auto batch = parse_choices(post_with_retry(request_body(request, want)));
      if (batch.empty()) {
        throw EndpointError(200, "response carried no choices");
      }
      for (auto& r : batch) {
        if (static_cast<int>(out.size()) < request.n) out.push_back(std::move(r));
      }
    }
    if (static_cast<int>(out.size()) < request.n) {
      throw EndpointError(200, "endpoint returned fewer choices than requested");
    }
    return out;
  }

  static std::vector<ModelResponse> parse_choices(const std::string& body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
      throw EndpointError(200, "unparseable body: " + excerpt(body));
    }
    std::vector<ModelResponse> out;
    if (!j.contains("choices") || !j["choices"].is_array()) return out;
    for (const auto& choice : j["choices"]) {
      std::string content;
      std::string reasoning;
      if (auto m = choice.find("message"); m != choice.end() && m->is_object()) {
        if (auto c = m->find("content"); c != m->end() && c->is_string()) {
          content = c->get<std::string>();
        }
        // vLLM's reasoning parser moves the think segment into its own field.
        if (auto rc = m->find("reasoning_content");
            rc != m->end() && rc->is_string()) {
          reasoning = rc->get<std::string>();
        }
      }
      FinishReason finish = FinishReason::Stop;
      if (auto f = choice.find("finish_reason"); f != choice.end() && f->is_string()) {
        finish = f->get<std::string>() == "length" ? FinishReason::Length
                                                   : FinishReason::Stop;
      }
      std::string raw =
          reasoning.empty() ? content : "<think>" + reasoning + "</think>" + content;
      out.push_back(make_response(std::move(raw), finish));
    }
    return out;
  }

  static std::string excerpt(const std::string& body) {
    constexpr std::size_t kMax = 256;
    return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
  }

 private:
  std::string post_with_retry(const std::string& body) {
    detail::Rng jitter(detail::fnv1a(body));
    std::string last_failure;
    for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
      try {
        HttpReply reply = transport_("/chat/completions", body);
        if (reply.status >= 200 && reply.status < 300) return reply.body;
        if (!is_retryable_status(reply.status)) {
          throw EndpointError(reply.status, excerpt(reply.body));
        }
        last_failure = "HTTP " + std::to_string(reply.status);
      } catch (const TransportError& e) {
        last_failure = e.what();
      }
      if (attempt < retry_.max_attempts) {
        const double factor =
            static_cast<double>(1u << (attempt - 1)) * (0.5 + jitter.uniform());
        sleep_(std::chrono::milliseconds(static_cast<long long>(
            static_cast<double>(retry_.base_delay.count()) * factor)));
      }
    }
    throw TransportError("retry budget exhausted after " +
                         std::to_string(retry_.max_attempts) +
                         " attempts: " + last_failure);
  }

  EndpointConfig config_;
  Transport transport_;
  RetryPolicy retry_;
  Sleeper sleep_;
};

namespace detail {

struct SplitUrl {
  std::string scheme_host_port;
  std::string base_path;
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint url must include a scheme: '" + url + "'");
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.scheme_host_port = url.substr(0, path_begin);
  out.base_path = path_begin == std::string::npos ? "" : url.substr(path_begin);
  while (!out.base_path.empty() && out.base_path.back() == '/') {
    out.base_path.pop_back();
  }
  return out;
}

}  // namespace detail

/// cpp-httplib transport bound to one endpoint.
inline Transport make_httplib_transport(const EndpointConfig& config,
                                        std::string api_key) {
  const auto parts = detail::split_url(config.url);
  const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::duration<double>(config.timeout_seconds));
  return [parts, timeout, api_key = std::move(api_key)](
             const std::string& path, const std::string& body) -> HttpReply {
    httplib::Client client(parts.scheme_host_port);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key);
    }
    auto res = client.Post(parts.base_path + path, headers, body,
                           "application/json");
    if (!res) {
      throw TransportError("request to " + parts.scheme_host_port +
                           parts.base_path + path +
                           " failed: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  };
}

/// Live gateway: credential from the environment, bounded concurrency.
inline std::shared_ptr<Gateway> make_http_gateway(const EndpointConfig& config,
                                                  RetryPolicy retry = {}) {
  if (config.url.empty()) throw ConfigError("endpoint url is not configured");
  if (config.is_mock()) throw ConfigError("mock endpoints have no HTTP client");
  std::string key;
  if (!config.api_key_env.empty()) {
    const char* v = std::getenv(config.api_key_env.c_str());
    if (v == nullptr || *v == '\0') {
      throw ConfigError("credential environment variable " +
                        config.api_key_env + " is not set");
    }
    key = v;
  }
  auto inner = std::make_shared<ChatCompletionsGateway>(
      config, make_httplib_transport(config, std::move(key)), retry);
  return std::make_shared<BoundedGateway>(std::move(inner),
                                          config.concurrency);
}

}  // namespace reliakit
