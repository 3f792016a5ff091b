// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace reliakit {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed a value outside an operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent configuration (credentials, endpoints, config files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed, or a record in it was malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A numeric routine was evaluated outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Network-level failure that survived the retry budget.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The endpoint answered with a non-retryable HTTP status.
class EndpointError : public Error {
 public:
  EndpointError(int status, std::string body_excerpt)
      : Error("endpoint returned HTTP " + std::to_string(status) + ": " +
              body_excerpt),
        status_(status),
        body_excerpt_(std::move(body_excerpt)) {}

  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

}  // namespace reliakit
