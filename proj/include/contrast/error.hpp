// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace contrast {

/// Failure categories surfaced by the engine. The CLI maps each one to an
/// exit code (config 2, provider/transport 3, protocol 4).
enum class ErrorKind {
  config,
  provider,
  transport,
  timeout,
  protocol,
  version_mismatch,
  vocab_mismatch,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Decode step at which the error surfaced, if it happened inside a decode.
  std::optional<std::size_t> step() const noexcept { return step_; }
  void set_step(std::size_t step) noexcept { step_ = step; }

  const char* what() const noexcept override {
    if (step_ && message_.empty()) {
      message_ = "step " + std::to_string(*step_) + ": " +
                 std::runtime_error::what();
    }
    return step_ ? message_.c_str() : std::runtime_error::what();
  }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> step_;
  mutable std::string message_;
};

/// Configuration validation failure. Carries every violated field, not just
/// the first one.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error(ErrorKind::config, join(violations)),
        violations_(std::move(violations)) {}
  explicit ConfigError(const std::string& violation)
      : ConfigError(std::vector<std::string>{violation}) {}

  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid configuration";
    for (const auto& item : items) out += "\n  - " + item;
    return out;
  }

  std::vector<std::string> violations_;
};

class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& what,
                         ErrorKind kind = ErrorKind::provider)
      : Error(kind, what) {}
};

class TransportError : public ProviderError {
 public:
  explicit TransportError(const std::string& what)
      : ProviderError(what, ErrorKind::transport) {}
};

class TimeoutError : public ProviderError {
 public:
  explicit TimeoutError(const std::string& what)
      : ProviderError(what, ErrorKind::timeout) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what,
                         ErrorKind kind = ErrorKind::protocol)
      : Error(kind, what) {}
};

class VersionMismatchError : public ProtocolError {
 public:
  explicit VersionMismatchError(const std::string& what)
      : ProtocolError(what, ErrorKind::version_mismatch) {}
};

class VocabMismatchError : public ProtocolError {
 public:
  explicit VocabMismatchError(const std::string& what)
      : ProtocolError(what, ErrorKind::vocab_mismatch) {}
};

inline int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
      return 2;
    case ErrorKind::provider:
    case ErrorKind::transport:
    case ErrorKind::timeout:
      return 3;
    case ErrorKind::protocol:
    case ErrorKind::version_mismatch:
    case ErrorKind::vocab_mismatch:
      return 4;
  }
  return 1;
}

}  // namespace contrast
