// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

#pragma once

/**
 * @file wire.hpp
 * @brief Newline-delimited JSON protocol spoken with a model server, its
 * transports, and the remote logit provider.
 *
 * Requests:
 *   {"id": 1, "method": "handshake", "params": {"format_version": 1}}
 *   {"id": 2, "method": "logits",    "params": {"side": "v", "context": [ids]}}
 *   {"id": 3, "method": "tokenize",  "params": {"text": "..."}}
 *   {"id": 4, "method": "describe",  "params": {"image": "...", "prompt": "..."}}
 * Responses carry the request id and either "result" or
 * "error": {"code": int, "message": str}. Results:
 *   handshake -> {"n", "eos_id", "model"}; logits -> {"logits": [n reals]};
 *   tokenize -> {"ids": [...]}; describe -> {"description": "..."}.
 * Masked logits travel as the string "-inf". One request is in flight per
 * connection.
 */

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "contrast/core.hpp"
#include "contrast/error.hpp"
#include "contrast/provider.hpp"

namespace contrast::wire {

inline constexpr int kProtocolVersion = 1;

/// Error codes carried in {"error": {"code": ...}}.
namespace codes {
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kVersionMismatch = 1001;
inline constexpr int kDescriptionMissing = 1002;
inline constexpr int kInternal = 1003;
}  // namespace codes

inline nlohmann::json encode_logits(std::span<const double> logits) {
  auto arr = nlohmann::json::array();
  for (double v : logits) {
    if (v == kNegInf) {
      arr.push_back("-inf");
    } else {
      arr.push_back(v);
    }
  }
  return arr;
}

inline std::vector<double> decode_logits(const nlohmann::json& arr) {
  if (!arr.is_array()) throw ProtocolError("logits must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_string() && v.get<std::string>() == "-inf") {
      out.push_back(kNegInf);
    } else {
      throw ProtocolError("logit entry is neither a number nor \"-inf\"");
    }
  }
  return out;
}

inline std::string make_request(std::uint64_t id, std::string_view method, nlohmann::json params) {
  nlohmann::json msg;
  msg["id"] = id;
  msg["method"] = method;
  msg["params"] = std::move(params);
  return msg.dump();
}

/// Returns the "result" of a response line for request `id`, or throws the
/// error it carries.
inline nlohmann::json parse_response(std::string_view line, std::uint64_t id) {
  nlohmann::json msg;
  try {
    msg = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw ProtocolError("malformed response line");
  }
  if (!msg.is_object() || !msg.contains("id") || !msg["id"].is_number_unsigned() ||
      msg["id"].get<std::uint64_t>() != id) {
    throw ProtocolError("response id does not match request " + std::to_string(id));
  }
  if (msg.contains("error")) {
    const auto& err = msg["error"];
    const int code = err.value("code", codes::kInternal);
    const std::string message = err.value("message", std::string("unspecified error"));
    if (code == codes::kVersionMismatch) throw VersionMismatchError("server: " + message);
    throw ProtocolError("server error " + std::to_string(code) + ": " + message);
  }
  if (!msg.contains("result")) throw ProtocolError("response has neither result nor error");
  return msg["result"];
}

// ---------------------------------------------------------------------------
// Transports

/// Owns a file descriptor.
class UniqueFd {
 public:
  UniqueFd() = default;
  explicit UniqueFd(int fd) noexcept : fd_(fd) {}
  UniqueFd(UniqueFd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  UniqueFd& operator=(UniqueFd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;
  ~UniqueFd() { reset(); }

  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

/// Line-oriented byte stream.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual void send_line(std::string_view line) = 0;
  virtual std::string recv_line(std::chrono::milliseconds timeout) = 0;
};

/// Line transport over a pair of descriptors (a socket uses the same one
/// for both directions).
class FdTransport : public LineTransport {
 public:
  FdTransport(UniqueFd read_fd, UniqueFd write_fd)
      : read_(std::move(read_fd)), write_(std::move(write_fd)) {}
  explicit FdTransport(UniqueFd socket) : read_(std::move(socket)), shared_(true) {}

  void send_line(std::string_view line) override {
    std::string buf(line);
    buf += '\n';
    const int fd = shared_ ? read_.get() : write_.get();
    std::size_t sent = 0;
    while (sent < buf.size()) {
      const ssize_t n = shared_ ? ::send(fd, buf.data() + sent, buf.size() - sent, MSG_NOSIGNAL)
                                : ::write(fd, buf.data() + sent, buf.size() - sent);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("write failed: ") + std::strerror(errno));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string recv_line(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto pos = pending_.find('\n'); pos != std::string::npos) {
        std::string line = pending_.substr(0, pos);
        pending_.erase(0, pos + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw TimeoutError("no response within timeout");
      pollfd pfd{read_.get(), POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) throw TimeoutError("no response within timeout");
      char chunk[65536];
      const ssize_t n = ::read(read_.get(), chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("read failed: ") + std::strerror(errno));
      }
      if (n == 0) throw TransportError("connection closed by peer");
      pending_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  UniqueFd read_;
  UniqueFd write_;
  bool shared_ = false;
  std::string pending_;
};

inline std::unique_ptr<LineTransport> connect_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, &::freeaddrinfo);
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    UniqueFd fd(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!fd) continue;
    if (::connect(fd.get(), ai->ai_addr, ai->ai_addrlen) == 0) {
      return std::make_unique<FdTransport>(std::move(fd));
    }
  }
  throw TransportError("cannot connect to " + host + ":" + port);
}

/// Child process speaking the protocol on its stdin/stdout.
class ProcessTransport final : public LineTransport {
 public:
  explicit ProcessTransport(const std::string& command) {
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw TransportError("pipe failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw TransportError("pipe failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw TransportError("fork failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
    io_.emplace(UniqueFd(from_child[0]), UniqueFd(to_child[1]));
  }

  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  ~ProcessTransport() override {
    io_.reset();  // closing stdin asks the child to exit
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) return;
      ::usleep(10'000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }

  void send_line(std::string_view line) override {
    // A dead child would otherwise raise SIGPIPE.
    std::signal(SIGPIPE, SIG_IGN);
    io_->send_line(line);
  }
  std::string recv_line(std::chrono::milliseconds timeout) override {
    return io_->recv_line(timeout);
  }

 private:
  pid_t pid_ = -1;
  std::optional<FdTransport> io_;
};

/// Endpoint syntax: "tcp://host:port" or "exec:<shell command>".
inline std::unique_ptr<LineTransport> open_endpoint(const std::string& endpoint) {
  constexpr std::string_view tcp = "tcp://";
  constexpr std::string_view exec = "exec:";
  if (endpoint.starts_with(tcp)) {
    const std::string rest = endpoint.substr(tcp.size());
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
      throw ConfigError("endpoint: expected tcp://host:port, got " + endpoint);
    }
    return connect_tcp(rest.substr(0, colon), rest.substr(colon + 1));
  }
  if (endpoint.starts_with(exec)) {
    const std::string command = endpoint.substr(exec.size());
    if (command.empty()) throw ConfigError("endpoint: exec: needs a command");
    return std::make_unique<ProcessTransport>(command);
  }
  throw ConfigError("endpoint: unsupported scheme in " + endpoint);
}

// ---------------------------------------------------------------------------
// Client

struct ServerInfo {
  std::size_t n = 0;
  std::optional<TokenId> eos_id;
  std::string model;
};

/// Synchronous protocol client. Calls are serialized per connection.
class RemoteClient {
 public:
  explicit RemoteClient(std::unique_ptr<LineTransport> transport,
                        std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : transport_(std::move(transport)), timeout_(timeout) {}

  ServerInfo handshake() {
    const auto result = call("handshake", {{"format_version", kProtocolVersion}});
    if (result.contains("format_version") &&
        result["format_version"].get<int>() != kProtocolVersion) {
      throw VersionMismatchError("server speaks format_version " +
                                 result["format_version"].dump());
    }
    ServerInfo info;
    try {
      info.n = result.at("n").get<std::size_t>();
      if (result.contains("eos_id") && !result["eos_id"].is_null()) {
        info.eos_id = result["eos_id"].get<TokenId>();
      }
      info.model = result.value("model", std::string());
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("malformed handshake result: ") + e.what());
    }
    if (info.n == 0) throw ProtocolError("server reports an empty vocabulary");
    return info;
  }

  std::vector<double> logits(Side side, std::span<const TokenId> context) {
    nlohmann::json params;
    params["side"] = to_string(side);
    params["context"] = std::vector<TokenId>(context.begin(), context.end());
    const auto result = call("logits", std::move(params));
    if (!result.contains("logits")) throw ProtocolError("logits result lacks \"logits\"");
    return decode_logits(result["logits"]);
  }

  std::vector<TokenId> tokenize(const std::string& text) {
    const auto result = call("tokenize", {{"text", text}});
    try {
      return result.at("ids").get<std::vector<TokenId>>();
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("malformed tokenize result: ") + e.what());
    }
  }

  std::string describe(const std::string& image, const std::string& prompt) {
    const auto result = call("describe", {{"image", image}, {"prompt", prompt}});
    try {
      return result.at("description").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("malformed describe result: ") + e.what());
    }
  }

 private:
  nlohmann::json call(std::string_view method, nlohmann::json params) {
    std::lock_guard lock(mutex_);
    const std::uint64_t id = next_id_++;
    transport_->send_line(make_request(id, method, std::move(params)));
    return parse_response(transport_->recv_line(timeout_), id);
  }

  std::mutex mutex_;
  std::unique_ptr<LineTransport> transport_;
  std::chrono::milliseconds timeout_;
  std::uint64_t next_id_ = 1;
};

/// Logit provider backed by a model server. Both sides may share one client.
class RemoteProvider final : public LogitProvider {
 public:
  /// Performs no I/O; `info` comes from a completed handshake. Throws
  /// VocabMismatchError when `expected_n` is given and differs.
  RemoteProvider(std::shared_ptr<RemoteClient> client, const ServerInfo& info,
                 std::optional<std::size_t> expected_n = std::nullopt)
      : client_(std::move(client)), vocab_(Vocabulary::placeholder(info.n, info.eos_id)) {
    if (expected_n && *expected_n != info.n) {
      throw VocabMismatchError("vocab mismatch: server has " + std::to_string(info.n) +
                               " tokens, expected " + std::to_string(*expected_n));
    }
  }

  const Vocabulary& vocabulary() const override { return vocab_; }
  bool concurrent_safe() const override { return false; }

  LogitVector next_logits(const Context& context, Side side, std::size_t) override {
    auto values = client_->logits(side, context.token_ids);
    if (values.size() != vocab_.size()) {
      throw VocabMismatchError("vocab mismatch: server returned " + std::to_string(values.size()) +
                               " logits, handshake declared " + std::to_string(vocab_.size()));
    }
    try {
      return LogitVector(std::move(values));
    } catch (const std::invalid_argument& e) {
      throw ProtocolError(std::string("invalid logits from server: ") + e.what());
    }
  }

 private:
  std::shared_ptr<RemoteClient> client_;
  Vocabulary vocab_;
};

}  // namespace contrast::wire
