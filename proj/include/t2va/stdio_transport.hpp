// Copyright 2026 The t2va Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <csignal>
#include <cerrno>
#include <mutex>
#include <string>
#include <string_view>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "t2va/error.hpp"
#include "t2va/scorer.hpp"

namespace t2va {

/// Talks to a scorer subprocess over newline-delimited JSON on its
/// stdin/stdout. The command runs under /bin/sh. One request in flight at a
/// time; concurrent callers serialize on the pipe.
class StdioTransport : public Transport {
 public:
  explicit StdioTransport(const std::string& command) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      throw Error(ErrorCode::kTransport, "pipe() failed");
    }
    pid_ = fork();
    if (pid_ < 0) throw Error(ErrorCode::kTransport, "fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
  }

  StdioTransport(const StdioTransport&) = delete;
  StdioTransport& operator=(const StdioTransport&) = delete;

  ~StdioTransport() override {
    if (write_fd_ >= 0) close(write_fd_);
    if (read_fd_ >= 0) close(read_fd_);
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  std::string exchange(std::string_view op, const Json& body) override {
    Json request;
    request["op"] = std::string(op);
    for (const auto& [k, v] : body.items()) request[k] = v;
    const std::string line = request.dump() + "\n";

    std::lock_guard lock(mu_);
    std::size_t written = 0;
    while (written < line.size()) {
      const ssize_t n = write(write_fd_, line.data() + written, line.size() - written);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(ErrorCode::kTransport, "scorer process closed its input");
      written += static_cast<std::size_t>(n);
    }
    return read_line();
  }

 private:
  std::string read_line() {
    while (true) {
      if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        return line;
      }
      char chunk[4096];
      const ssize_t n = read(read_fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(ErrorCode::kTransport, "scorer process closed its output");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::string buffer_;
  std::mutex mu_;
};

}  // namespace t2va
