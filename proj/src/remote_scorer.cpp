// Copyright 2026 The Salience Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "salience/remote_scorer.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>

#include "salience/errors.hpp"

namespace salience {

namespace {

std::string errno_text(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

// Line reader/writer over a pair of file descriptors.
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}
  ~FdChannel() override {
    if (read_fd_ >= 0) ::close(read_fd_);
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  }

  void write_line(const std::string& line) override {
    std::string data = line;
    data.push_back('\n');
    std::size_t sent = 0;
    while (sent < data.size()) {
      const ssize_t n = do_write(data.data() + sent, data.size() - sent);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerUnavailable(errno_text("write to scorer failed"));
      }
      sent += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw ScorerUnavailable("timed out waiting for scorer response");
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw ScorerUnavailable(errno_text("poll failed"));
      }
      if (ready == 0) continue;
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ScorerUnavailable(errno_text("read from scorer failed"));
      }
      if (n == 0) throw ScorerUnavailable("scorer closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  virtual ssize_t do_write(const char* data, std::size_t len) {
    return ::write(write_fd_, data, len);
  }

  int read_fd_;
  int write_fd_;
  std::string buffer_;
};

class SocketChannel final : public FdChannel {
 public:
  explicit SocketChannel(int fd) : FdChannel(fd, fd) {}

 protected:
  ssize_t do_write(const char* data, std::size_t len) override {
    return ::send(write_fd_, data, len, MSG_NOSIGNAL);
  }
};

class ProcessChannel final : public FdChannel {
 public:
  ProcessChannel(int read_fd, int write_fd, pid_t pid) : FdChannel(read_fd, write_fd), pid_(pid) {}
  ~ProcessChannel() override {
    ::close(write_fd_);
    write_fd_ = -1;
    int status = 0;
    // Give the child a moment to exit on EOF before forcing it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      ::usleep(2000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }

 private:
  pid_t pid_;
};

}  // namespace

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, int port,
                                         std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port_s = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), port_s.c_str(), &hints, &res); rc != 0) {
    throw ScorerUnavailable("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    const int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      pollfd pfd{fd, POLLOUT, 0};
      rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
      if (rc == 1) {
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        rc = err == 0 ? 0 : -1;
        errno = err;
      } else {
        if (rc == 0) errno = ETIMEDOUT;
        rc = -1;
      }
    }
    if (rc == 0) {
      ::fcntl(fd, F_SETFL, flags);
      ::freeaddrinfo(res);
      return std::make_unique<SocketChannel>(fd);
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw ScorerUnavailable("cannot connect to " + host + ":" + port_s + ": " + last_error);
}

std::unique_ptr<LineChannel> spawn_process(const std::string& command) {
  ::signal(SIGPIPE, SIG_IGN);
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw ScorerUnavailable(errno_text("pipe"));
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ScorerUnavailable(errno_text("pipe"));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw ScorerUnavailable(errno_text("fork"));
  if (pid == 0) {
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
  return std::make_unique<ProcessChannel>(from_child[0], to_child[1], pid);
}

RemoteScorer::RemoteScorer(RemoteScorerOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw ConfigError("remote scorer needs an endpoint");
  if (options_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

RemoteScorer::~RemoteScorer() = default;

std::unique_ptr<LineChannel> RemoteScorer::open() const {
  const std::string& ep = options_.endpoint;
  if (ep.rfind("stdio:", 0) == 0) return spawn_process(ep.substr(6));
  std::string hostport = ep.rfind("tcp://", 0) == 0 ? ep.substr(6) : ep;
  const auto colon = hostport.rfind(':');
  if (colon == std::string::npos) throw ConfigError("endpoint '" + ep + "' lacks a port");
  int port = 0;
  try {
    port = std::stoi(hostport.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("endpoint '" + ep + "' has a bad port");
  }
  return connect_tcp(hostport.substr(0, colon), port, options_.timeout);
}

ScoreResponse RemoteScorer::score(const ScoreRequest& request) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::string id = "r" + std::to_string(next_id_++);
  const std::string line = request_to_json(request, id).dump();
  std::string last_cause;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    try {
      if (!channel_) channel_ = open();
      channel_->write_line(line);
      const std::string reply = channel_->read_line(options_.timeout);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(reply);
      } catch (const nlohmann::json::exception& e) {
        throw ProtocolError("<root>", std::string("invalid JSON: ") + e.what());
      }
      ScoreResponse response =
          response_from_json(j, id, request.passages.size(), request.want_embedding);
      fingerprint_ = response.fingerprint;
      if (response.truncated) {
        warnings_.push_back("TruncationWarning: request " + id + " exceeded the scorer's maximum length");
        std::cerr << "warning: " << warnings_.back() << '\n';
      }
      return response;
    } catch (const ScorerUnavailable& e) {
      last_cause = e.what();
      channel_.reset();
    } catch (const ProtocolError&) {
      channel_.reset();
      throw;
    }
  }
  throw ScorerUnavailable(options_.endpoint + ": " + last_cause);
}

std::string RemoteScorer::fingerprint() const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!fingerprint_.empty()) return fingerprint_;
  }
  ScoreRequest probe;
  probe.target = ".";
  return score(probe).fingerprint;
}

std::vector<std::string> RemoteScorer::warnings() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return warnings_;
}

}  // namespace salience
