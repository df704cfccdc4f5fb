#pragma once

#include "onlp/protocol.hpp"

#include <chrono>
#include <string_view>

namespace onlp::protocol::detail {

using Clock = std::chrono::steady_clock;

/// Owns a file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { reset(); }
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = o.release();
    }
    return *this;
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const noexcept { return fd_; }
  int release() noexcept {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void reset() noexcept;

 private:
  int fd_ = -1;
};

void set_nonblocking(int fd);

/// Opens a TCP connection before the deadline. ConnectError when refused or
/// unresolvable, TimeoutError when the deadline passes.
Socket connect_to(const Endpoint& ep, Clock::time_point deadline);

/// TimeoutError when the deadline passes, ProtocolError when the peer closes.
void send_all(int fd, std::string_view bytes, Clock::time_point deadline);
WireMessage read_message(int fd, Clock::time_point deadline);

}  // namespace onlp::protocol::detail
