#include "onlp/protocol.hpp"

#include "socket.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>

namespace onlp::protocol {

std::string encode(const WireMessage& msg) {
  if (msg.body.size() > kMaxBodyBytes) throw DomainError("message body too large");
  const auto len = static_cast<std::uint32_t>(msg.body.size());
  std::string out;
  out.reserve(kHeaderBytes + msg.body.size());
  out += static_cast<char>((len >> 24) & 0xff);
  out += static_cast<char>((len >> 16) & 0xff);
  out += static_cast<char>((len >> 8) & 0xff);
  out += static_cast<char>(len & 0xff);
  out += static_cast<char>(msg.type);
  out += msg.body;
  return out;
}

namespace {

std::uint32_t read_length(std::string_view header) {
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len = (len << 8) | static_cast<unsigned char>(header[i]);
  return len;
}

MessageType read_type(unsigned char byte) {
  switch (byte) {
    case 0x01: return MessageType::SubmitProblem;
    case 0x02: return MessageType::Solution;
    case 0x03: return MessageType::Error;
    default: break;
  }
  char hex[8];
  std::snprintf(hex, sizeof hex, "0x%02x", byte);
  throw ProtocolError(std::string("unknown message type ") + hex);
}

}  // namespace

std::optional<WireMessage> decode(std::string_view buffer, std::size_t& consumed) {
  if (buffer.size() < kHeaderBytes) return std::nullopt;
  const std::uint32_t len = read_length(buffer);
  if (len > kMaxBodyBytes) {
    throw ProtocolError("frame length " + std::to_string(len) + " exceeds the limit");
  }
  const MessageType type = read_type(static_cast<unsigned char>(buffer[4]));
  if (buffer.size() < kHeaderBytes + len) return std::nullopt;
  consumed = kHeaderBytes + len;
  return WireMessage{type, std::string(buffer.substr(kHeaderBytes, len))};
}

Endpoint parse_endpoint(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw DomainError("address '" + address + "' is not HOST:PORT");
  }
  Endpoint ep;
  ep.host = address.substr(0, colon);
  unsigned port = 0;
  const char* first = address.data() + colon + 1;
  const char* last = address.data() + address.size();
  const auto [end, ec] = std::from_chars(first, last, port);
  if (ec != std::errc() || end != last || port > 65535) {
    throw DomainError("address '" + address + "' has an invalid port");
  }
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

namespace detail {

void Socket::reset() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void set_nonblocking(int fd) {
  const int flags = ::fcntl(fd, F_GETFL, 0);
  if (flags < 0 || ::fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0) {
    throw Error(std::string("fcntl: ") + std::strerror(errno));
  }
}

namespace {

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return static_cast<int>(std::clamp<long long>(left.count(), 0, 1000 * 60 * 60));
}

/// Waits for events on fd; throws TimeoutError when the deadline passes.
void wait_for(int fd, short events, Clock::time_point deadline) {
  for (;;) {
    const int ms = remaining_ms(deadline);
    if (ms == 0 && Clock::now() >= deadline) throw TimeoutError("deadline passed");
    pollfd p{fd, events, 0};
    const int rc = ::poll(&p, 1, ms);
    if (rc > 0) return;
    if (rc == 0) continue;
    if (errno != EINTR) throw Error(std::string("poll: ") + std::strerror(errno));
  }
}

void read_exact(int fd, char* out, std::size_t len, Clock::time_point deadline) {
  std::size_t got = 0;
  while (got < len) {
    const ssize_t rc = ::recv(fd, out + got, len - got, 0);
    if (rc > 0) {
      got += static_cast<std::size_t>(rc);
    } else if (rc == 0) {
      throw ProtocolError("connection closed after " + std::to_string(got) + " of " +
                          std::to_string(len) + " bytes");
    } else if (errno == EAGAIN || errno == EWOULDBLOCK) {
      wait_for(fd, POLLIN, deadline);
    } else if (errno != EINTR) {
      throw ProtocolError(std::string("recv: ") + std::strerror(errno));
    }
  }
}

}  // namespace

Socket connect_to(const Endpoint& ep, Clock::time_point deadline) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (const int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw ConnectError("cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (s.fd() < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    set_nonblocking(s.fd());
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      try {
        wait_for(s.fd(), POLLOUT, deadline);
      } catch (...) {
        ::freeaddrinfo(res);
        throw;
      }
      int err = 0;
      socklen_t len = sizeof err;
      ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    }
    if (rc == 0) {
      ::freeaddrinfo(res);
      const int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      return s;
    }
    last_error = std::strerror(errno);
  }
  ::freeaddrinfo(res);
  throw ConnectError("cannot connect to " + ep.host + ":" + port + ": " + last_error);
}

void send_all(int fd, std::string_view bytes, Clock::time_point deadline) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t rc = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (rc >= 0) {
      sent += static_cast<std::size_t>(rc);
    } else if (errno == EAGAIN || errno == EWOULDBLOCK) {
      wait_for(fd, POLLOUT, deadline);
    } else if (errno != EINTR) {
      throw ProtocolError(std::string("send: ") + std::strerror(errno));
    }
  }
}

WireMessage read_message(int fd, Clock::time_point deadline) {
  char header[kHeaderBytes];
  read_exact(fd, header, kHeaderBytes, deadline);
  const std::uint32_t len = read_length(std::string_view(header, kHeaderBytes));
  if (len > kMaxBodyBytes) {
    throw ProtocolError("frame length " + std::to_string(len) + " exceeds the limit");
  }
  WireMessage msg{read_type(static_cast<unsigned char>(header[4])), std::string(len, '\0')};
  read_exact(fd, msg.body.data(), len, deadline);
  return msg;
}

}  // namespace detail

}  // namespace onlp::protocol
