#pragma once

// Loopback protocol between the client and the cloud solver.
//
// Frame: 4-byte big-endian body length, 1-byte message type, UTF-8 body.
// One request per connection: the client sends SubmitProblem and the server
// answers with Solution or Error, then closes.
//
// Nothing here knows about keys or decryption; the server only ever sees the
// masked problem.

#include "onlp/document.hpp"
#include "onlp/errors.hpp"
#include "onlp/grg.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

namespace onlp::protocol {

/// Malformed frame: unknown message type, oversized body, early close.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public Error {
 public:
  using Error::Error;
};

class ConnectError : public Error {
 public:
  using Error::Error;
};

/// The server answered with an Error message.
class RemoteError : public Error {
 public:
  using Error::Error;
};

enum class MessageType : std::uint8_t {
  SubmitProblem = 0x01,
  Solution = 0x02,
  Error = 0x03,
};

struct WireMessage {
  MessageType type = MessageType::Error;
  std::string body;
};

inline constexpr std::size_t kHeaderBytes = 5;
/// Largest body accepted; anything above is treated as a corrupt prefix.
inline constexpr std::uint32_t kMaxBodyBytes = 1u << 30;

std::string encode(const WireMessage& msg);

/// Decodes one frame from the front of buffer. Returns nullopt when the
/// buffer does not yet hold a full frame; consumed is set to the frame size
/// otherwise. Throws ProtocolError for an unknown type or an oversized body.
std::optional<WireMessage> decode(std::string_view buffer, std::size_t& consumed);

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// "HOST:PORT"; DomainError when malformed.
Endpoint parse_endpoint(const std::string& address);

/// The work the server does for one problem, also used for in-process runs
/// so both paths give identical answers: augment, start from the document's
/// start point (projected onto the constraints when it is slightly off, or
/// found from the box center when absent) and run the reduced gradient
/// method. Never throws for solver failures; those come back as Failed.
SolutionDocument solve_document(const ProblemDocument& doc, const grg::SolverConfig& cfg);

struct ServerConfig {
  std::string bind = "127.0.0.1:0";
  grg::SolverConfig solver;
  /// Limit for reading a request and writing the reply.
  std::chrono::milliseconds io_timeout{60000};
};

/// Multi-connection server, one worker thread per connection. Workers share
/// nothing mutable.
class Server {
 public:
  /// Binds and listens; throws ConnectError when the address is unusable.
  explicit Server(ServerConfig cfg);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  std::string address() const;

  /// Accepts connections until stop() is called, then waits for in-flight
  /// requests to finish.
  void run();
  /// Thread-safe and async-signal-safe.
  void stop() noexcept { stop_.store(true); }
  std::size_t requests_served() const noexcept { return served_.load(); }

 private:
  struct Worker {
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void handle(int fd);
  void reap(bool all);

  ServerConfig cfg_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::atomic<std::size_t> served_{0};
  std::list<std::unique_ptr<Worker>> workers_;
};

struct SubmitResult {
  SolutionDocument solution;
  /// Wall time from connecting to receiving the full reply.
  std::chrono::duration<double> round_trip{0.0};
};

/// Sends doc and waits for the reply. The timeout covers the whole exchange.
/// Throws ConnectError, TimeoutError, ProtocolError, RemoteError for an
/// Error reply and ParseError for an unreadable solution.
SubmitResult submit(const std::string& address, const ProblemDocument& doc,
                    std::chrono::milliseconds timeout);

/// Sends a raw frame and returns the raw reply; for tests and diagnostics.
WireMessage exchange(const std::string& address, const std::string& bytes,
                     std::chrono::milliseconds timeout);

}  // namespace onlp::protocol
