#include "onlp/protocol.hpp"

#include "socket.hpp"

#include <spdlog/spdlog.h>

#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace onlp::protocol {

using detail::Clock;
using detail::Socket;

namespace {

constexpr int kBacklog = 64;
constexpr int kAcceptPollMs = 50;

void reply_error(int fd, const std::string& reason, Clock::time_point deadline) {
  try {
    detail::send_all(fd, encode({MessageType::Error, reason}), deadline);
  } catch (const Error& e) {
    spdlog::debug("could not deliver error reply: {}", e.what());
  }
}

}  // namespace

Server::Server(ServerConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.solver.validate();
  const Endpoint ep = parse_endpoint(cfg_.bind);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(ep.port);
  if (const int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw ConnectError("cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr && listen_fd_ < 0; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (s.fd() < 0) continue;
    const int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(s.fd(), kBacklog) == 0) {
      listen_fd_ = s.release();
    } else {
      last_error = std::strerror(errno);
    }
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) throw ConnectError("cannot listen on " + cfg_.bind + ": " + last_error);
  detail::set_nonblocking(listen_fd_);

  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET) {
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  } else {
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
}

Server::~Server() {
  stop();
  reap(true);
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::string Server::address() const {
  return parse_endpoint(cfg_.bind).host + ":" + std::to_string(port_);
}

void Server::run() {
  spdlog::info("serving on {}", address());
  while (!stop_.load()) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, kAcceptPollMs);
    if (rc > 0) {
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd >= 0) {
        auto worker = std::make_unique<Worker>();
        Worker* w = worker.get();
        w->thread = std::thread([this, fd, w] {
          handle(fd);
          w->done.store(true);
        });
        workers_.push_back(std::move(worker));
      } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
        spdlog::warn("accept: {}", std::strerror(errno));
      }
    } else if (rc < 0 && errno != EINTR) {
      spdlog::error("poll: {}", std::strerror(errno));
      break;
    }
    reap(false);
  }
  spdlog::info("shutting down, {} request(s) in flight", workers_.size());
  reap(true);
}

void Server::reap(bool all) {
  for (auto it = workers_.begin(); it != workers_.end();) {
    if (all || (*it)->done.load()) {
      if ((*it)->thread.joinable()) (*it)->thread.join();
      it = workers_.erase(it);
    } else {
      ++it;
    }
  }
}

void Server::handle(int raw_fd) {
  Socket conn(raw_fd);
  try {
    detail::set_nonblocking(conn.fd());
    const auto read_deadline = Clock::now() + cfg_.io_timeout;
    WireMessage request;
    try {
      request = detail::read_message(conn.fd(), read_deadline);
    } catch (const ProtocolError& e) {
      spdlog::info("rejecting request: {}", e.what());
      reply_error(conn.fd(), e.what(), Clock::now() + cfg_.io_timeout);
      return;
    }
    if (request.type != MessageType::SubmitProblem) {
      reply_error(conn.fd(), "expected a SubmitProblem message", Clock::now() + cfg_.io_timeout);
      return;
    }
    ProblemDocument doc;
    try {
      doc = parse_problem(request.body);
    } catch (const ParseError& e) {
      spdlog::info("rejecting document: {}", e.what());
      reply_error(conn.fd(), e.what(), Clock::now() + cfg_.io_timeout);
      return;
    }
    const SolutionDocument solution = solve_document(doc, cfg_.solver);
    detail::send_all(conn.fd(), encode({MessageType::Solution, serialize_solution(solution)}),
                     Clock::now() + cfg_.io_timeout);
    served_.fetch_add(1);
    spdlog::info("answered n={} m={} l={}: {} in {:.1f} ms", doc.problem.n(), doc.problem.m(),
                 doc.problem.l(), to_string(solution.status), solution.solver_wall_time_ms);
  } catch (const std::exception& e) {
    spdlog::warn("connection dropped: {}", e.what());
  }
}

}  // namespace onlp::protocol
