#include "onlp/protocol.hpp"

#include "socket.hpp"

namespace onlp::protocol {

using detail::Clock;

WireMessage exchange(const std::string& address, const std::string& bytes,
                     std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  const detail::Socket conn = detail::connect_to(parse_endpoint(address), deadline);
  detail::send_all(conn.fd(), bytes, deadline);
  return detail::read_message(conn.fd(), deadline);
}

SubmitResult submit(const std::string& address, const ProblemDocument& doc,
                    std::chrono::milliseconds timeout) {
  const std::string frame = encode({MessageType::SubmitProblem, serialize_problem(doc)});
  const auto t0 = Clock::now();
  const WireMessage reply = exchange(address, frame, timeout);
  SubmitResult result;
  result.round_trip = Clock::now() - t0;
  switch (reply.type) {
    case MessageType::Solution:
      result.solution = parse_solution(reply.body);
      return result;
    case MessageType::Error:
      throw RemoteError("server error: " + reply.body);
    case MessageType::SubmitProblem:
      break;
  }
  throw ProtocolError("unexpected SubmitProblem message in reply");
}

}  // namespace onlp::protocol
