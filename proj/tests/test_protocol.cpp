#include "support.hpp"

#include "onlp/errors.hpp"
#include "onlp/generator.hpp"
#include "onlp/protocol.hpp"
#include "onlp/transform.hpp"

#include <doctest.h>

#include <chrono>
#include <future>
#include <thread>
#include <vector>

using namespace onlp;
using namespace onlp::protocol;
using namespace std::chrono_literals;
using test::vec;

namespace {

/// Server running on a background thread for the lifetime of the fixture.
struct LoopbackServer {
  Server server;
  std::thread thread;

  explicit LoopbackServer(ServerConfig cfg = {}) : server(std::move(cfg)) {
    thread = std::thread([this] { server.run(); });
  }
  ~LoopbackServer() {
    server.stop();
    thread.join();
  }
};

ProblemDocument toy_document() { return plain_document(test::toy_problem(), vec({1, 0})); }

ProblemDocument masked_document(std::size_t n, std::uint64_t seed) {
  const std::size_t k = n * 3 / 10;
  const bench::GeneratedProblem g = bench::generate_feasible({n, k, k, seed});
  transform::KeyParams params;
  params.seed = seed;
  const transform::SecretKey key = transform::keygen({n, k, k}, params);
  return encrypted_document(transform::encrypt(g.problem, key), transform::encrypt_point(g.x0, key));
}

}  // namespace

TEST_CASE("problem documents round-trip byte for byte") {
  Rng rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(15);
    const bench::GeneratedProblem g =
        bench::generate_feasible({n, rng.below(n / 2 + 1), rng.below(n / 2 + 1), rng.next_u64()});
    std::vector<Inequality> ineqs = g.problem.ineqs();
    ineqs.push_back({test::random_form(rng, static_cast<Eigen::Index>(n), false), 1e6});
    const NlpProblem p(g.problem.objective(), g.problem.eq_matrix(), g.problem.eq_rhs(), ineqs,
                       g.problem.lower(), g.problem.upper());
    const ProblemDocument doc = trial % 2 == 0 ? plain_document(p, g.x0) : plain_document(p);
    const std::string text = serialize_problem(doc);
    const ProblemDocument back = parse_problem(text);
    CHECK(serialize_problem(back) == text);
    CHECK(back.start_point.has_value() == doc.start_point.has_value());
    CHECK(back.problem.objective().quad_dense() == p.objective().quad_dense());
    CHECK(back.problem.ineqs().back().form.quad_dense() == p.ineqs().back().form.quad_dense());
  }
}

TEST_CASE("documents with no inequalities keep an empty array") {
  const NlpProblem p(QuadraticForm::diagonal(vec({2, 2}), vec({0, 0})), test::mat({{1, 1}}),
                     vec({1}), {}, vec({-1, -1}), vec({1, 1}));
  const std::string text = serialize_problem(plain_document(p));
  CHECK(text.find("\"inequalities\":[]") != std::string::npos);
  CHECK(parse_problem(text).problem.l() == 0);
}

TEST_CASE("encrypted kind survives the round trip") {
  const ProblemDocument doc = masked_document(10, 3);
  const ProblemDocument back = parse_problem(serialize_problem(doc));
  CHECK(back.kind == ProblemKind::Encrypted);
  CHECK(*back.start_point == *doc.start_point);
}

TEST_CASE("every truncation of a document is a parse error") {
  std::string text = serialize_problem(toy_document());
  while (!text.empty() && text.back() == '\n') text.pop_back();
  for (std::size_t len = 0; len < text.size(); ++len) {
    CHECK_THROWS_AS(parse_problem(text.substr(0, len)), ParseError);
  }
}

TEST_CASE("parse errors name the offending field") {
  std::string text = serialize_problem(toy_document());
  auto expect_path = [](const std::string& doc, const std::string& path) {
    try {
      parse_problem(doc);
      FAIL("no exception");
    } catch (const ParseError& e) {
      CHECK(e.field_path().find(path) != std::string::npos);
    }
  };
  std::string missing = text;
  missing.replace(missing.find("\"bounds\""), 8, "\"bouns\"");
  expect_path(missing, "bounds");

  std::string wrong_type = text;
  wrong_type.replace(wrong_type.find("\"rhs\":[1.0]"), 11, "\"rhs\":[\"x\"]");
  expect_path(wrong_type, "rhs");

  std::string bad_version = text;
  bad_version.replace(bad_version.find("\"version\":1"), 11, "\"version\":9");
  expect_path(bad_version, "version");

  // Rank-deficient data is rejected as an invalid problem.
  const NlpProblem bad(NlpProblem::TrustedRank{}, QuadraticForm::linear(vec({0, 0})),
                       test::mat({{1, 1}, {2, 2}}), vec({1, 2}), {}, vec({-1, -1}), vec({1, 1}));
  CHECK_THROWS_AS(parse_problem(serialize_problem(plain_document(bad))), ParseError);
}

TEST_CASE("solution documents round-trip") {
  SolutionDocument s;
  s.status = SolveStatus::Solved;
  s.termination = grg::Termination::DirectionBelowEps;
  s.z_star = vec({0.5, 0.1 + 0.2, -1e-300});
  s.objective_value = 0.5;
  s.iterations = 12;
  s.solver_wall_time_ms = 3.25;
  const std::string text = serialize_solution(s);
  const SolutionDocument back = parse_solution(text);
  CHECK(back.solved());
  CHECK(back.z_star == s.z_star);
  CHECK(*back.termination == grg::Termination::DirectionBelowEps);
  CHECK(serialize_solution(back) == text);

  SolutionDocument f;
  f.reason = "no feasible start";
  const SolutionDocument fb = parse_solution(serialize_solution(f));
  CHECK_FALSE(fb.solved());
  CHECK_FALSE(fb.termination.has_value());
  CHECK(fb.reason == f.reason);

  SolutionDocument empty;
  empty.status = SolveStatus::Solved;
  CHECK_THROWS_AS(serialize_solution(empty), DomainError);
}

TEST_CASE("wire framing") {
  const WireMessage msg{MessageType::SubmitProblem, "hello"};
  const std::string bytes = encode(msg);
  CHECK(bytes.size() == kHeaderBytes + 5);
  CHECK(bytes.substr(0, 5) == std::string("\x00\x00\x00\x05\x01", 5));

  std::size_t consumed = 0;
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    CHECK_FALSE(decode(std::string_view(bytes).substr(0, len), consumed).has_value());
  }
  const auto back = decode(bytes + "trailing", consumed);
  REQUIRE(back.has_value());
  CHECK(consumed == bytes.size());
  CHECK(back->type == MessageType::SubmitProblem);
  CHECK(back->body == "hello");

  std::string unknown = bytes;
  unknown[4] = '\x07';
  CHECK_THROWS_AS(decode(unknown, consumed), ProtocolError);

  CHECK(parse_endpoint("127.0.0.1:7878").port == 7878);
  CHECK(parse_endpoint("example.org:1").host == "example.org");
  CHECK_THROWS_AS(parse_endpoint("localhost"), DomainError);
  CHECK_THROWS_AS(parse_endpoint("localhost:99999"), DomainError);
}

TEST_CASE("solve_document on the toy problem") {
  const SolutionDocument s = solve_document(toy_document(), {});
  REQUIRE(s.solved());
  CHECK(std::abs(s.z_star[0] - 0.5) <= 1e-6);
  CHECK(std::abs(s.z_star[1] - 0.5) <= 1e-6);
  CHECK(std::abs(s.objective_value - 0.5) <= 1e-6);

  // Without a start point the box center is projected.
  const SolutionDocument c = solve_document(plain_document(test::toy_problem()), {});
  REQUIRE(c.solved());
  CHECK(std::abs(c.objective_value - 0.5) <= 1e-6);
}

TEST_CASE("masked and plain solves follow the same path") {
  Rng rng(61);
  std::size_t same_count = 0;
  const int trials = 30;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t n = 5 + rng.below(60);
    const std::size_t k = n * 3 / 10;
    const bench::GeneratedProblem g = bench::generate_feasible({n, k, k, rng.next_u64()});
    transform::KeyParams params;
    params.seed = rng.next_u64();
    const transform::SecretKey key = transform::keygen({n, k, k}, params);
    const SolutionDocument plain = solve_document(plain_document(g.problem, g.x0), {});
    const SolutionDocument masked = solve_document(
        encrypted_document(transform::encrypt(g.problem, key), transform::encrypt_point(g.x0, key)), {});
    REQUIRE(plain.solved());
    REQUIRE(masked.solved());
    CHECK(std::abs(masked.objective_value - plain.objective_value) <=
          1e-9 * std::max(1.0, std::abs(plain.objective_value)));
    same_count += masked.iterations == plain.iterations ? 1 : 0;
    const auto longer = std::max(masked.iterations, plain.iterations);
    const auto shorter = std::min(masked.iterations, plain.iterations);
    CHECK(longer - shorter <= longer / 4 + 1);
  }
  // Rounding differs between the two and shows up late in a run.
  CHECK(same_count >= trials / 2);
}

TEST_CASE("loopback server solves and survives garbage") {
  LoopbackServer srv;
  const std::string addr = srv.server.address();

  const SubmitResult r = submit(addr, toy_document(), 10s);
  REQUIRE(r.solution.solved());
  CHECK(std::abs(r.solution.objective_value - 0.5) <= 1e-6);
  CHECK(r.round_trip.count() > 0.0);

  const WireMessage junk = exchange(addr, encode({MessageType::SubmitProblem, "{not json"}), 10s);
  CHECK(junk.type == MessageType::Error);
  CHECK(junk.body.find("malformed") != std::string::npos);

  const WireMessage wrong = exchange(addr, encode({MessageType::Solution, "{}"}), 10s);
  CHECK(wrong.type == MessageType::Error);

  const WireMessage bad_type = exchange(addr, std::string("\x00\x00\x00\x01\x09x", 6), 10s);
  CHECK(bad_type.type == MessageType::Error);

  CHECK(submit(addr, toy_document(), 10s).solution.solved());
  // The counter moves after the reply is written.
  for (int i = 0; i < 100 && srv.server.requests_served() < 2; ++i) std::this_thread::sleep_for(10ms);
  CHECK(srv.server.requests_served() == 2);
}

TEST_CASE("server answers match in-process solves under concurrency") {
  LoopbackServer srv;
  const std::string addr = srv.server.address();
  std::vector<ProblemDocument> docs;
  for (std::uint64_t s = 0; s < 6; ++s) docs.push_back(masked_document(20 + 5 * s, s));

  std::vector<std::future<SubmitResult>> pending;
  for (const ProblemDocument& d : docs) {
    pending.push_back(std::async(std::launch::async, [&addr, &d] { return submit(addr, d, 60s); }));
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const SolutionDocument remote = pending[i].get().solution;
    const SolutionDocument local = solve_document(docs[i], {});
    CHECK(remote.solved() == local.solved());
    CHECK(remote.z_star == local.z_star);
    CHECK(remote.objective_value == local.objective_value);
    CHECK(remote.iterations == local.iterations);
  }
}

TEST_CASE("client errors") {
  std::uint16_t closed_port = 0;
  {
    Server probe(ServerConfig{});
    closed_port = probe.port();
  }
  CHECK_THROWS_AS(submit("127.0.0.1:" + std::to_string(closed_port), toy_document(), 2s),
                  ConnectError);

  LoopbackServer srv;
  const ProblemDocument slow = masked_document(200, 9);
  CHECK_THROWS_AS(submit(srv.server.address(), slow, 1ms), TimeoutError);
  CHECK(submit(srv.server.address(), toy_document(), 10s).solution.solved());
}
