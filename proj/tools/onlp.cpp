// onlp: client-side command line for the outsourcing pipeline.

#include "cli_support.hpp"

#include "onlp/bench.hpp"
#include "onlp/distcheck.hpp"
#include "onlp/document.hpp"
#include "onlp/generator.hpp"
#include "onlp/key_io.hpp"
#include "onlp/transform.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace onlp;
using cli::read_file;
using cli::write_file;

std::string format_point(const Vector& v) {
  constexpr Eigen::Index kShown = 8;
  std::ostringstream os;
  os.precision(10);
  os << "(";
  for (Eigen::Index i = 0; i < std::min(v.size(), kShown); ++i) os << (i ? ", " : "") << v[i];
  if (v.size() > kShown) os << ", ... [" << v.size() << " entries]";
  os << ")";
  return os.str();
}

struct Flags {
  std::size_t n = 0, m = 0, l = 0;
  std::uint64_t seed = 0;
  double half_width = 10.0;
  std::string out, key, problem, solution, server, csv;
  double tol = 1e-6;
  std::size_t trials = 0;
  transform::KeyParams key_params;
  grg::SolverConfig solver;
  std::string direction = "conjugate";
  std::string bind = "127.0.0.1:7878";
  long timeout_ms = 0;
  std::vector<std::size_t> sizes;
  double ratio = 0.3;
  double entry = 5.0;
  bool structure = false;
  std::size_t size = 10;
};

int cmd_gen(const Flags& f) {
  const bench::GeneratedProblem g =
      bench::generate_feasible({f.n, f.m, f.l, f.seed, f.half_width});
  write_file(f.out, protocol::serialize_problem(protocol::plain_document(g.problem, g.x0)));
  return cli::kExitOk;
}

int cmd_keygen(const Flags& f) {
  transform::Dims dims{f.n, f.m, f.l};
  if (!f.problem.empty()) {
    const protocol::ProblemDocument doc = protocol::parse_problem(read_file(f.problem));
    dims = {doc.problem.n(), doc.problem.m(), doc.problem.l()};
  } else if (f.n == 0) {
    throw cli::UsageError("keygen needs --problem or --n");
  }
  transform::KeyParams params = f.key_params;
  params.seed = f.seed;
  write_file(f.out, transform::serialize_key(transform::keygen(dims, params)));
  return cli::kExitOk;
}

int cmd_encrypt(const Flags& f) {
  const protocol::ProblemDocument doc = protocol::parse_problem(read_file(f.problem));
  if (doc.kind != protocol::ProblemKind::Plain) {
    throw DomainError("'" + f.problem + "' is already encrypted");
  }
  const transform::SecretKey key = transform::parse_key(read_file(f.key));
  const EncryptedProblem masked = transform::encrypt(doc.problem, key);
  std::optional<Vector> start;
  if (doc.start_point) start = transform::encrypt_point(*doc.start_point, key);
  write_file(f.out, protocol::serialize_problem(protocol::encrypted_document(masked, start)));
  return cli::kExitOk;
}

grg::SolverConfig solver_config(const Flags& f) {
  grg::SolverConfig cfg = f.solver;
  const auto rule = grg::direction_from_string(f.direction);
  if (!rule) throw cli::UsageError("unknown direction rule '" + f.direction + "'");
  cfg.direction = *rule;
  return cfg;
}

int cmd_solve(const Flags& f) {
  const protocol::ProblemDocument doc = protocol::parse_problem(read_file(f.problem));
  const protocol::SolutionDocument sol = protocol::solve_document(doc, solver_config(f));
  write_file(f.out, protocol::serialize_solution(sol));
  if (!sol.solved()) {
    std::fprintf(stderr, "solve failed: %s\n", sol.reason.c_str());
    return cli::kExitFailure;
  }
  return cli::kExitOk;
}

protocol::SolutionDocument decrypted(const protocol::SolutionDocument& sol,
                                     const transform::SecretKey& key) {
  if (sol.z_star.size() == 0) throw DomainError("the solution document holds no point");
  protocol::SolutionDocument out = sol;
  out.z_star = transform::decrypt(sol.z_star, key);
  return out;
}

int cmd_decrypt(const Flags& f) {
  const protocol::SolutionDocument sol = protocol::parse_solution(read_file(f.solution));
  const transform::SecretKey key = transform::parse_key(read_file(f.key));
  const protocol::SolutionDocument x = decrypted(sol, key);
  if (!f.out.empty()) write_file(f.out, protocol::serialize_solution(x));
  std::printf("x* = %s\n", format_point(x.z_star).c_str());
  return cli::kExitOk;
}

int cmd_verify(const Flags& f) {
  const protocol::ProblemDocument doc = protocol::parse_problem(read_file(f.problem));
  if (doc.kind != protocol::ProblemKind::Plain) {
    throw DomainError("verify needs the original (plain) problem");
  }
  protocol::SolutionDocument sol = protocol::parse_solution(read_file(f.solution));
  if (!f.key.empty()) sol = decrypted(sol, transform::parse_key(read_file(f.key)));
  if (static_cast<std::size_t>(sol.z_star.size()) != doc.problem.n()) {
    throw DomainError("solution has " + std::to_string(sol.z_star.size()) +
                      " entries, the problem has " + std::to_string(doc.problem.n()) +
                      " variables");
  }
  const transform::VerificationReport report =
      transform::verify_kkt(doc.problem, sol.z_star, f.tol);
  std::printf("x* = %s\nf(x*) = %.12g\n%s\n", format_point(sol.z_star).c_str(),
              doc.problem.objective().value(sol.z_star), report.summary().c_str());
  return report.accepted ? cli::kExitOk : cli::kExitRejected;
}

int cmd_serve(const Flags& f) {
  protocol::ServerConfig cfg;
  cfg.bind = f.bind;
  cfg.solver = solver_config(f);
  return cli::serve(cfg);
}

std::chrono::milliseconds timeout_of(const Flags& f, std::chrono::milliseconds fallback) {
  if (f.timeout_ms < 0) throw cli::UsageError("--timeout-ms must not be negative");
  return f.timeout_ms > 0 ? std::chrono::milliseconds(f.timeout_ms) : fallback;
}

int cmd_submit(const Flags& f) {
  const protocol::ProblemDocument doc = protocol::parse_problem(read_file(f.problem));
  const protocol::SubmitResult r =
      protocol::submit(f.server, doc, timeout_of(f, std::chrono::hours(1)));
  write_file(f.out, protocol::serialize_solution(r.solution));
  std::fprintf(stderr, "status %s, solve %.3f ms, round trip %.3f ms\n",
               protocol::to_string(r.solution.status).c_str(), r.solution.solver_wall_time_ms,
               r.round_trip.count() * 1000.0);
  return r.solution.solved() ? cli::kExitOk : cli::kExitFailure;
}

int cmd_bench(const Flags& f) {
  std::vector<bench::GeneratorSpec> sizes;
  if (f.m > 0 || f.l > 0) {
    for (std::size_t n : f.sizes) sizes.push_back({n, f.m, f.l, f.seed});
  } else {
    sizes = bench::ladder(f.sizes, f.ratio, f.seed);
  }
  bench::BenchOptions opts;
  opts.trials = f.trials > 0 ? f.trials : 5;
  if (!f.server.empty()) opts.server = f.server;
  opts.timeout = timeout_of(f, opts.timeout);
  opts.solver = solver_config(f);
  opts.key = f.key_params;
  opts.key.seed = f.seed;
  opts.verify_tol = f.tol;
  opts.on_record = [](const bench::BenchRecord& r) {
    std::fprintf(stderr, "%s%s\n", bench::csv_row(r).c_str(),
                 r.failed ? ("  # failed: " + r.failure).c_str() : "");
  };
  const auto records = bench::run_bench(sizes, opts);
  write_file(f.csv, bench::to_csv(records));
  for (const auto& r : records) {
    if (r.failed) return cli::kExitFailure;
  }
  return cli::kExitOk;
}

int cmd_distcheck(const Flags& f) {
  transform::KeyParams params = f.key_params;
  params.seed = f.seed;
  if (f.structure) {
    const bench::UniformityReport r =
        bench::permutation_uniformity(f.size, params, f.trials > 0 ? f.trials : 1000);
    std::printf("%s\n", r.summary().c_str());
    return r.passed() ? cli::kExitOk : cli::kExitRejected;
  }
  const bench::DistcheckReport r = bench::distcheck(f.entry, params, f.trials > 0 ? f.trials : 10000);
  std::printf("%s\n", r.summary().c_str());
  return r.passed() ? cli::kExitOk : cli::kExitRejected;
}

}  // namespace

int main(int argc, char** argv) {
  onlp::init_logging();
  CLI::App app("onlp: outsource a nonlinear program to an untrusted solver");
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("gen", "Generate a random feasible problem");
  gen->add_option("--n", f.n, "Variables")->required();
  gen->add_option("--m", f.m, "Equality rows")->capture_default_str();
  gen->add_option("--l", f.l, "Inequality rows")->capture_default_str();
  gen->add_option("--seed", f.seed)->capture_default_str();
  gen->add_option("--half-width", f.half_width, "Bound half width")->capture_default_str();
  gen->add_option("--out", f.out, "Output file (default stdout)");

  auto add_key_params = [&](CLI::App* c) {
    c->add_option("--N", f.key_params.N, "Half width of the scaling distribution")
        ->capture_default_str();
    c->add_option("--c-eq", f.key_params.c_eq)->capture_default_str();
    c->add_option("--c-ineq", f.key_params.c_ineq)->capture_default_str();
  };

  auto* keygen = app.add_subcommand("keygen", "Draw a secret key");
  keygen->add_option("--problem", f.problem, "Take dimensions from this problem");
  keygen->add_option("--n", f.n);
  keygen->add_option("--m", f.m);
  keygen->add_option("--l", f.l);
  keygen->add_option("--seed", f.seed)->capture_default_str();
  add_key_params(keygen);
  keygen->add_option("--out", f.out, "Key file (default stdout)");

  auto* encrypt = app.add_subcommand("encrypt", "Mask a plain problem");
  encrypt->add_option("--problem", f.problem)->required();
  encrypt->add_option("--key", f.key)->required();
  encrypt->add_option("--out", f.out);

  auto add_solver = [&](CLI::App* c) {
    cli::add_solver_flags(*c, f.solver);
    c->add_option("--direction", f.direction, "conjugate or steepest")->capture_default_str();
  };

  auto* solve = app.add_subcommand("solve", "Solve a problem document in-process");
  solve->add_option("--problem", f.problem)->required();
  solve->add_option("--out", f.out);
  add_solver(solve);

  auto* decrypt = app.add_subcommand("decrypt", "Map a masked solution back");
  decrypt->add_option("--solution", f.solution)->required();
  decrypt->add_option("--key", f.key)->required();
  decrypt->add_option("--out", f.out);

  auto* verify = app.add_subcommand("verify", "KKT check on the original problem (exit 2 on reject)");
  verify->add_option("--problem", f.problem, "Original problem")->required();
  verify->add_option("--solution", f.solution)->required();
  verify->add_option("--key", f.key, "Decrypt the solution with this key first");
  verify->add_option("--tol", f.tol)->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the solver server");
  serve->add_option("--bind", f.bind, "HOST:PORT")->capture_default_str();
  add_solver(serve);

  auto* submit = app.add_subcommand("submit", "Send a problem to a server");
  submit->add_option("--server", f.server, "HOST:PORT")->required();
  submit->add_option("--problem", f.problem)->required();
  submit->add_option("--out", f.out);
  submit->add_option("--timeout-ms", f.timeout_ms);

  auto* bench_cmd = app.add_subcommand("bench", "Time the pipeline over a size ladder, CSV out");
  bench_cmd->add_option("--n", f.sizes, "Sizes, e.g. --n 200,500,1000")
      ->delimiter(',')
      ->required();
  bench_cmd->add_option("--m", f.m, "Fixed equality count (default ratio * n)");
  bench_cmd->add_option("--l", f.l, "Fixed inequality count (default ratio * n)");
  bench_cmd->add_option("--ratio", f.ratio)->capture_default_str();
  bench_cmd->add_option("--seed", f.seed)->capture_default_str();
  bench_cmd->add_option("--trials", f.trials, "Trials per size (default 5)");
  bench_cmd->add_option("--server", f.server, "Solve masked problems on this server");
  bench_cmd->add_option("--timeout-ms", f.timeout_ms);
  bench_cmd->add_option("--tol", f.tol, "Verification tolerance")->capture_default_str();
  bench_cmd->add_option("--csv", f.csv, "CSV output (default stdout)");
  add_key_params(bench_cmd);
  add_solver(bench_cmd);

  auto* dist = app.add_subcommand("distcheck", "Masked-coefficient distribution checks");
  dist->add_option("--entry", f.entry, "Coefficient to mask")->capture_default_str();
  dist->add_option("--trials", f.trials, "Keys to draw (default 10000, 1000 with --structure)");
  dist->add_option("--seed", f.seed)->capture_default_str();
  dist->add_flag("--structure", f.structure, "Check row and column shuffle uniformity instead");
  dist->add_option("--size", f.size, "Problem size for --structure")->capture_default_str();
  add_key_params(dist);

  const std::vector<std::pair<CLI::App*, std::function<int(const Flags&)>>> commands = {
      {gen, cmd_gen},         {keygen, cmd_keygen}, {encrypt, cmd_encrypt},
      {solve, cmd_solve},     {decrypt, cmd_decrypt}, {verify, cmd_verify},
      {serve, cmd_serve},     {submit, cmd_submit}, {bench_cmd, cmd_bench},
      {dist, cmd_distcheck}};

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kExitOk : cli::kExitUsage;
  }
  try {
    for (const auto& [sub, run] : commands) {
      if (sub->parsed()) return run(f);
    }
  } catch (const std::exception& e) {
    return cli::report(e);
  }
  return cli::kExitUsage;
}
