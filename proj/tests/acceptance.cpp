// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include "oracles.hpp"
#include "support.hpp"

#include "onlp/bench.hpp"
#include "onlp/distcheck.hpp"
#include "onlp/errors.hpp"
#include "onlp/generator.hpp"
#include "onlp/grg.hpp"
#include "onlp/protocol.hpp"
#include "onlp/transform.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace onlp;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

/// Seeded instance i of the end-to-end suites.
struct Instance {
  bench::GeneratedProblem g;
  transform::SecretKey key;
  EncryptedProblem masked;
};

Instance make_instance(std::size_t n, std::uint64_t seed) {
  const std::size_t k = n * 3 / 10;
  Instance in{bench::generate_feasible({n, k, k, seed}), {}, {}};
  transform::KeyParams params;
  params.seed = seed ^ 0x5eedULL;
  in.key = transform::keygen({n, k, k}, params);
  in.masked = transform::encrypt(in.g.problem, in.key);
  return in;
}

constexpr std::array<std::size_t, 3> kSuiteSizes{10, 50, 200};
constexpr std::size_t kSuiteCount = 50;

Instance suite_instance(std::size_t i) { return make_instance(kSuiteSizes[i % 3], 1000 + i); }

/// Feasible starting y for a masked problem, the same way the service does it.
Vector start_for(const grg::AugmentedProblem& a, const Vector& z0, const grg::SolverConfig& cfg) {
  const Vector y = a.with_slacks(z0);
  if (a.within_bounds(y) && a.residual(y).lpNorm<1>() <= cfg.eps_feas) return y;
  const auto projected = grg::phase_one(a, z0, cfg);
  if (!projected) throw Error("no feasible start");
  return *projected;
}

Outcome criterion_end_to_end() {
  std::size_t accepted = 0;
  double worst_gap = 0.0;
  std::string first_failure;
  for (std::size_t i = 0; i < kSuiteCount; ++i) {
    const Instance in = suite_instance(i);
    const protocol::SolutionDocument masked = protocol::solve_document(
        protocol::encrypted_document(in.masked, transform::encrypt_point(in.g.x0, in.key)), {});
    const protocol::SolutionDocument direct =
        protocol::solve_document(protocol::plain_document(in.g.problem, in.g.x0), {});
    if (!masked.solved() || !direct.solved()) {
      if (first_failure.empty()) first_failure = "instance " + std::to_string(i) + " did not solve";
      continue;
    }
    const Vector x = transform::decrypt(masked.z_star, in.key);
    const transform::VerificationReport report = transform::verify_kkt(in.g.problem, x, 1e-6);
    const double fx = in.g.problem.objective().value(x);
    const double gap =
        std::abs(fx - direct.objective_value) / std::max(1.0, std::abs(direct.objective_value));
    worst_gap = std::max(worst_gap, gap);
    if (report.accepted && gap <= 1e-5) {
      ++accepted;
    } else if (first_failure.empty()) {
      first_failure = "instance " + std::to_string(i) + ": " + report.summary() + ", gap " +
                      fmt("%.3g", gap);
    }
  }
  Outcome o;
  o.pass = accepted == kSuiteCount;
  o.detail = std::to_string(accepted) + "/" + std::to_string(kSuiteCount) +
             " accepted by KKT at 1e-6, max relative objective gap " + fmt("%.2e", worst_gap);
  if (!first_failure.empty()) o.detail += "; " + first_failure;
  return o;
}

Outcome criterion_grid() {
  Rng rng(2024);
  std::size_t disagreements = 0, points = 0, feasible = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(3);
    const NlpProblem p = test::grid_problem(rng, n, 0.05);
    transform::KeyParams params;
    params.seed = rng.next_u64();
    const transform::SecretKey k = transform::keygen({p.n(), p.m(), p.l()}, params);
    const test::GridComparison c = test::compare_on_grid(p, k, 0.05, 1e-9);
    disagreements += c.disagreements;
    points += c.points;
    feasible += c.feasible_original;
  }
  return {disagreements == 0, std::to_string(disagreements) + " disagreements over " +
                                  std::to_string(points) + " grid points (" +
                                  std::to_string(feasible) + " feasible) on 20 problems"};
}

struct Analytic {
  std::string name;
  grg::AugmentedProblem a;
  Vector y0;
  Vector expected;  // over the original variables
  double f_star;
};

std::vector<Analytic> analytic_instances() {
  using test::mat;
  using test::vec;
  std::vector<Analytic> out;
  const grg::AugmentedProblem toy = grg::augment(test::toy_problem());
  out.push_back({"toy", toy, toy.with_slacks(vec({1, 0})), vec({0.5, 0.5}), 0.5});

  const grg::AugmentedProblem line = grg::augment(
      NlpProblem(QuadraticForm::diagonal(vec({2, 2}), vec({0, 0})), mat({{1, 1}}), vec({1}), {},
                 vec({-10, -10}), vec({10, 10})));
  out.push_back({"line", line, vec({1, 0}), vec({0.5, 0.5}), 0.5});

  std::vector<Inequality> disc{{QuadraticForm::diagonal(vec({2, 2}), vec({0, 0})), 1.0}};
  const grg::AugmentedProblem shifted = grg::augment(
      NlpProblem(QuadraticForm::diagonal(vec({2, 2}), vec({-4, -4}), 8.0), mat({{1, 1}}),
                 vec({1}), std::move(disc), vec({-10, -10}), vec({10, 10})));
  out.push_back({"shifted", shifted, shifted.with_slacks(vec({1, 0})), vec({0.5, 0.5}), 4.5});

  // Active inequality: min (x1 - 2)^2 + x2^2 s.t. x1^2 + x2^2 <= 1 gives (1, 0), f = 1.
  std::vector<Inequality> ball{{QuadraticForm::diagonal(vec({2, 2}), vec({0, 0})), 1.0}};
  const grg::AugmentedProblem active =
      grg::augment(NlpProblem(QuadraticForm::diagonal(vec({2, 2}), vec({-4, 0}), 4.0),
                              DenseMatrix(0, 2), Vector(0), std::move(ball), vec({-10, -10}),
                              vec({10, 10})));
  out.push_back({"active", active, active.with_slacks(vec({0, 0.5})), vec({1, 0}), 1.0});

  // Bound-active: min (x1 + 1)^2 + (x2 - 3)^2 over [0, 2]^2 gives (0, 2), f = 2.
  const grg::AugmentedProblem box =
      grg::augment(NlpProblem(QuadraticForm::diagonal(vec({2, 2}), vec({2, -6}), 10.0),
                              DenseMatrix(0, 2), Vector(0), {}, vec({0, 0}), vec({2, 2})));
  out.push_back({"box", box, vec({1, 1}), vec({0, 2}), 2.0});
  return out;
}

Outcome criterion_analytic() {
  double worst = 0.0;
  std::string failure;
  for (const grg::DirectionRule rule :
       {grg::DirectionRule::ConjugateGradient, grg::DirectionRule::SteepestDescent}) {
    grg::SolverConfig cfg;
    cfg.direction = rule;
    for (const Analytic& inst : analytic_instances()) {
      const grg::SolverRun run = grg::grg_solve(inst.a, inst.y0, cfg);
      const Vector x = inst.a.strip_slacks(run.y_star);
      const double err = std::max((x - inst.expected).lpNorm<Eigen::Infinity>(),
                                  std::abs(run.objective_value - inst.f_star));
      worst = std::max(worst, err);
      if (err > 1e-6 && failure.empty()) {
        failure = inst.name + " (" + grg::to_string(rule) + ") off by " + fmt("%.3g", err);
      }
    }
  }
  Outcome o{failure.empty(), std::to_string(analytic_instances().size()) +
                                 " instances under both direction rules, max error " +
                                 fmt("%.2e", worst)};
  if (!failure.empty()) o.detail += "; " + failure;
  return o;
}

Outcome criterion_invariants() {
  grg::SolverConfig cfg;
  cfg.record_trace = true;
  std::size_t iterates = 0, violations = 0;
  double worst_feas = 0.0, worst_dir = 0.0, worst_deriv = -1e300, worst_jac = 0.0;
  std::string first;
  auto inspect = [&](const grg::SolverRun& run, const std::string& name) {
    for (const grg::IterateRecord& r : run.trace) {
      ++iterates;
      worst_feas = std::max(worst_feas, r.feasibility);
      worst_dir = std::max(worst_dir, r.direction_residual);
      worst_deriv = std::max(worst_deriv, r.directional_derivative);
      const bool ok = r.objective_change < 0.0 && r.feasibility <= 1e-8 &&
                      r.direction_residual <= 1e-9 && r.directional_derivative <= 0.0 &&
                      r.within_bounds;
      if (!ok) {
        ++violations;
        if (first.empty()) first = name;
      }
    }
  };
  for (const Analytic& inst : analytic_instances()) inspect(grg::grg_solve(inst.a, inst.y0, cfg), inst.name);
  for (std::size_t i = 0; i < kSuiteCount; ++i) {
    const Instance in = suite_instance(i);
    for (const bool masked : {false, true}) {
      const Vector z0 = masked ? transform::encrypt_point(in.g.x0, in.key) : in.g.x0;
      const grg::AugmentedProblem a = grg::augment(
          grg::normalize_inequalities(masked ? in.masked.problem() : in.g.problem, z0));
      const Vector y0 = start_for(a, z0, cfg);
      inspect(grg::grg_solve(a, y0, cfg), "suite " + std::to_string(i));
      // Jacobian against central differences at the start point.
      const DenseMatrix j = grg::jacobian(a, y0);
      for (Eigen::Index row = 0; row < j.rows(); ++row) {
        const Vector fd =
            test::fd_gradient([&](const Vector& v) { return a.residual(v)[row]; }, y0);
        worst_jac = std::max(worst_jac, test::rel_err(j.row(row).transpose(), fd));
      }
    }
  }
  Outcome o;
  o.pass = violations == 0 && worst_jac <= 1e-6;
  o.detail = std::to_string(iterates) + " iterates, " + std::to_string(violations) +
             " violations; max ||e||_1 " + fmt("%.1e", worst_feas) + ", max ||J d||_inf " +
             fmt("%.1e", worst_dir) + ", max grad^T d " + fmt("%.1e", worst_deriv) +
             ", max Jacobian rel err " + fmt("%.1e", worst_jac);
  if (!first.empty()) o.detail += "; first violation in " + first;
  return o;
}

Outcome criterion_masking() {
  transform::KeyParams params;
  params.N = 10.0;
  params.c_eq = 1.0;
  params.seed = 0;
  const bench::DistcheckReport d = bench::distcheck(5.0, params, 10000);
  const bench::UniformityReport u = bench::permutation_uniformity(10, params, 1000, 0.03);
  return {d.passed() && u.passed(), d.summary() + "; " + u.summary()};
}

Outcome criterion_trend(const std::string& csv_path) {
  bench::BenchOptions opts;
  opts.trials = 5;
  opts.on_record = [](const bench::BenchRecord& r) {
    std::cerr << "  bench n=" << r.n << " " << bench::csv_row(r) << "\n";
  };
  const std::vector<std::size_t> sizes{200, 500, 1000, 2000};
  const auto records = bench::run_bench(bench::ladder(sizes, 0.3, 1), opts);
  if (!csv_path.empty()) std::ofstream(csv_path) << bench::to_csv(records);

  std::string detail = "speedup";
  bool any_failed = false;
  for (const bench::BenchRecord& r : records) {
    detail += " n=" + std::to_string(r.n) + ":" + fmt("%.2f", r.speedup);
    any_failed = any_failed || r.failed;
  }
  const bench::BenchRecord& k1 = records[2];
  const double client_share = k1.t_client / k1.t_original;
  const bool increasing = records[1].speedup < records[2].speedup && records[2].speedup < records[3].speedup;
  detail += "; t_client/t_original at n=1000 " + fmt("%.4f", client_share);
  if (!increasing) detail += "; not strictly increasing over the last three rungs";
  return {!any_failed && increasing && k1.speedup > 5.0 && client_share < 0.05, detail};
}

std::string run_capture(const std::string& cmd) {
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  if (!pipe) throw Error("cannot run " + cmd);
  std::string out;
  std::array<char, 4096> buf;
  while (fgets(buf.data(), static_cast<int>(buf.size()), pipe.get())) out += buf.data();
  return out;
}

/// Evidence that the server does not depend on the client-side module: no
/// transform symbols in the linked server binary and no transform includes in
/// the protocol and solver sources.
std::string isolation_problem() {
  const fs::path server(ONLP_SERVER_BINARY);
  if (!fs::exists(server)) return "server binary not built";
  const std::string symbols = run_capture("nm -C '" + server.string() + "' 2>&1");
  if (symbols.find("onlp::grg::") == std::string::npos) return "cannot read server symbols";
  for (const char* forbidden : {"onlp::transform", "SecretKey", "decrypt"}) {
    if (symbols.find(forbidden) != std::string::npos) {
      return std::string("server binary contains ") + forbidden;
    }
  }
  const fs::path root(ONLP_SOURCE_DIR);
  std::vector<fs::path> files{root / "include/onlp/protocol.hpp", root / "include/onlp/document.hpp",
                              root / "include/onlp/grg.hpp", root / "tools/onlp_server.cpp"};
  for (const fs::path& dir : {root / "src/protocol", root / "src/grg"}) {
    for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  }
  for (const fs::path& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (text.find("onlp/transform.hpp") != std::string::npos ||
        text.find("onlp/key_io.hpp") != std::string::npos) {
      return f.string() + " includes the key module";
    }
  }
  return "";
}

Outcome criterion_protocol() {
  protocol::Server server(protocol::ServerConfig{});
  std::thread runner([&server] { server.run(); });
  const std::string addr = server.address();
  std::size_t identical = 0;
  double worst = 0.0;
  std::string failure;
  try {
    for (std::size_t i = 0; i < 10; ++i) {
      const Instance in = make_instance(kSuiteSizes[i % 3], 7000 + i);
      const protocol::ProblemDocument doc =
          protocol::encrypted_document(in.masked, transform::encrypt_point(in.g.x0, in.key));
      const protocol::SolutionDocument remote = protocol::submit(addr, doc, 120s).solution;
      const protocol::SolutionDocument local = protocol::solve_document(doc, {});
      if (!remote.solved() || !local.solved()) {
        failure = "instance " + std::to_string(i) + " did not solve";
        continue;
      }
      const Vector xr = transform::decrypt(remote.z_star, in.key);
      const Vector xl = transform::decrypt(local.z_star, in.key);
      const double diff = (xr - xl).lpNorm<Eigen::Infinity>();
      worst = std::max(worst, diff);
      if (diff <= 1e-9 && transform::verify_kkt(in.g.problem, xr, 1e-6).accepted) ++identical;
    }
  } catch (const Error& e) {
    failure = e.what();
  }

  std::size_t error_replies = 0;
  const std::vector<std::string> junk{
      protocol::encode({protocol::MessageType::SubmitProblem, "{not json"}),
      protocol::encode({protocol::MessageType::SubmitProblem, "{\"version\":1}"}),
      protocol::encode({protocol::MessageType::Solution, "{}"}),
      std::string("\x00\x00\x00\x02\x7f!!", 7),
      std::string("\x7f\xff\xff\xff\x01", 5),
  };
  for (const std::string& bytes : junk) {
    try {
      if (protocol::exchange(addr, bytes, 10s).type == protocol::MessageType::Error) ++error_replies;
    } catch (const Error&) {
    }
  }
  bool alive = false;
  try {
    alive = protocol::submit(addr, protocol::plain_document(test::toy_problem()), 10s).solution.solved();
  } catch (const Error&) {
  }
  server.stop();
  runner.join();

  const std::string isolation = isolation_problem();
  Outcome o;
  o.pass = identical == 10 && error_replies == junk.size() && alive && isolation.empty();
  o.detail = std::to_string(identical) + "/10 remote answers equal to in-process (max diff " +
             fmt("%.1e", worst) + "), " + std::to_string(error_replies) + "/" +
             std::to_string(junk.size()) + " malformed submissions got Error replies, server " +
             (alive ? "alive" : "down") + ", isolation " +
             (isolation.empty() ? "verified" : "FAILED: " + isolation);
  if (!failure.empty()) o.detail += "; " + failure;
  return o;
}

Outcome criterion_cheating() {
  Rng rng(8);
  std::size_t rejected = 0, instances = 0;
  std::vector<std::string> survivors;
  for (std::size_t i = 0; i < 100; ++i) {
    const std::size_t n = 10 + rng.below(41);
    const Instance in = make_instance(n, 9000 + i);
    const protocol::SolutionDocument sol = protocol::solve_document(
        protocol::encrypted_document(in.masked, transform::encrypt_point(in.g.x0, in.key)), {});
    if (!sol.solved()) {
      survivors.push_back("instance " + std::to_string(i) + " (n=" + std::to_string(n) +
                          ") did not solve: " +
                          (sol.termination ? grg::to_string(*sol.termination) : sol.reason));
      continue;
    }
    ++instances;
    Vector z = sol.z_star;
    const auto coord = static_cast<Eigen::Index>(rng.below(n));
    z[coord] += rng.below(2) == 0 ? 1e-2 : -1e-2;
    const transform::VerificationReport r =
        transform::verify_kkt(in.g.problem, transform::decrypt(z, in.key), 1e-6);
    if (!r.accepted) {
      ++rejected;
    } else {
      survivors.push_back("instance " + std::to_string(i) + " accepted: " + r.summary());
    }
  }
  Outcome o;
  o.pass = instances == 100 && rejected >= 95;
  o.detail = std::to_string(rejected) + "/" + std::to_string(instances) +
             " perturbed solutions rejected";
  for (const std::string& s : survivors) o.detail += "; " + s;
  return o;
}

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // <= 0: no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> only, skip;
  std::string report_path, csv_path;
  app.add_option("--criterion", only, "Run only these criteria (repeatable)");
  app.add_option("--skip", skip, "Skip these criteria (repeatable)");
  app.add_option("--report", report_path, "Also write the result lines to this file");
  app.add_option("--csv", csv_path, "Write the trend benchmark CSV here");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "end-to-end correctness", 120.0, criterion_end_to_end},
      {2, "feasible-set equivalence", 60.0, criterion_grid},
      {3, "solver on analytic instances", 0.0, criterion_analytic},
      {4, "solver structural invariants", 0.0, criterion_invariants},
      {5, "masking distribution", 30.0, criterion_masking},
      {6, "speedup trend", 1800.0, [&csv_path] { return criterion_trend(csv_path); }},
      {7, "protocol robustness", 0.0, criterion_protocol},
      {8, "verification rejects cheating", 0.0, criterion_cheating},
  };

  std::ofstream report;
  if (!report_path.empty()) report.open(report_path);
  bool all = true;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    if (std::find(skip.begin(), skip.end(), c.id) != skip.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::string timing = fmt("%.1f s", secs);
    if (c.budget_s > 0.0) {
      timing += fmt(" (limit %.0f s)", c.budget_s);
      if (secs >= c.budget_s) {
        o.pass = false;
        o.detail += "; over the time limit";
      }
    }
    all = all && o.pass;
    const std::string line = std::string(o.pass ? "PASS" : "FAIL") + " criterion " +
                             std::to_string(c.id) + " " + c.name + ": " + o.detail + " [" +
                             timing + "]";
    std::cout << line << std::endl;
    if (report) report << line << "\n";
  }
  return all ? 0 : 1;
}
