#include "onlp/bench.hpp"

#include "onlp/errors.hpp"
#include "onlp/json_io.hpp"
#include "onlp/protocol.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <limits>

namespace onlp::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct TrialTimes {
  double original = 0.0;
  double cloud = 0.0;
  double client = 0.0;
};

TrialTimes run_trial(const GeneratorSpec& spec, std::uint64_t key_seed, const BenchOptions& opts) {
  const GeneratedProblem gen = generate_feasible(spec);
  TrialTimes times;

  const protocol::SolutionDocument direct =
      protocol::solve_document(protocol::plain_document(gen.problem, gen.x0), opts.solver);
  if (!direct.solved()) throw Error("plain solve failed: " + direct.reason);
  times.original = direct.solver_wall_time_ms / 1000.0;

  transform::KeyParams params = opts.key;
  params.seed = key_seed;
  auto t0 = Clock::now();
  const transform::SecretKey key =
      transform::keygen({spec.n, spec.m, spec.l}, params);
  const EncryptedProblem masked = transform::encrypt(gen.problem, key);
  const Vector z0 = transform::encrypt_point(gen.x0, key);
  times.client = seconds_since(t0);

  const protocol::ProblemDocument doc = protocol::encrypted_document(masked, z0);
  protocol::SolutionDocument remote;
  if (opts.server) {
    remote = protocol::submit(*opts.server, doc, opts.timeout).solution;
  } else {
    remote = protocol::solve_document(doc, opts.solver);
  }
  if (!remote.solved()) throw Error("masked solve failed: " + remote.reason);
  times.cloud = remote.solver_wall_time_ms / 1000.0;

  t0 = Clock::now();
  const Vector x = transform::decrypt(remote.z_star, key);
  const transform::VerificationReport report = transform::verify_kkt(gen.problem, x, opts.verify_tol);
  times.client += seconds_since(t0);
  if (!report.accepted) throw Error("verification rejected the result: " + report.summary());
  return times;
}

}  // namespace

std::vector<GeneratorSpec> ladder(const std::vector<std::size_t>& sizes, double ratio,
                                  std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 0.5)) throw DomainError("ladder ratio must lie in [0, 0.5]");
  std::vector<GeneratorSpec> out;
  out.reserve(sizes.size());
  for (std::size_t n : sizes) {
    const auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    GeneratorSpec spec{n, k, k, seed};
    spec.validate();
    out.push_back(spec);
  }
  return out;
}

BenchRecord bench_size(const GeneratorSpec& spec, const BenchOptions& opts) {
  spec.validate();
  if (opts.trials == 0) throw DomainError("bench needs at least one trial");
  BenchRecord r;
  r.n = spec.n;
  r.m = spec.m;
  r.l = spec.l;
  r.trials = opts.trials;
  TrialTimes sum;
  try {
    for (std::size_t t = 0; t < opts.trials; ++t) {
      GeneratorSpec trial = spec;
      trial.seed = spec.seed + t;
      const TrialTimes times = run_trial(trial, opts.key.seed + t, opts);
      spdlog::info("n={} trial {}: original {:.3f}s cloud {:.3f}s client {:.4f}s", spec.n, t,
                   times.original, times.cloud, times.client);
      sum.original += times.original;
      sum.cloud += times.cloud;
      sum.client += times.client;
    }
  } catch (const Error& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.failed = true;
    r.failure = e.what();
    r.t_original = r.t_cloud = r.t_client = r.speedup = r.cloud_efficiency = nan;
    return r;
  }
  const double k = static_cast<double>(opts.trials);
  r.t_original = sum.original / k;
  r.t_cloud = sum.cloud / k;
  r.t_client = sum.client / k;
  r.speedup = r.t_original / r.t_client;
  r.cloud_efficiency = r.t_original / r.t_cloud;
  return r;
}

std::vector<BenchRecord> run_bench(const std::vector<GeneratorSpec>& sizes,
                                   const BenchOptions& opts) {
  std::vector<BenchRecord> out;
  out.reserve(sizes.size());
  for (const GeneratorSpec& spec : sizes) {
    out.push_back(bench_size(spec, opts));
    if (out.back().failed) spdlog::warn("n={} failed: {}", spec.n, out.back().failure);
    if (opts.on_record) opts.on_record(out.back());
  }
  return out;
}

std::string csv_header() { return "n,m,l,t_original,t_cloud,t_client,speedup,cloud_efficiency"; }

std::string csv_row(const BenchRecord& r) {
  auto real = [](double v) { return std::isnan(v) ? std::string("nan") : json_io::format_real(v); };
  return std::to_string(r.n) + "," + std::to_string(r.m) + "," + std::to_string(r.l) + "," +
         real(r.t_original) + "," + real(r.t_cloud) + "," + real(r.t_client) + "," +
         real(r.speedup) + "," + real(r.cloud_efficiency);
}

std::string to_csv(const std::vector<BenchRecord>& records) {
  std::string out = csv_header() + "\n";
  for (const BenchRecord& r : records) out += csv_row(r) + "\n";
  return out;
}

}  // namespace onlp::bench
