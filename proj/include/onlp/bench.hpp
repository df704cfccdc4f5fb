#pragma once

// Timing harness over the full outsourcing pipeline: solve the plain problem
// locally, then keygen, encrypt, solve the masked problem (locally or on a
// server), decrypt and verify.

#include "onlp/generator.hpp"
#include "onlp/grg.hpp"
#include "onlp/transform.hpp"

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace onlp::bench {

struct BenchRecord {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t l = 0;
  /// Mean seconds per trial.
  double t_original = 0.0;
  double t_cloud = 0.0;
  double t_client = 0.0;
  double speedup = 0.0;           // t_original / t_client
  double cloud_efficiency = 0.0;  // t_original / t_cloud
  std::size_t trials = 0;
  bool failed = false;
  std::string failure;
};

struct BenchOptions {
  std::size_t trials = 5;
  /// HOST:PORT of a running server; the masked solve runs in-process when
  /// empty.
  std::optional<std::string> server;
  std::chrono::milliseconds timeout{std::chrono::hours(2)};
  grg::SolverConfig solver;
  /// Key parameters; trial t uses seed + t.
  transform::KeyParams key;
  double verify_tol = 1e-6;
  /// Called after every size, for progress output.
  std::function<void(const BenchRecord&)> on_record;
};

/// Sizes n with m = l = floor(ratio * n); trial t of a size uses seed + t.
std::vector<GeneratorSpec> ladder(const std::vector<std::size_t>& sizes, double ratio,
                                  std::uint64_t seed);

/// Runs opts.trials trials of one size. A trial fails when either solve
/// fails, the server is unreachable, or the decrypted point is rejected by
/// verify_kkt; the record is then marked failed and its metrics are NaN.
BenchRecord bench_size(const GeneratorSpec& spec, const BenchOptions& opts);
std::vector<BenchRecord> run_bench(const std::vector<GeneratorSpec>& sizes,
                                   const BenchOptions& opts);

/// "n,m,l,t_original,t_cloud,t_client,speedup,cloud_efficiency"
std::string csv_header();
/// Reals as shortest round-trip decimals, so the ratio columns recompute
/// exactly from the time columns.
std::string csv_row(const BenchRecord& r);
std::string to_csv(const std::vector<BenchRecord>& records);

}  // namespace onlp::bench
