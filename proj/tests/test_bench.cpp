#include "support.hpp"

#include "onlp/bench.hpp"
#include "onlp/distcheck.hpp"
#include "onlp/document.hpp"
#include "onlp/errors.hpp"
#include "onlp/generator.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace onlp;
using namespace onlp::bench;

namespace {

std::vector<double> split_reals(const std::string& row) {
  std::vector<double> out;
  std::stringstream ss(row);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

}  // namespace

TEST_CASE("generator examples") {
  const GeneratedProblem g = generate_feasible({2, 1, 1, 7});
  CHECK(g.problem.n() == 2);
  CHECK(g.problem.m() == 1);
  CHECK(g.problem.l() == 1);
  CHECK((g.problem.eq_matrix() * g.x0 - g.problem.eq_rhs()).lpNorm<Eigen::Infinity>() <= 1e-12);
  const Inequality& h = g.problem.ineqs()[0];
  CHECK(h.rhs - h.form.value(g.x0) >= 0.1);

  const GeneratedProblem free = generate_feasible({5, 0, 0, 1});
  CHECK(free.problem.m() == 0);
  CHECK(free.problem.l() == 0);

  CHECK_THROWS_AS(generate_feasible({3, 2, 2, 0}), DomainError);
  CHECK_THROWS_AS(generate_feasible({3, 4, 0, 0}), DomainError);
  CHECK_THROWS_AS(generate_feasible({3, 0, 0, 0, 0.0}), DomainError);
}

TEST_CASE("generator is deterministic and feasible") {
  Rng rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    const std::size_t m = rng.below(n / 2 + 1);
    const GeneratorSpec spec{n, m, rng.below(n - m + 1), rng.next_u64()};
    const GeneratedProblem a = generate_feasible(spec);
    const GeneratedProblem b = generate_feasible(spec);
    CHECK(protocol::serialize_problem(protocol::plain_document(a.problem, a.x0)) ==
          protocol::serialize_problem(protocol::plain_document(b.problem, b.x0)));
    CHECK(a.problem.max_violation(a.x0) <= 1e-9);
    for (const Inequality& h : a.problem.ineqs()) CHECK(h.rhs - h.form.value(a.x0) >= 0.1);
    // Convex objective.
    CHECK(Eigen::SelfAdjointEigenSolver<DenseMatrix>(a.problem.objective().quad_dense())
              .eigenvalues()
              .minCoeff() > 0.0);
  }
}

TEST_CASE("ladder") {
  const std::vector<std::size_t> sizes{10, 100, 1000};
  const auto specs = ladder(sizes, 0.3, 5);
  REQUIRE(specs.size() == 3);
  CHECK(specs[1].m == 30);
  CHECK(specs[2].l == 300);
  CHECK(specs[0].seed == 5);
  CHECK_THROWS_AS(ladder(sizes, 0.6, 0), DomainError);
}

TEST_CASE("bench runs the pipeline on small sizes") {
  BenchOptions opts;
  opts.trials = 2;
  std::size_t seen = 0;
  opts.on_record = [&](const BenchRecord&) { ++seen; };
  const std::vector<std::size_t> sizes{8, 20};
  const auto records = run_bench(ladder(sizes, 0.3, 1), opts);
  REQUIRE(records.size() == 2);
  CHECK(seen == 2);
  for (const BenchRecord& r : records) {
    CHECK_FALSE(r.failed);
    CHECK(r.trials == 2);
    CHECK(r.t_original > 0.0);
    CHECK(r.t_cloud > 0.0);
    CHECK(r.t_client > 0.0);
    CHECK(r.speedup == r.t_original / r.t_client);
    CHECK(r.cloud_efficiency == r.t_original / r.t_cloud);
  }

  const std::string csv = to_csv(records);
  CHECK(csv.rfind(csv_header() + "\n", 0) == 0);
  const auto cells = split_reals(csv_row(records[1]));
  REQUIRE(cells.size() == 8);
  CHECK(cells[0] == 20.0);
  CHECK(cells[1] == 6.0);
  CHECK(cells[6] == cells[3] / cells[5]);
  CHECK(cells[7] == cells[3] / cells[4]);
}

TEST_CASE("failed records print nan") {
  BenchRecord r;
  r.n = 4;
  r.failed = true;
  r.t_original = r.t_cloud = r.t_client = r.speedup = r.cloud_efficiency = std::nan("");
  CHECK(csv_row(r) == "4,0,0,nan,nan,nan,nan,nan");

  BenchOptions opts;
  opts.trials = 1;
  opts.server = "127.0.0.1:1";
  opts.timeout = std::chrono::milliseconds(500);
  const BenchRecord unreachable = bench_size({6, 1, 1, 0}, opts);
  CHECK(unreachable.failed);
  CHECK_FALSE(unreachable.failure.empty());
  CHECK(std::isnan(unreachable.speedup));
}

TEST_CASE("kolmogorov tail matches reference values") {
  const std::pair<double, double> ref[] = {
      {0.3, 0.9999906941986655},  {0.5, 0.9639452436648751},    {0.8, 0.5441424115741981},
      {1.0, 0.26999967167735456}, {1.2, 0.11224966667072497},   {1.5, 0.022217962616525127},
      {2.0, 0.0006709252557796953}, {3.0, 3.045995948942526e-08},
  };
  for (const auto& [lambda, p] : ref) {
    CAPTURE(lambda);
    CHECK(std::abs(kolmogorov_tail(lambda) - p) <= 1e-10 * std::max(1.0, p) + 1e-14);
  }
  CHECK(kolmogorov_tail(0.0) == 1.0);
  CHECK(kolmogorov_tail(50.0) == 0.0);
}

TEST_CASE("masked entries look uniform") {
  transform::KeyParams params;
  params.seed = 0;
  const DistcheckReport r = distcheck(5.0, params, 4000);
  CHECK(r.half_width == 5.0 * params.N * params.c_eq);
  CHECK(r.passed());
  CHECK(std::abs(r.sign_frequency - 0.5) <= kSignTolerance);
  CHECK(r.summary().find("KS") != std::string::npos);

  CHECK_THROWS_AS(distcheck(0.0, params, 4000), DomainError);
  CHECK_THROWS_AS(distcheck(5.0, params, kMinTrials - 1), DomainError);
}

TEST_CASE("permutation uniformity bookkeeping") {
  transform::KeyParams params;
  params.seed = 3;
  const UniformityReport r = permutation_uniformity(4, params, 400, 0.2);
  CHECK(r.size == 4);
  CHECK(r.keys == 400);
  for (const DenseMatrix* f : {&r.row_frequency, &r.col_frequency}) {
    CHECK((f->rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK((f->colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  }
  CHECK(r.passed());
  // One key is one permutation: every frequency is 0 or 1.
  const UniformityReport one = permutation_uniformity(3, params, 1, 0.03);
  CHECK(((one.row_frequency.array() == 0.0) || (one.row_frequency.array() == 1.0)).all());
  CHECK_FALSE(one.passed());
}
