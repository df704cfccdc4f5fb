#include "onlp/distcheck.hpp"

#include "onlp/errors.hpp"
#include "onlp/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace onlp::bench {

namespace {

NlpProblem with_equality_matrix(DenseMatrix g) {
  const Eigen::Index n = g.cols();
  const Eigen::Index m = g.rows();
  return NlpProblem(QuadraticForm::linear(Vector::Zero(n)), std::move(g), Vector::Zero(m), {},
                    Vector::Constant(n, -1.0), Vector::Constant(n, 1.0));
}

/// Streams of per-trial key seeds rooted at params.seed.
class KeyStream {
 public:
  explicit KeyStream(const transform::KeyParams& params) : params_(params), root_(params.seed) {}
  transform::KeyParams next() {
    transform::KeyParams p = params_;
    p.seed = root_.next_u64();
    return p;
  }

 private:
  transform::KeyParams params_;
  Rng root_;
};

std::size_t nonzeros(const auto& v) {
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) k += v[i] != 0.0 ? 1 : 0;
  return k;
}

}  // namespace

double kolmogorov_tail(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // P(K <= lambda) = sqrt(2 pi) / lambda * sum_k exp(-(2k-1)^2 pi^2 / (8 lambda^2)).
    const double pi = std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      cdf += std::exp(-odd * odd * pi * pi / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  // P(K > lambda) = 2 sum_k (-1)^(k-1) exp(-2 k^2 lambda^2).
  double tail = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    tail += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(tail, 0.0, 1.0);
}

std::string DistcheckReport::summary() const {
  std::ostringstream os;
  os << "entry " << entry << ", " << trials << " keys: KS D = " << ks_statistic
     << " (p = " << ks_p_value << ", " << (ks_pass ? "pass" : "FAIL") << " at "
     << kSignificance << "), positive fraction " << sign_frequency << " ("
     << (sign_pass ? "pass" : "FAIL") << ")";
  return os.str();
}

DistcheckReport distcheck(double entry, const transform::KeyParams& params, std::size_t trials) {
  if (entry == 0.0) {
    throw DomainError(
        "entry value 0 cannot be checked: scaling maps a zero coefficient to zero under every "
        "key, so zero entries are reported, not masked");
  }
  if (!std::isfinite(entry)) throw DomainError("entry value must be finite");
  if (trials < kMinTrials) {
    throw DomainError("distcheck needs at least " + std::to_string(kMinTrials) + " trials");
  }
  params.validate();

  DenseMatrix g(1, 1);
  g(0, 0) = entry;
  const NlpProblem p = with_equality_matrix(std::move(g));
  KeyStream keys(params);
  std::vector<double> samples;
  samples.reserve(trials);
  std::size_t positive = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const transform::SecretKey key = transform::keygen({1, 1, 0}, keys.next());
    const double v = transform::encrypt(p, key).problem().eq_matrix()(0, 0);
    samples.push_back(v);
    positive += v > 0.0 ? 1 : 0;
  }

  DistcheckReport r;
  r.entry = entry;
  r.trials = trials;
  r.half_width = params.c_eq * params.N * std::abs(entry);
  std::sort(samples.begin(), samples.end());
  const double count = static_cast<double>(trials);
  double d = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const double cdf = std::clamp((samples[i] + r.half_width) / (2.0 * r.half_width), 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / count - cdf, cdf - static_cast<double>(i) / count});
  }
  r.ks_statistic = d;
  const double root_n = std::sqrt(count);
  r.ks_p_value = kolmogorov_tail(d * (root_n + 0.12 + 0.11 / root_n));
  r.ks_pass = r.ks_p_value >= kSignificance;
  r.sign_frequency = static_cast<double>(positive) / count;
  r.sign_pass = std::abs(r.sign_frequency - 0.5) <= kSignTolerance;
  return r;
}

std::string UniformityReport::summary() const {
  std::ostringstream os;
  os << size << " x " << size << ", " << keys << " keys: max |freq - " << 1.0 / size
     << "| over rows = " << max_deviation << " (" << (passed() ? "pass" : "FAIL") << " at "
     << tolerance << "), over columns = " << max_col_deviation;
  return os.str();
}

UniformityReport permutation_uniformity(std::size_t size, const transform::KeyParams& params,
                                        std::size_t keys, double tolerance) {
  if (size == 0 || keys == 0) throw DomainError("uniformity check needs size and keys above 0");
  params.validate();
  const auto s = static_cast<Eigen::Index>(size);
  // Row i has i + 1 nonzeros and column j has size - j.
  DenseMatrix g = DenseMatrix::Zero(s, s);
  for (Eigen::Index i = 0; i < s; ++i) g.row(i).head(i + 1).setOnes();
  const NlpProblem p = with_equality_matrix(std::move(g));

  UniformityReport r;
  r.size = size;
  r.keys = keys;
  r.tolerance = tolerance;
  r.row_frequency = DenseMatrix::Zero(s, s);
  r.col_frequency = DenseMatrix::Zero(s, s);
  KeyStream stream(params);
  for (std::size_t t = 0; t < keys; ++t) {
    const transform::SecretKey key = transform::keygen({size, size, 0}, stream.next());
    const DenseMatrix masked = transform::encrypt(p, key).problem().eq_matrix();
    for (Eigen::Index k = 0; k < s; ++k) {
      const auto row_origin = static_cast<Eigen::Index>(nonzeros(masked.row(k))) - 1;
      const auto col_origin = s - static_cast<Eigen::Index>(nonzeros(masked.col(k)));
      r.row_frequency(row_origin, k) += 1.0;
      r.col_frequency(col_origin, k) += 1.0;
    }
  }
  r.row_frequency /= static_cast<double>(keys);
  r.col_frequency /= static_cast<double>(keys);
  const double expected = 1.0 / static_cast<double>(size);
  r.max_deviation = (r.row_frequency.array() - expected).abs().maxCoeff();
  r.max_col_deviation = (r.col_frequency.array() - expected).abs().maxCoeff();
  return r;
}

}  // namespace onlp::bench
