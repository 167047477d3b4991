#include "histlda/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace histlda {

namespace {

constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
constexpr double kLanczosG = 7.0;

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// log of a Gamma(shape, 1) variate; stays finite for tiny shapes where the
// variate itself underflows.
double log_gamma_variate(Rng& rng, double shape) {
  if (shape < 1.0) {
    double u = rng.uniform();
    while (u == 0.0) u = rng.uniform();
    return std::log(rng.gamma(shape + 1.0)) + std::log(u) / shape;
  }
  return std::log(rng.gamma(shape));
}

}  // namespace

double ln_gamma(double x) {
  if (!(x > 0.0) || std::isinf(x)) {
    throw std::domain_error("ln_gamma: argument must be positive and finite");
  }
  if (x < 0.5) return ln_gamma(x + 1.0) - std::log(x);
  x -= 1.0;
  double a = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    a += kLanczos[i] / (x + static_cast<double>(i));
  }
  const double t = x + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t +
         std::log(a);
}

double digamma(double x) {
  if (!(x > 0.0) || std::isinf(x)) {
    throw std::domain_error("digamma: argument must be positive and finite");
  }
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number tail: B_2n / (2n x^2n), n = 1..7
  const double tail =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 -
                                                      inv2 / 12.0))))));
  return result + std::log(x) - 0.5 * inv - tail;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (std::isinf(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& word : s_) word = splitmix64(x);
}

Rng Rng::child(std::uint64_t index) const {
  std::uint64_t x = seed_ ^ 0x6A09E667F3BCC909ULL;
  std::uint64_t mixed = splitmix64(x);
  x = mixed + index;
  return Rng(splitmix64(x));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  const double v = lo + (hi - lo) * uniform();
  // rounding can land exactly on hi for some (lo, hi)
  return v < hi ? v : std::nextafter(hi, lo);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  // Lemire's rejection keeps the draw unbiased.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
  return -std::log1p(-uniform()) / rate;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0) || std::isinf(shape)) {
    throw std::invalid_argument("gamma: shape must be positive and finite");
  }
  if (shape < 1.0) {
    return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> Rng::dirichlet(std::span<const double> concentration) {
  if (concentration.empty()) {
    throw std::invalid_argument("dirichlet: need at least one category");
  }
  std::vector<double> out(concentration.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = log_gamma_variate(*this, concentration[i]);
  }
  const double norm = log_sum_exp(out);
  for (double& v : out) v = std::exp(v - norm);
  return out;
}

std::vector<double> Rng::dirichlet(double concentration, std::size_t k) {
  const std::vector<double> c(k, concentration);
  return dirichlet(c);
}

std::size_t sample_categorical_log(std::span<const double> log_weights, Rng& rng) {
  if (log_weights.empty()) {
    throw std::invalid_argument("sample_categorical_log: empty weight vector");
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double v : log_weights) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("sample_categorical_log: NaN or +inf log-weight");
    }
    top = std::max(top, v);
  }
  if (std::isinf(top)) {
    throw std::invalid_argument("sample_categorical_log: all weights are zero");
  }
  double total = 0.0;
  for (double v : log_weights) total += std::exp(v - top);
  double target = rng.uniform() * total;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    const double w = std::exp(log_weights[i] - top);
    if (w <= 0.0) continue;
    last_positive = i;
    if (target < w) return i;
    target -= w;
  }
  return last_positive;
}

std::size_t sample_categorical(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) {
    throw std::invalid_argument("sample_categorical: empty weight vector");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || std::isinf(w)) {
      throw std::invalid_argument("sample_categorical: weights must be finite and >= 0");
    }
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("sample_categorical: zero total weight");
  double target = rng.uniform() * total;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    if (target < weights[i]) return i;
    target -= weights[i];
  }
  return last_positive;
}

}  // namespace histlda
