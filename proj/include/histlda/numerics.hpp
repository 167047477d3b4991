#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace histlda {

/// Raised when an intermediate quantity turns non-finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// log Gamma(x) for x > 0 (Lanczos, g = 7, n = 9).
double ln_gamma(double x);

/// Digamma Psi(x) for x > 0: upward recurrence to x >= 10, then the
/// asymptotic series.
double digamma(double x);

/// log(sum(exp(v))) with max-shift. Returns -inf for all -inf input.
double log_sum_exp(std::span<const double> values);

/// Seeded generator: xoshiro256** with state expanded from the 64-bit seed by
/// splitmix64. The draw sequence depends only on the seed, so runs are
/// reproducible on any platform with IEEE doubles.
///
/// Child streams are derived from (seed, stream index) by hashing through
/// splitmix64; a chain or benchmark cell owns its own child and never shares
/// state across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  /// Independent generator for stream `index` of this generator's seed.
  Rng child(std::uint64_t index) const;

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Exponential with the given rate.
  double exponential(double rate);
  /// Gamma(shape, 1) by Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape);
  /// Draw from Dirichlet(concentration) (one entry per category).
  std::vector<double> dirichlet(std::span<const double> concentration);
  /// Symmetric Dirichlet(concentration, k).
  std::vector<double> dirichlet(double concentration, std::size_t k);

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Draws an index i (0-based) with probability exp(lw_i - logsumexp(lw)).
/// Entries may be -inf (zero weight); NaN, +inf or an empty vector throw
/// std::invalid_argument, as does an all -inf vector.
std::size_t sample_categorical_log(std::span<const double> log_weights, Rng& rng);

/// Linear-space categorical draw from nonnegative weights (0-based).
std::size_t sample_categorical(std::span<const double> weights, Rng& rng);

}  // namespace histlda
