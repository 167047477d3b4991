#pragma once

#include <cstddef>
#include <vector>

#include "histlda/numerics.hpp"

namespace histlda {

/// Half-open interval [t0, t1).
class Range {
 public:
  Range(double t0, double t1);

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  double width() const { return t1_ - t0_; }
  bool contains(double t) const { return t >= t0_ && t < t1_; }

  /// Throws std::domain_error unless t is in [t0, t1).
  void require(double t) const;

  friend bool operator==(const Range&, const Range&) = default;

 private:
  double t0_;
  double t1_;
};

/// 1-based index of the equal-width bin containing t, out of `bin_count`
/// bins: 1 + floor(W (t - t0) / (t1 - t0)). Values outside [t0, t1) are
/// rejected, never clamped.
std::size_t bin_index(double t, std::size_t bin_count, const Range& range);

/// Same as bin_index without the range check. Caller guarantees t in range.
std::size_t bin_index_unchecked(double t, std::size_t bin_count, const Range& range);

/// Piecewise-constant density with W equal-width bins and per-bin masses.
class Histogram {
 public:
  /// Masses must be nonnegative and sum to 1 within 1e-12.
  Histogram(Range range, std::vector<double> masses);

  /// Single-bin (uniform) histogram.
  static Histogram uniform(Range range);

  const Range& range() const { return range_; }
  std::size_t bin_count() const { return masses_.size(); }
  const std::vector<double>& masses() const { return masses_; }
  /// Mass of 1-based bin l.
  double mass(std::size_t l) const { return masses_.at(l - 1); }
  /// Lower edge x_l of 1-based bin l.
  double lower_edge(std::size_t l) const;
  double bin_width() const { return range_.width() / static_cast<double>(bin_count()); }

  double density(double t) const;
  /// Two-step draw: bin from the masses, then uniform inside the bin.
  double sample(Rng& rng) const;

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  Range range_;
  std::vector<double> masses_;
};

inline double density(const Histogram& h, double t) { return h.density(t); }
inline double sample(const Histogram& h, Rng& rng) { return h.sample(rng); }

/// Convex combination of histograms sharing one range.
class MixtureDensity {
 public:
  MixtureDensity(std::vector<Histogram> bases, std::vector<double> weights);

  const Range& range() const { return bases_.front().range(); }
  const std::vector<Histogram>& bases() const { return bases_; }
  const std::vector<double>& weights() const { return weights_; }

  double density(double t) const;

 private:
  std::vector<Histogram> bases_;
  std::vector<double> weights_;
};

inline double mixture_density(const MixtureDensity& m, double t) { return m.density(t); }

/// Exact integral of (a - b)^2 over the range for two histograms on the same
/// range, summed over the merged piecewise-constant segments.
double integrated_squared_difference(const Histogram& a, const Histogram& b);

}  // namespace histlda
