#include "histlda/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace histlda {

namespace {

constexpr double kSumTolerance = 1e-12;

void check_simplex(const std::vector<double>& v, const char* what) {
  if (v.empty()) {
    throw std::invalid_argument(std::string(what) + ": must not be empty");
  }
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || std::isinf(x)) {
      throw std::invalid_argument(std::string(what) + ": entries must be finite and >= 0");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": entries sum to " << sum << ", expected 1";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

Range::Range(double t0, double t1) : t0_(t0), t1_(t1) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t0 < t1)) {
    throw std::invalid_argument("Range: need finite t0 < t1");
  }
}

void Range::require(double t) const {
  if (!contains(t)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "value " << t << " outside [" << t0_ << ", " << t1_ << ")";
    throw std::domain_error(msg.str());
  }
}

std::size_t bin_index_unchecked(double t, std::size_t bin_count, const Range& range) {
  const double scaled =
      static_cast<double>(bin_count) * (t - range.t0()) / range.width();
  const auto l = static_cast<std::size_t>(scaled) + 1;
  // t just below t1 can round up to W + 1
  return std::min(l, bin_count);
}

std::size_t bin_index(double t, std::size_t bin_count, const Range& range) {
  if (bin_count == 0) throw std::invalid_argument("bin_index: bin_count must be >= 1");
  range.require(t);
  return bin_index_unchecked(t, bin_count, range);
}

Histogram::Histogram(Range range, std::vector<double> masses)
    : range_(range), masses_(std::move(masses)) {
  check_simplex(masses_, "Histogram masses");
}

Histogram Histogram::uniform(Range range) { return Histogram(range, {1.0}); }

double Histogram::lower_edge(std::size_t l) const {
  if (l < 1 || l > bin_count() + 1) throw std::out_of_range("lower_edge: bad bin");
  return range_.t0() + static_cast<double>(l - 1) * range_.width() /
                           static_cast<double>(bin_count());
}

double Histogram::density(double t) const {
  const std::size_t l = bin_index(t, bin_count(), range_);
  return masses_[l - 1] * static_cast<double>(bin_count()) / range_.width();
}

double Histogram::sample(Rng& rng) const {
  const std::size_t l = sample_categorical(masses_, rng) + 1;
  const double lo = lower_edge(l);
  const double hi = l == bin_count() ? range_.t1() : lower_edge(l + 1);
  // Keep the round trip through bin_index exact at representation edges.
  for (;;) {
    const double t = rng.uniform(lo, hi);
    if (bin_index_unchecked(t, bin_count(), range_) == l) return t;
  }
}

MixtureDensity::MixtureDensity(std::vector<Histogram> bases, std::vector<double> weights)
    : bases_(std::move(bases)), weights_(std::move(weights)) {
  if (bases_.empty()) throw std::invalid_argument("MixtureDensity: need at least one basis");
  if (bases_.size() != weights_.size()) {
    throw std::invalid_argument("MixtureDensity: one weight per basis required");
  }
  check_simplex(weights_, "MixtureDensity weights");
  for (const auto& b : bases_) {
    if (!(b.range() == bases_.front().range())) {
      throw std::invalid_argument("MixtureDensity: bases must share one range");
    }
  }
}

double MixtureDensity::density(double t) const {
  range().require(t);
  double acc = 0.0;
  for (std::size_t k = 0; k < bases_.size(); ++k) {
    acc += weights_[k] * bases_[k].density(t);
  }
  return acc;
}

double integrated_squared_difference(const Histogram& a, const Histogram& b) {
  if (!(a.range() == b.range())) {
    throw std::invalid_argument("integrated_squared_difference: ranges differ");
  }
  std::vector<double> edges;
  for (std::size_t l = 1; l <= a.bin_count() + 1; ++l) edges.push_back(a.lower_edge(l));
  for (std::size_t l = 1; l <= b.bin_count() + 1; ++l) edges.push_back(b.lower_edge(l));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i];
    const double hi = edges[i + 1];
    if (!(hi > lo) || !a.range().contains(lo)) continue;
    const double mid = lo + 0.5 * (hi - lo);
    const double d = a.density(mid) - b.density(mid);
    total += d * d * (hi - lo);
  }
  return total;
}

}  // namespace histlda
