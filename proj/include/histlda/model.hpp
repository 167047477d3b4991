#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "histlda/histogram.hpp"

namespace histlda {

/// One continuous observation and the (0-based) unit that produced it.
struct Observation {
  double t;
  std::size_t unit;
};

/// Immutable set of observations over U units on a shared half-open range.
/// Empty units and duplicate values are allowed.
class Collection {
 public:
  Collection(Range range, std::size_t unit_count, std::vector<Observation> observations);

  const Range& range() const { return range_; }
  std::size_t unit_count() const { return unit_count_; }
  std::size_t size() const { return observations_.size(); }
  bool empty() const { return observations_.empty(); }
  const std::vector<Observation>& observations() const { return observations_; }
  const Observation& operator[](std::size_t j) const { return observations_[j]; }
  /// N_u for each unit.
  const std::vector<std::int64_t>& unit_sizes() const { return unit_sizes_; }
  /// Values belonging to unit u, in collection order.
  std::vector<double> unit_values(std::size_t u) const;

 private:
  Range range_;
  std::size_t unit_count_;
  std::vector<Observation> observations_;
  std::vector<std::int64_t> unit_sizes_;
};

/// Count tables N_ku, N_kl, N_k and N_u.
struct SuffStats {
  std::size_t k_bases = 0;
  std::size_t units = 0;
  std::vector<std::int64_t> n_ku;               // row-major K x U
  std::vector<std::vector<std::int64_t>> n_kl;  // ragged K x W_k
  std::vector<std::int64_t> n_k;
  std::vector<std::int64_t> n_u;

  std::int64_t& ku(std::size_t k, std::size_t u) { return n_ku[k * units + u]; }
  std::int64_t ku(std::size_t k, std::size_t u) const { return n_ku[k * units + u]; }

  /// True when every marginal identity holds and all counts are >= 0.
  bool consistent() const;

  friend bool operator==(const SuffStats&, const SuffStats&) = default;
};

/// Latent assignments (0-based basis per observation), per-basis bin counts,
/// Dirichlet hyperparameters and the matching count tables.
struct GibbsState {
  std::vector<std::uint32_t> z;
  std::vector<std::size_t> w_bins;
  std::size_t w_max = 1;
  double alpha = 0.5;
  double beta = 0.5;
  SuffStats stats;

  std::size_t k_bases() const { return w_bins.size(); }
};

/// Counts from scratch. Throws std::invalid_argument on out-of-range z or W.
SuffStats recount(const std::vector<std::uint32_t>& z, const std::vector<std::size_t>& w_bins,
                  const Collection& c);

/// Builds a state with stats recounted from (z, w_bins).
GibbsState make_state(const Collection& c, std::vector<std::uint32_t> z,
                      std::vector<std::size_t> w_bins, std::size_t w_max, double alpha,
                      double beta);

/// Sum over units of the collapsed Dirichlet-multinomial term in alpha:
///   sum_u [ sum_k lnG(a + N_ku) - lnG(K a + N_u) + lnG(K a) - K lnG(a) ].
double log_weight_evidence(const SuffStats& s, double alpha);

/// Sum over bases of the collapsed Dirichlet-multinomial term in beta:
///   sum_k [ sum_l lnG(b + N_kl) - lnG(W_k b + N_k) + lnG(W_k b) - W_k lnG(b) ].
double log_mass_evidence(const SuffStats& s, const std::vector<std::size_t>& w_bins,
                         double beta);

/// log p(t, z, W | alpha, beta): uniform prior over W_k, both collapsed
/// Dirichlet terms, and N_k ln(W_k / (t1 - t0)) from the within-bin uniforms.
double log_joint(const GibbsState& state, const Collection& c);

/// Same quantity with alpha and beta supplied explicitly.
double log_joint(const GibbsState& state, const Collection& c, double alpha, double beta);

}  // namespace histlda
