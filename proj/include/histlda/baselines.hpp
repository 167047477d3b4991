#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "histlda/histogram.hpp"

namespace histlda {

enum class BinMethod { knuth, br };

/// Log-score for each candidate bin count W = 1..w_max (entry W - 1).
struct BinScoreTable {
  BinMethod method;
  std::vector<double> scores;

  /// Smallest W attaining the maximum score.
  std::size_t best() const;
};

/// Knuth's Bayesian binning: the single-basis collapsed score with a
/// Jeffreys (1/2) Dirichlet prior on the bin masses.
BinScoreTable knuth_scores(std::span<const double> data, const Range& range, std::size_t w_max);
std::size_t knuth_bin_number(std::span<const double> data, const Range& range, std::size_t w_max);
/// Posterior-mean masses (n_l + 1/2) / (N + W/2) at a given W.
Histogram knuth_masses(std::span<const double> data, const Range& range, std::size_t bin_count);
/// knuth_masses at the selected W.
Histogram knuth_histogram(std::span<const double> data, const Range& range, std::size_t w_max);

/// Birge-Rozenholc penalized likelihood:
///   sum_l n_l ln(n_l W / (N (t1 - t0))) - (W - 1 + (ln W)^2.5).
BinScoreTable br_scores(std::span<const double> data, const Range& range, std::size_t w_max);
std::size_t br_bin_number(std::span<const double> data, const Range& range, std::size_t w_max);
/// Maximum-likelihood masses n_l / N at a given W.
Histogram br_masses(std::span<const double> data, const Range& range, std::size_t bin_count);
/// br_masses at the selected W.
Histogram br_histogram(std::span<const double> data, const Range& range, std::size_t w_max);

double br_penalty(std::size_t bin_count);

}  // namespace histlda
