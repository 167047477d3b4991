#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "histlda/histogram.hpp"
#include "histlda/model.hpp"
#include "histlda/numerics.hpp"

namespace histlda {

struct FitConfig {
  std::size_t k_bases = 3;
  std::size_t w_max = 200;
  std::size_t burn_in_sweeps = 500;
  std::size_t posterior_samples = 100;  // N_p
  double alpha0 = 0.5;
  double beta0 = 0.5;
  bool hyper_update = true;
  double fixed_point_tol = 1e-6;
  std::size_t fixed_point_max_iters = 1000;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on an unusable configuration.
  void validate() const;
};

/// Posterior-mean estimates plus the traces recorded while sampling.
struct FitResult {
  Range range{0.0, 1.0};
  std::vector<std::vector<double>> theta_hat;  // U rows of K weights
  std::vector<Histogram> bases;                // K bases at the final W
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double final_log_joint = 0.0;
  /// One entry per sweep: burn-in sweeps first, then the N_p collection sweeps.
  std::vector<double> log_joint_trace;
  std::vector<std::vector<std::size_t>> w_trace;
  std::vector<double> alpha_trace;
  std::vector<double> beta_trace;

  std::size_t k_bases() const { return bases.size(); }
  std::vector<std::size_t> bin_counts() const;
};

/// Bin counts of already-sorted values at W equal-width bins (0-based bins).
std::vector<std::int64_t> bin_counts_sorted(std::span<const double> sorted_values,
                                            std::size_t bin_count, const Range& range);

/// Collapsed log-score of each bin count W in [1, w_max] (entry W - 1) for one
/// basis holding `sorted_values`, up to a W-independent constant:
///   sum_l [lnG(b + n_l) - lnG(b)] - lnG(W b + N) + lnG(W b) + N ln W.
std::vector<double> bin_count_log_scores(std::span<const double> sorted_values,
                                         const Range& range, double beta,
                                         std::size_t w_max);

/// Normalized conditional p(z_j = k | rest) (0-based k). Counts in `state`
/// must already exclude observation j.
std::vector<double> assignment_probabilities(std::size_t j, const GibbsState& state,
                                             const Collection& c);

/// Draws a basis for observation j. Counts must exclude j.
std::size_t sample_z_j(std::size_t j, const GibbsState& state, const Collection& c, Rng& rng);

/// Draws W_k from its collapsed conditional, writes it to state.w_bins and
/// rebins state.stats.n_kl[k]. Returns the new W_k.
std::size_t sample_W_k(std::size_t k, GibbsState& state, const Collection& c, Rng& rng);

/// Stochastic-EM step: fixed-point maximization of the collapsed evidence in
/// alpha and beta at the current (z, W). Writes and returns the new values.
/// Throws NumericalError on a non-finite intermediate.
std::pair<double, double> update_hyperparameters(GibbsState& state, const FitConfig& cfg);

/// One full sweep: every W_k, then every z_j, then the hyperparameters when
/// cfg.hyper_update is set. Returns the log-joint after the sweep.
double sweep(GibbsState& state, const Collection& c, const FitConfig& cfg, Rng& rng);

/// One pass over z only, with W and hyperparameters held fixed.
void sweep_assignments(GibbsState& state, const Collection& c, Rng& rng);

/// Initial state: W_k = 1, alpha = alpha0, beta = beta0, and z_j drawn i.i.d.
/// from one Dirichlet(alpha0, K) draw of basis weights.
GibbsState initial_state(const Collection& c, const FitConfig& cfg, Rng& rng);

/// Runs a chain on the collection. Throws std::invalid_argument for an empty
/// collection and NumericalError (naming the sweep) on numerical failure.
FitResult fit(const Collection& c, const FitConfig& cfg);

/// Mixture density of unit u. Throws std::out_of_range on a bad index.
MixtureDensity unit_density(const FitResult& result, std::size_t u);

}  // namespace histlda
