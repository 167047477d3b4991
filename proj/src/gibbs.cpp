#include "histlda/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace histlda {

namespace {

constexpr double kHyperMin = 1e-6;
constexpr double kHyperMax = 1e6;

// Observation indices ordered by value, so each basis' values can be
// gathered already sorted in one pass.
std::vector<std::size_t> value_order(const Collection& c) {
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c[a].t < c[b].t; });
  return order;
}

std::vector<std::vector<double>> sorted_values_by_basis(const GibbsState& state,
                                                        const Collection& c,
                                                        const std::vector<std::size_t>& order) {
  std::vector<std::vector<double>> out(state.k_bases());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].reserve(static_cast<std::size_t>(state.stats.n_k[k]));
  }
  for (auto j : order) out[state.z[j]].push_back(c[j].t);
  return out;
}

std::size_t draw_bin_count(std::size_t k, std::span<const double> sorted_values,
                           GibbsState& state, const Range& range, Rng& rng) {
  const auto scores = bin_count_log_scores(sorted_values, range, state.beta, state.w_max);
  const std::size_t w = sample_categorical_log(scores, rng) + 1;
  state.w_bins[k] = w;
  state.stats.n_kl[k] = bin_counts_sorted(sorted_values, w, range);
  return w;
}

void remove_observation(GibbsState& state, const Collection& c, std::size_t j) {
  const std::size_t k = state.z[j];
  auto& s = state.stats;
  --s.ku(k, c[j].unit);
  --s.n_kl[k][bin_index_unchecked(c[j].t, state.w_bins[k], c.range()) - 1];
  --s.n_k[k];
}

void add_observation(GibbsState& state, const Collection& c, std::size_t j, std::size_t k) {
  state.z[j] = static_cast<std::uint32_t>(k);
  auto& s = state.stats;
  ++s.ku(k, c[j].unit);
  ++s.n_kl[k][bin_index_unchecked(c[j].t, state.w_bins[k], c.range()) - 1];
  ++s.n_k[k];
}

void assignment_log_weights(std::size_t j, const GibbsState& state, const Collection& c,
                            std::vector<double>& out) {
  const auto& s = state.stats;
  const auto& obs = c[j];
  out.resize(state.k_bases());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto w = static_cast<double>(state.w_bins[k]);
    const auto bin = bin_index_unchecked(obs.t, state.w_bins[k], c.range()) - 1;
    const double weight = (state.alpha + static_cast<double>(s.ku(k, obs.unit))) *
                          (state.beta + static_cast<double>(s.n_kl[k][bin])) /
                          (w * state.beta + static_cast<double>(s.n_k[k])) * w;
    out[k] = std::log(weight);
  }
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string("non-finite value in ") + what);
  }
}

double clamp_hyper(double v) { return std::clamp(v, kHyperMin, kHyperMax); }

// Fixed point x <- x * num(x) / den(x), stopping on relative change < tol.
template <typename Num, typename Den>
double iterate_fixed_point(double x, const FitConfig& cfg, Num num, Den den,
                           const char* what) {
  for (std::size_t it = 0; it < cfg.fixed_point_max_iters; ++it) {
    const double n = num(x);
    const double d = den(x);
    check_finite(n, what);
    check_finite(d, what);
    if (!(d > 0.0)) return x;  // no data informs this hyperparameter
    const double next = clamp_hyper(x * (n / d));
    check_finite(next, what);
    const double change = std::abs(next - x) / x;
    x = next;
    if (change < cfg.fixed_point_tol) break;
  }
  return x;
}

double run_sweep(GibbsState& state, const Collection& c, const FitConfig& cfg, Rng& rng,
                 const std::vector<std::size_t>& order) {
  const auto by_basis = sorted_values_by_basis(state, c, order);
  for (std::size_t k = 0; k < state.k_bases(); ++k) {
    draw_bin_count(k, by_basis[k], state, c.range(), rng);
  }
  sweep_assignments(state, c, rng);
  if (cfg.hyper_update) update_hyperparameters(state, cfg);
  return log_joint(state, c);
}

}  // namespace

void FitConfig::validate() const {
  if (k_bases < 1) throw std::invalid_argument("FitConfig: k_bases must be >= 1");
  if (w_max < 1) throw std::invalid_argument("FitConfig: w_max must be >= 1");
  if (posterior_samples < 1) {
    throw std::invalid_argument("FitConfig: posterior_samples must be >= 1");
  }
  if (!(alpha0 > 0.0) || !(beta0 > 0.0) || !std::isfinite(alpha0) || !std::isfinite(beta0)) {
    throw std::invalid_argument("FitConfig: alpha0 and beta0 must be positive");
  }
  if (!(fixed_point_tol > 0.0)) {
    throw std::invalid_argument("FitConfig: fixed_point_tol must be positive");
  }
  if (fixed_point_max_iters < 1) {
    throw std::invalid_argument("FitConfig: fixed_point_max_iters must be >= 1");
  }
}

std::vector<std::size_t> FitResult::bin_counts() const {
  std::vector<std::size_t> out;
  out.reserve(bases.size());
  for (const auto& b : bases) out.push_back(b.bin_count());
  return out;
}

std::vector<std::int64_t> bin_counts_sorted(std::span<const double> sorted_values,
                                            std::size_t bin_count, const Range& range) {
  std::vector<std::int64_t> counts(bin_count, 0);
  auto it = sorted_values.begin();
  while (it != sorted_values.end()) {
    const std::size_t l = bin_index_unchecked(*it, bin_count, range);
    // bin_index is monotone in t, so bin l is a contiguous run
    const auto end = std::partition_point(it, sorted_values.end(), [&](double t) {
      return bin_index_unchecked(t, bin_count, range) <= l;
    });
    counts[l - 1] = end - it;
    it = end;
  }
  return counts;
}

std::vector<double> bin_count_log_scores(std::span<const double> sorted_values,
                                         const Range& range, double beta,
                                         std::size_t w_max) {
  if (w_max < 1) throw std::invalid_argument("bin_count_log_scores: w_max must be >= 1");
  const auto n = static_cast<double>(sorted_values.size());
  const double lg_beta = ln_gamma(beta);
  std::vector<double> scores(w_max, 0.0);
  for (std::size_t w = 1; w <= w_max; ++w) {
    const auto wd = static_cast<double>(w);
    double score = ln_gamma(wd * beta) - ln_gamma(wd * beta + n);
    if (n > 0) score += n * std::log(wd);
    for (auto count : bin_counts_sorted(sorted_values, w, range)) {
      if (count > 0) score += ln_gamma(beta + static_cast<double>(count)) - lg_beta;
    }
    scores[w - 1] = score;
  }
  return scores;
}

std::vector<double> assignment_probabilities(std::size_t j, const GibbsState& state,
                                             const Collection& c) {
  std::vector<double> lw;
  assignment_log_weights(j, state, c, lw);
  const double norm = log_sum_exp(lw);
  for (double& v : lw) v = std::exp(v - norm);
  return lw;
}

std::size_t sample_z_j(std::size_t j, const GibbsState& state, const Collection& c, Rng& rng) {
  std::vector<double> lw;
  assignment_log_weights(j, state, c, lw);
  return sample_categorical_log(lw, rng);
}

std::size_t sample_W_k(std::size_t k, GibbsState& state, const Collection& c, Rng& rng) {
  if (k >= state.k_bases()) throw std::out_of_range("sample_W_k: basis index out of range");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(state.stats.n_k[k]));
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (state.z[j] == k) values.push_back(c[j].t);
  }
  std::sort(values.begin(), values.end());
  return draw_bin_count(k, values, state, c.range(), rng);
}

std::pair<double, double> update_hyperparameters(GibbsState& state, const FitConfig& cfg) {
  const auto& s = state.stats;
  const std::size_t kb = s.k_bases;
  const double k = static_cast<double>(kb);
  const double uk = static_cast<double>(s.units) * k;

  const double alpha = iterate_fixed_point(
      state.alpha, cfg,
      [&](double a) {
        double acc = 0.0;
        for (std::size_t u = 0; u < s.units; ++u) {
          for (std::size_t kk = 0; kk < kb; ++kk) {
            acc += digamma(a + static_cast<double>(s.ku(kk, u)));
          }
        }
        return acc - uk * digamma(a);
      },
      [&](double a) {
        double acc = 0.0;
        for (std::size_t u = 0; u < s.units; ++u) {
          acc += digamma(k * a + static_cast<double>(s.n_u[u]));
        }
        return k * acc - uk * digamma(k * a);
      },
      "alpha update");

  // Both sides accumulate per basis in the same order, so with every W_k = 1
  // the ratio is exactly one.
  const double beta = iterate_fixed_point(
      state.beta, cfg,
      [&](double b) {
        double bins = 0.0;
        double base = 0.0;
        for (std::size_t kk = 0; kk < kb; ++kk) {
          for (auto n : s.n_kl[kk]) bins += digamma(b + static_cast<double>(n));
          base += static_cast<double>(state.w_bins[kk]) * digamma(b);
        }
        return bins - base;
      },
      [&](double b) {
        double totals = 0.0;
        double base = 0.0;
        for (std::size_t kk = 0; kk < kb; ++kk) {
          const auto w = static_cast<double>(state.w_bins[kk]);
          totals += w * digamma(w * b + static_cast<double>(s.n_k[kk]));
          base += w * digamma(w * b);
        }
        return totals - base;
      },
      "beta update");

  state.alpha = alpha;
  state.beta = beta;
  return {alpha, beta};
}

void sweep_assignments(GibbsState& state, const Collection& c, Rng& rng) {
  std::vector<double> lw;
  for (std::size_t j = 0; j < c.size(); ++j) {
    remove_observation(state, c, j);
    assignment_log_weights(j, state, c, lw);
    add_observation(state, c, j, sample_categorical_log(lw, rng));
  }
}

double sweep(GibbsState& state, const Collection& c, const FitConfig& cfg, Rng& rng) {
  return run_sweep(state, c, cfg, rng, value_order(c));
}

GibbsState initial_state(const Collection& c, const FitConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto weights = rng.dirichlet(cfg.alpha0, cfg.k_bases);
  std::vector<std::uint32_t> z(c.size());
  for (auto& zj : z) zj = static_cast<std::uint32_t>(sample_categorical(weights, rng));
  return make_state(c, std::move(z), std::vector<std::size_t>(cfg.k_bases, 1), cfg.w_max,
                    cfg.alpha0, cfg.beta0);
}

FitResult fit(const Collection& c, const FitConfig& cfg) {
  cfg.validate();
  if (c.empty()) throw std::invalid_argument("fit: collection has no observations");

  Rng rng(cfg.seed);
  GibbsState state = initial_state(c, cfg, rng);
  const auto order = value_order(c);

  FitResult result;
  result.range = c.range();
  const std::size_t total_sweeps = cfg.burn_in_sweeps + cfg.posterior_samples;
  result.log_joint_trace.reserve(total_sweeps);
  result.w_trace.reserve(total_sweeps);

  auto record = [&](double lj) {
    result.log_joint_trace.push_back(lj);
    result.w_trace.push_back(state.w_bins);
    result.alpha_trace.push_back(state.alpha);
    result.beta_trace.push_back(state.beta);
  };

  std::size_t sweep_index = 0;
  try {
    for (; sweep_index < cfg.burn_in_sweeps; ++sweep_index) {
      const double lj = run_sweep(state, c, cfg, rng, order);
      check_finite(lj, "log joint");
      record(lj);
    }

    const std::size_t kb = cfg.k_bases;
    const std::size_t units = c.unit_count();
    const auto k = static_cast<double>(kb);
    std::vector<std::vector<double>> theta(units, std::vector<double>(kb, 0.0));
    std::vector<std::vector<double>> phi(kb);
    for (std::size_t kk = 0; kk < kb; ++kk) phi[kk].assign(state.w_bins[kk], 0.0);

    for (std::size_t p = 0; p < cfg.posterior_samples; ++p, ++sweep_index) {
      sweep_assignments(state, c, rng);
      const auto& s = state.stats;
      for (std::size_t u = 0; u < units; ++u) {
        const double denom = k * state.alpha + static_cast<double>(s.n_u[u]);
        for (std::size_t kk = 0; kk < kb; ++kk) {
          theta[u][kk] += (state.alpha + static_cast<double>(s.ku(kk, u))) / denom;
        }
      }
      for (std::size_t kk = 0; kk < kb; ++kk) {
        const auto w = static_cast<double>(state.w_bins[kk]);
        const double denom = w * state.beta + static_cast<double>(s.n_k[kk]);
        for (std::size_t l = 0; l < phi[kk].size(); ++l) {
          phi[kk][l] += (state.beta + static_cast<double>(s.n_kl[kk][l])) / denom;
        }
      }
      const double lj = log_joint(state, c);
      check_finite(lj, "log joint");
      record(lj);
    }

    const auto np = static_cast<double>(cfg.posterior_samples);
    for (auto& row : theta) {
      for (double& v : row) v /= np;
    }
    result.bases.reserve(kb);
    for (auto& masses : phi) {
      for (double& v : masses) v /= np;
      result.bases.emplace_back(c.range(), std::move(masses));
    }
    result.theta_hat = std::move(theta);
  } catch (const NumericalError& e) {
    throw NumericalError("fit failed at sweep " + std::to_string(sweep_index) + ": " +
                         e.what());
  }

  result.alpha_hat = state.alpha;
  result.beta_hat = state.beta;
  result.final_log_joint = result.log_joint_trace.back();
  return result;
}

MixtureDensity unit_density(const FitResult& result, std::size_t u) {
  if (u >= result.theta_hat.size()) {
    throw std::out_of_range("unit_density: unit index out of range");
  }
  return MixtureDensity(result.bases, result.theta_hat[u]);
}

}  // namespace histlda
