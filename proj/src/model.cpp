#include "histlda/model.hpp"

#include <cmath>
#include <stdexcept>

namespace histlda {

Collection::Collection(Range range, std::size_t unit_count,
                       std::vector<Observation> observations)
    : range_(range),
      unit_count_(unit_count),
      observations_(std::move(observations)),
      unit_sizes_(unit_count, 0) {
  for (const auto& obs : observations_) {
    range_.require(obs.t);
    if (obs.unit >= unit_count_) {
      throw std::invalid_argument("Collection: unit index out of range");
    }
    ++unit_sizes_[obs.unit];
  }
}

std::vector<double> Collection::unit_values(std::size_t u) const {
  if (u >= unit_count_) throw std::out_of_range("Collection: unit index out of range");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(unit_sizes_[u]));
  for (const auto& obs : observations_) {
    if (obs.unit == u) out.push_back(obs.t);
  }
  return out;
}

bool SuffStats::consistent() const {
  if (n_ku.size() != k_bases * units || n_kl.size() != k_bases || n_k.size() != k_bases ||
      n_u.size() != units) {
    return false;
  }
  std::int64_t total = 0;
  for (std::size_t k = 0; k < k_bases; ++k) {
    std::int64_t by_unit = 0;
    for (std::size_t u = 0; u < units; ++u) {
      if (ku(k, u) < 0) return false;
      by_unit += ku(k, u);
    }
    std::int64_t by_bin = 0;
    for (auto n : n_kl[k]) {
      if (n < 0) return false;
      by_bin += n;
    }
    if (by_unit != n_k[k] || by_bin != n_k[k]) return false;
    total += n_k[k];
  }
  std::int64_t unit_total = 0;
  for (std::size_t u = 0; u < units; ++u) {
    std::int64_t sum = 0;
    for (std::size_t k = 0; k < k_bases; ++k) sum += ku(k, u);
    if (sum != n_u[u]) return false;
    unit_total += n_u[u];
  }
  return total == unit_total;
}

SuffStats recount(const std::vector<std::uint32_t>& z, const std::vector<std::size_t>& w_bins,
                  const Collection& c) {
  if (z.size() != c.size()) throw std::invalid_argument("recount: one z per observation");
  if (w_bins.empty()) throw std::invalid_argument("recount: need at least one basis");
  SuffStats s;
  s.k_bases = w_bins.size();
  s.units = c.unit_count();
  s.n_ku.assign(s.k_bases * s.units, 0);
  s.n_k.assign(s.k_bases, 0);
  s.n_u = c.unit_sizes();
  s.n_kl.resize(s.k_bases);
  for (std::size_t k = 0; k < s.k_bases; ++k) {
    if (w_bins[k] == 0) throw std::invalid_argument("recount: bin counts must be >= 1");
    s.n_kl[k].assign(w_bins[k], 0);
  }
  for (std::size_t j = 0; j < c.size(); ++j) {
    const std::size_t k = z[j];
    if (k >= s.k_bases) throw std::invalid_argument("recount: z out of range");
    const auto& obs = c[j];
    ++s.ku(k, obs.unit);
    ++s.n_k[k];
    ++s.n_kl[k][bin_index_unchecked(obs.t, w_bins[k], c.range()) - 1];
  }
  return s;
}

GibbsState make_state(const Collection& c, std::vector<std::uint32_t> z,
                      std::vector<std::size_t> w_bins, std::size_t w_max, double alpha,
                      double beta) {
  GibbsState state;
  state.stats = recount(z, w_bins, c);
  state.z = std::move(z);
  state.w_bins = std::move(w_bins);
  state.w_max = w_max;
  state.alpha = alpha;
  state.beta = beta;
  for (auto w : state.w_bins) {
    if (w > w_max) throw std::invalid_argument("make_state: W_k exceeds W_max");
  }
  return state;
}

double log_weight_evidence(const SuffStats& s, double alpha) {
  const double k = static_cast<double>(s.k_bases);
  const double per_unit_const = ln_gamma(k * alpha) - k * ln_gamma(alpha);
  double total = 0.0;
  for (std::size_t u = 0; u < s.units; ++u) {
    double term = per_unit_const - ln_gamma(k * alpha + static_cast<double>(s.n_u[u]));
    for (std::size_t kk = 0; kk < s.k_bases; ++kk) {
      term += ln_gamma(alpha + static_cast<double>(s.ku(kk, u)));
    }
    total += term;
  }
  return total;
}

double log_mass_evidence(const SuffStats& s, const std::vector<std::size_t>& w_bins,
                         double beta) {
  const double lg_beta = ln_gamma(beta);
  double total = 0.0;
  for (std::size_t k = 0; k < s.k_bases; ++k) {
    const double w = static_cast<double>(w_bins[k]);
    double term = ln_gamma(w * beta) - ln_gamma(w * beta + static_cast<double>(s.n_k[k])) -
                  w * lg_beta;
    for (auto n : s.n_kl[k]) term += ln_gamma(beta + static_cast<double>(n));
    total += term;
  }
  return total;
}

double log_joint(const GibbsState& state, const Collection& c, double alpha, double beta) {
  const auto& s = state.stats;
  double total = -static_cast<double>(s.k_bases) * std::log(static_cast<double>(state.w_max));
  total += log_weight_evidence(s, alpha);
  total += log_mass_evidence(s, state.w_bins, beta);
  for (std::size_t k = 0; k < s.k_bases; ++k) {
    if (s.n_k[k] == 0) continue;
    total += static_cast<double>(s.n_k[k]) *
             std::log(static_cast<double>(state.w_bins[k]) / c.range().width());
  }
  return total;
}

double log_joint(const GibbsState& state, const Collection& c) {
  return log_joint(state, c, state.alpha, state.beta);
}

}  // namespace histlda
