#include "histlda/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "histlda/gibbs.hpp"

namespace histlda {

namespace {

constexpr double kJeffreys = 0.5;

std::vector<double> checked_sorted(std::span<const double> data, const Range& range,
                                   std::size_t w_max, const char* who) {
  if (data.empty()) throw std::invalid_argument(std::string(who) + ": no data");
  if (w_max < 1) throw std::invalid_argument(std::string(who) + ": w_max must be >= 1");
  std::vector<double> sorted(data.begin(), data.end());
  for (double t : sorted) range.require(t);
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

}  // namespace

std::size_t BinScoreTable::best() const {
  if (scores.empty()) throw std::logic_error("BinScoreTable: no scores");
  // max_element returns the first maximum, i.e. the smallest W on ties
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) -
                                  scores.begin()) +
         1;
}

BinScoreTable knuth_scores(std::span<const double> data, const Range& range, std::size_t w_max) {
  const auto sorted = checked_sorted(data, range, w_max, "knuth_scores");
  return {BinMethod::knuth, bin_count_log_scores(sorted, range, kJeffreys, w_max)};
}

std::size_t knuth_bin_number(std::span<const double> data, const Range& range,
                             std::size_t w_max) {
  return knuth_scores(data, range, w_max).best();
}

Histogram knuth_histogram(std::span<const double> data, const Range& range, std::size_t w_max) {
  return knuth_masses(data, range, knuth_bin_number(data, range, w_max));
}

Histogram knuth_masses(std::span<const double> data, const Range& range, std::size_t w) {
  const auto sorted = checked_sorted(data, range, w, "knuth_masses");
  const auto counts = bin_counts_sorted(sorted, w, range);
  const double denom = static_cast<double>(sorted.size()) + static_cast<double>(w) * kJeffreys;
  std::vector<double> masses(w);
  for (std::size_t l = 0; l < w; ++l) {
    masses[l] = (static_cast<double>(counts[l]) + kJeffreys) / denom;
  }
  return Histogram(range, std::move(masses));
}

double br_penalty(std::size_t bin_count) {
  const double lw = std::log(static_cast<double>(bin_count));
  return static_cast<double>(bin_count) - 1.0 + std::pow(lw, 2.5);
}

BinScoreTable br_scores(std::span<const double> data, const Range& range, std::size_t w_max) {
  const auto sorted = checked_sorted(data, range, w_max, "br_scores");
  const auto n = static_cast<double>(sorted.size());
  BinScoreTable table{BinMethod::br, std::vector<double>(w_max)};
  for (std::size_t w = 1; w <= w_max; ++w) {
    const double scale = static_cast<double>(w) / (n * range.width());
    double loglik = 0.0;
    for (auto count : bin_counts_sorted(sorted, w, range)) {
      // empty bins contribute 0 ln 0 = 0
      if (count > 0) {
        const auto c = static_cast<double>(count);
        loglik += c * std::log(c * scale);
      }
    }
    table.scores[w - 1] = loglik - br_penalty(w);
  }
  return table;
}

std::size_t br_bin_number(std::span<const double> data, const Range& range, std::size_t w_max) {
  return br_scores(data, range, w_max).best();
}

Histogram br_histogram(std::span<const double> data, const Range& range, std::size_t w_max) {
  return br_masses(data, range, br_bin_number(data, range, w_max));
}

Histogram br_masses(std::span<const double> data, const Range& range, std::size_t w) {
  const auto sorted = checked_sorted(data, range, w, "br_masses");
  const auto counts = bin_counts_sorted(sorted, w, range);
  const auto n = static_cast<double>(sorted.size());
  std::vector<double> masses(w);
  for (std::size_t l = 0; l < w; ++l) masses[l] = static_cast<double>(counts[l]) / n;
  return Histogram(range, std::move(masses));
}

}  // namespace histlda
