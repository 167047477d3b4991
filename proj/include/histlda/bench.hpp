#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "histlda/gibbs.hpp"
#include "histlda/histogram.hpp"
#include "histlda/model.hpp"

namespace histlda {

/// The three fixed truth components, each truncated to the range.
enum class Component : std::size_t { normal = 0, exponential = 1, uniform = 2 };
inline constexpr std::size_t kComponentCount = 3;

inline constexpr double kNormalMean = 1.0;
inline constexpr double kNormalSd = 0.1;
inline constexpr double kExponentialRate = 2.0;
inline constexpr double kUniformLo = 1.0;
inline constexpr double kUniformHi = 1.5;

using ComponentWeights = std::array<double, kComponentCount>;

struct SyntheticSpec {
  Range range{0.0, 2.0};
  std::size_t units = 100;
  std::size_t per_unit = 100;  // m
  double dirichlet_concentration = 1.0;

  void validate() const;
};

struct SyntheticData {
  Collection collection;
  std::vector<ComponentWeights> true_weights;  // one row per unit
};

/// Mass of a component inside the range (its truncation normalizer).
double component_mass(Component c, const Range& range);

/// Density of a component truncated to the range and renormalized.
double component_density(Component c, double t, const Range& range);

/// One draw from a component, resampled until it lands in the range.
double draw_component(Component c, const Range& range, Rng& rng);

/// m draws from the weighted truth.
std::vector<double> draw_unit(const ComponentWeights& weights, std::size_t m,
                              const Range& range, Rng& rng);

/// Per-unit Dirichlet weights, then `per_unit` draws for each unit.
SyntheticData generate_collection(const SyntheticSpec& spec, Rng& rng);

/// Renormalized truncated mixture density. Throws std::domain_error off range.
double true_density(const ComponentWeights& weights, double t, const Range& range);

using DensityFn = std::function<double(double)>;

/// Trapezoid estimate of the integral of (estimated - truth)^2 over the range
/// on `grid_points` uniform points. Densities are half-open, so the last
/// point uses the left limit at t1.
double ise(const DensityFn& estimated, const DensityFn& truth, const Range& range,
           std::size_t grid_points = 2001);

/// Trapezoid integral of a density over the range, same grid convention.
double integrate(const DensityFn& f, const Range& range, std::size_t grid_points);

enum class Method { histlda, knuth, br };

std::string method_name(Method m);
/// Throws std::invalid_argument on an unknown name.
Method parse_method(const std::string& name);
const std::vector<std::string>& method_names();

struct BenchmarkCell {
  Method method;
  std::size_t m;
  std::size_t replicate;
  std::optional<double> ise;  // empty when the fit failed
  double runtime_ms = 0.0;
  std::string error;
};

struct BenchmarkSummary {
  Method method;
  std::size_t m;
  double mean_ise;
  double sd_ise;  // sample standard deviation over successful replicates
  std::size_t succeeded;
};

struct BenchmarkOptions {
  SyntheticSpec spec;
  std::vector<Method> methods{Method::histlda, Method::knuth, Method::br};
  std::vector<std::size_t> m_values{50, 100, 150, 200, 250, 300};
  std::size_t replicates = 3;
  FitConfig fit_config;
  std::uint64_t seed = 0;
  std::size_t grid_points = 2001;
  std::size_t threads = 1;
  /// Called with each HistLDA fit as (m, replicate, result). May run on
  /// worker threads concurrently.
  std::function<void(std::size_t, std::size_t, const FitResult&)> on_fit;
};

struct BenchmarkReport {
  BenchmarkOptions options;
  std::vector<BenchmarkCell> cells;  // ordered by m, replicate, method
  std::vector<BenchmarkSummary> summary;
  double total_runtime_ms = 0.0;

  const BenchmarkSummary& find(Method method, std::size_t m) const;
};

/// For every (m, replicate): generate a collection from a stream derived from
/// (seed, cell index), fit HistLDA on the pooled data and each baseline per
/// unit, and record the unit-averaged ISE. Results do not depend on `threads`.
BenchmarkReport run_benchmark(const BenchmarkOptions& options);

/// Report writers. Timing fields are written only when `with_timing` is set,
/// so reports without timing are byte-reproducible.
void write_report_json(const BenchmarkReport& report, std::ostream& out, bool with_timing);
void write_report_csv(const BenchmarkReport& report, std::ostream& out, bool with_timing);

}  // namespace histlda
