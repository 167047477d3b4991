#include "histlda/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "histlda/baselines.hpp"
#include "histlda/text.hpp"

namespace histlda {

namespace {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-(x - kNormalMean) / (kNormalSd * std::numbers::sqrt2));
}

double exponential_cdf(double x) {
  return x <= 0.0 ? 0.0 : -std::expm1(-kExponentialRate * x);
}

double uniform_cdf(double x) {
  return std::clamp((x - kUniformLo) / (kUniformHi - kUniformLo), 0.0, 1.0);
}

double raw_density(Component c, double t) {
  switch (c) {
    case Component::normal: {
      const double z = (t - kNormalMean) / kNormalSd;
      return std::exp(-0.5 * z * z) / (kNormalSd * std::sqrt(2.0 * std::numbers::pi));
    }
    case Component::exponential:
      return t < 0.0 ? 0.0 : kExponentialRate * std::exp(-kExponentialRate * t);
    case Component::uniform:
      return (t >= kUniformLo && t < kUniformHi) ? 1.0 / (kUniformHi - kUniformLo) : 0.0;
  }
  return 0.0;
}

double raw_draw(Component c, Rng& rng) {
  switch (c) {
    case Component::normal:
      return kNormalMean + kNormalSd * rng.normal();
    case Component::exponential:
      return rng.exponential(kExponentialRate);
    case Component::uniform:
      return rng.uniform(kUniformLo, kUniformHi);
  }
  return 0.0;
}

double mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double average_ise(const std::vector<DensityFn>& estimates, const SyntheticData& data,
                   std::size_t grid_points) {
  const auto& range = data.collection.range();
  double total = 0.0;
  for (std::size_t u = 0; u < estimates.size(); ++u) {
    const auto& w = data.true_weights[u];
    total += ise(estimates[u], [&](double t) { return true_density(w, t, range); }, range,
                 grid_points);
  }
  return total / static_cast<double>(estimates.size());
}

double evaluate_method(Method method, const SyntheticData& data, const FitConfig& cfg,
                       std::size_t grid_points,
                       const std::function<void(const FitResult&)>& on_fit) {
  const auto& c = data.collection;
  std::vector<DensityFn> estimates;
  estimates.reserve(c.unit_count());
  if (method == Method::histlda) {
    const FitResult result = fit(c, cfg);
    if (on_fit) on_fit(result);
    for (std::size_t u = 0; u < c.unit_count(); ++u) {
      estimates.emplace_back([m = unit_density(result, u)](double t) { return m.density(t); });
    }
  } else {
    for (std::size_t u = 0; u < c.unit_count(); ++u) {
      const auto values = c.unit_values(u);
      Histogram h = method == Method::knuth ? knuth_histogram(values, c.range(), cfg.w_max)
                                            : br_histogram(values, c.range(), cfg.w_max);
      estimates.emplace_back([h = std::move(h)](double t) { return h.density(t); });
    }
  }
  return average_ise(estimates, data, grid_points);
}

nlohmann::json config_json(const BenchmarkOptions& o) {
  nlohmann::json methods = nlohmann::json::array();
  for (auto m : o.methods) methods.push_back(method_name(m));
  return {
      {"range", {o.spec.range.t0(), o.spec.range.t1()}},
      {"units", o.spec.units},
      {"dirichlet_concentration", o.spec.dirichlet_concentration},
      {"methods", methods},
      {"m_values", o.m_values},
      {"replicates", o.replicates},
      {"seed", o.seed},
      {"grid_points", o.grid_points},
      {"k_bases", o.fit_config.k_bases},
      {"w_max", o.fit_config.w_max},
      {"burn_in_sweeps", o.fit_config.burn_in_sweeps},
      {"posterior_samples", o.fit_config.posterior_samples},
      {"alpha0", o.fit_config.alpha0},
      {"beta0", o.fit_config.beta0},
      {"hyper_update", o.fit_config.hyper_update},
  };
}

}  // namespace

void SyntheticSpec::validate() const {
  if (units < 1) throw std::invalid_argument("SyntheticSpec: units must be >= 1");
  if (per_unit < 1) throw std::invalid_argument("SyntheticSpec: per_unit must be >= 1");
  if (!(dirichlet_concentration > 0.0)) {
    throw std::invalid_argument("SyntheticSpec: dirichlet_concentration must be positive");
  }
  for (std::size_t c = 0; c < kComponentCount; ++c) {
    if (!(component_mass(static_cast<Component>(c), range) > 0.0)) {
      throw std::invalid_argument("SyntheticSpec: a truth component has no mass in range");
    }
  }
}

double component_mass(Component c, const Range& range) {
  switch (c) {
    case Component::normal:
      return normal_cdf(range.t1()) - normal_cdf(range.t0());
    case Component::exponential:
      return exponential_cdf(range.t1()) - exponential_cdf(range.t0());
    case Component::uniform:
      return uniform_cdf(range.t1()) - uniform_cdf(range.t0());
  }
  return 0.0;
}

double component_density(Component c, double t, const Range& range) {
  range.require(t);
  return raw_density(c, t) / component_mass(c, range);
}

double draw_component(Component c, const Range& range, Rng& rng) {
  for (;;) {
    const double t = raw_draw(c, rng);
    if (range.contains(t)) return t;
  }
}

std::vector<double> draw_unit(const ComponentWeights& weights, std::size_t m,
                              const Range& range, Rng& rng) {
  std::vector<double> out(m);
  for (double& t : out) {
    const auto c = static_cast<Component>(sample_categorical(weights, rng));
    t = draw_component(c, range, rng);
    if (!range.contains(t)) throw std::logic_error("draw_unit: sample escaped the range");
  }
  return out;
}

SyntheticData generate_collection(const SyntheticSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<ComponentWeights> weights(spec.units);
  std::vector<Observation> observations;
  observations.reserve(spec.units * spec.per_unit);
  for (std::size_t u = 0; u < spec.units; ++u) {
    const auto w = rng.dirichlet(spec.dirichlet_concentration, kComponentCount);
    std::copy(w.begin(), w.end(), weights[u].begin());
    for (double t : draw_unit(weights[u], spec.per_unit, spec.range, rng)) {
      observations.push_back({t, u});
    }
  }
  return {Collection(spec.range, spec.units, std::move(observations)), std::move(weights)};
}

double true_density(const ComponentWeights& weights, double t, const Range& range) {
  range.require(t);
  double acc = 0.0;
  for (std::size_t c = 0; c < kComponentCount; ++c) {
    if (weights[c] == 0.0) continue;
    acc += weights[c] * component_density(static_cast<Component>(c), t, range);
  }
  return acc;
}

double integrate(const DensityFn& f, const Range& range, std::size_t grid_points) {
  if (grid_points < 2) throw std::invalid_argument("integrate: need at least 2 grid points");
  const double h = range.width() / static_cast<double>(grid_points - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    double t = range.t0() + static_cast<double>(i) * h;
    if (i + 1 == grid_points || !(t < range.t1())) t = std::nextafter(range.t1(), range.t0());
    const double v = f(t);
    acc += (i == 0 || i + 1 == grid_points) ? 0.5 * v : v;
  }
  return acc * h;
}

double ise(const DensityFn& estimated, const DensityFn& truth, const Range& range,
           std::size_t grid_points) {
  return integrate(
      [&](double t) {
        const double d = estimated(t) - truth(t);
        return d * d;
      },
      range, grid_points);
}

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"histlda", "knuth", "br"};
  return names;
}

std::string method_name(Method m) { return method_names()[static_cast<std::size_t>(m)]; }

Method parse_method(const std::string& name) {
  const auto& names = method_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Method>(i);
  }
  throw std::invalid_argument("unknown method '" + name + "' (valid: histlda, knuth, br)");
}

const BenchmarkSummary& BenchmarkReport::find(Method method, std::size_t m) const {
  for (const auto& s : summary) {
    if (s.method == method && s.m == m) return s;
  }
  throw std::out_of_range("BenchmarkReport: no summary for " + method_name(method) + " at m=" +
                          std::to_string(m));
}

BenchmarkReport run_benchmark(const BenchmarkOptions& options) {
  options.fit_config.validate();
  if (options.replicates < 1) throw std::invalid_argument("run_benchmark: replicates must be >= 1");
  if (options.methods.empty()) throw std::invalid_argument("run_benchmark: no methods");
  for (auto m : options.m_values) {
    SyntheticSpec spec = options.spec;
    spec.per_unit = m;
    spec.validate();
  }

  const auto start = std::chrono::steady_clock::now();
  const std::size_t tasks = options.m_values.size() * options.replicates;
  const std::size_t per_task = options.methods.size();
  BenchmarkReport report;
  report.options = options;
  report.cells.resize(tasks * per_task);

  const Rng master(options.seed);
  auto run_task = [&](std::size_t task) {
    const std::size_t mi = task / options.replicates;
    const std::size_t rep = task % options.replicates;
    Rng cell_rng = master.child(task);
    Rng data_rng = cell_rng.child(0);
    SyntheticSpec spec = options.spec;
    spec.per_unit = options.m_values[mi];
    const SyntheticData data = generate_collection(spec, data_rng);
    FitConfig cfg = options.fit_config;
    cfg.seed = cell_rng.child(1).next_u64();

    for (std::size_t i = 0; i < per_task; ++i) {
      BenchmarkCell& cell = report.cells[task * per_task + i];
      cell.method = options.methods[i];
      cell.m = spec.per_unit;
      cell.replicate = rep;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        std::function<void(const FitResult&)> hook;
        if (options.on_fit) {
          hook = [&](const FitResult& r) { options.on_fit(cell.m, cell.replicate, r); };
        }
        cell.ise = evaluate_method(cell.method, data, cfg, options.grid_points, hook);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cell.runtime_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
              .count();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, tasks);
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < tasks; t = next++) run_task(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (auto m : options.m_values) {
    for (auto method : options.methods) {
      std::vector<double> values;
      for (const auto& cell : report.cells) {
        if (cell.method == method && cell.m == m && cell.ise) values.push_back(*cell.ise);
      }
      const double nan = std::numeric_limits<double>::quiet_NaN();
      report.summary.push_back({method, m, values.empty() ? nan : mean(values),
                                values.empty() ? nan : sample_sd(values), values.size()});
    }
  }
  report.total_runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_report_json(const BenchmarkReport& report, std::ostream& out, bool with_timing) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json j = {{"method", method_name(c.method)}, {"m", c.m}, {"replicate", c.replicate}};
    j["ise"] = c.ise ? nlohmann::json(*c.ise) : nlohmann::json(nullptr);
    if (!c.error.empty()) j["error"] = c.error;
    if (with_timing) j["runtime_ms"] = c.runtime_ms;
    cells.push_back(std::move(j));
  }
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : report.summary) {
    nlohmann::json j = {{"method", method_name(s.method)}, {"m", s.m}, {"succeeded", s.succeeded}};
    j["mean_ise"] = std::isfinite(s.mean_ise) ? nlohmann::json(s.mean_ise) : nlohmann::json(nullptr);
    j["sd_ise"] = std::isfinite(s.sd_ise) ? nlohmann::json(s.sd_ise) : nlohmann::json(nullptr);
    summary.push_back(std::move(j));
  }
  nlohmann::json doc = {{"config", config_json(report.options)},
                        {"summary", summary},
                        {"cells", cells}};
  if (with_timing) doc["total_runtime_ms"] = report.total_runtime_ms;
  out << doc.dump(2) << '\n';
}

void write_report_csv(const BenchmarkReport& report, std::ostream& out, bool with_timing) {
  out << "method,m,replicate,ise,runtime_ms\n";
  for (const auto& c : report.cells) {
    out << method_name(c.method) << ',' << c.m << ',' << c.replicate << ','
        << (c.ise ? format_double(*c.ise) : std::string("NA")) << ','
        << (with_timing ? format_double(c.runtime_ms) : std::string()) << '\n';
  }
}

}  // namespace histlda
