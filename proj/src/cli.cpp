#include "histlda/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "histlda/bench.hpp"
#include "histlda/gibbs.hpp"
#include "histlda/io.hpp"
#include "histlda/text.hpp"

namespace histlda::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw UsageError("failed writing '" + path + "'");
}

Range range_flag(const std::string& text) {
  try {
    return parse_range(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::string join_sizes(const std::vector<std::size_t>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

// --- generate -------------------------------------------------------------

struct GenerateArgs {
  std::size_t units = 0;
  std::size_t per_unit = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string range = "0,2";
};

void cmd_generate(const GenerateArgs& a, std::ostream& log) {
  SyntheticSpec spec;
  spec.range = range_flag(a.range);
  spec.units = a.units;
  spec.per_unit = a.per_unit;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  Rng rng(a.seed);
  const SyntheticData data = generate_collection(spec, rng);
  std::vector<std::string> ids;
  for (std::size_t u = 0; u < spec.units; ++u) ids.push_back(std::to_string(u + 1));

  auto out = open_output(a.out);
  write_data_csv(out, data.collection, ids);
  finish_output(out, a.out);

  nlohmann::json units = nlohmann::json::array();
  for (std::size_t u = 0; u < spec.units; ++u) {
    units.push_back({{"id", ids[u]}, {"weights", data.true_weights[u]}});
  }
  const nlohmann::json truth = {
      {"range", {spec.range.t0(), spec.range.t1()}},
      {"components", {"normal(1,0.1^2)", "exponential(2)", "uniform[1,1.5)"}},
      {"seed", a.seed},
      {"units", units}};
  const std::string truth_path = a.out + ".truth.json";
  auto side = open_output(truth_path);
  side << truth.dump(2) << '\n';
  finish_output(side, truth_path);
  log << "wrote " << data.collection.size() << " rows to " << a.out << '\n';
}

// --- fit ------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string out;
  std::string range = "0,2";
  std::string trace;
  FitConfig cfg;
  bool fix_hypers = false;
};

void write_trace(const FitResult& r, const std::string& path) {
  auto out = open_output(path);
  out << "sweep,log_joint,alpha,beta";
  for (std::size_t k = 0; k < r.k_bases(); ++k) out << ",w" << (k + 1);
  out << '\n';
  for (std::size_t s = 0; s < r.log_joint_trace.size(); ++s) {
    out << (s + 1) << ',' << format_double(r.log_joint_trace[s]) << ','
        << format_double(r.alpha_trace[s]) << ',' << format_double(r.beta_trace[s]);
    for (auto w : r.w_trace[s]) out << ',' << w;
    out << '\n';
  }
  finish_output(out, path);
}

void cmd_fit(FitArgs a, std::ostream& log) {
  a.cfg.hyper_update = !a.fix_hypers;
  try {
    a.cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Range range = range_flag(a.range);
  const LabeledCollection data = read_data_csv_file(a.data, range);
  if (data.collection.empty()) throw DataError("data file has no observations");

  ModelFile model;
  model.unit_ids = data.unit_ids;
  model.config = a.cfg;
  model.fit = fit(data.collection, a.cfg);

  auto out = open_output(a.out);
  out << model_to_json(model);
  finish_output(out, a.out);
  if (!a.trace.empty()) write_trace(model.fit, a.trace);

  log << "log_joint " << format_double(model.fit.final_log_joint) << '\n'
      << "alpha " << format_double(model.fit.alpha_hat) << '\n'
      << "beta " << format_double(model.fit.beta_hat) << '\n'
      << "bin_counts " << join_sizes(model.fit.bin_counts(), ' ') << '\n';
}

// --- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::string unit;
  std::size_t grid_points = 2001;
  std::string out;
};

void cmd_eval(const EvalArgs& a, std::ostream& log) {
  const ModelFile model = load_model(a.model);
  std::size_t u = 0;
  try {
    u = model.unit_index(a.unit);
  } catch (const std::out_of_range& e) {
    throw UsageError(e.what());
  }
  const MixtureDensity density = unit_density(model.fit, u);
  const Range& range = model.fit.range;
  const double h = range.width() / static_cast<double>(a.grid_points - 1);
  auto out = open_output(a.out);
  out << "t,density\n";
  for (std::size_t i = 0; i < a.grid_points; ++i) {
    const bool last = i + 1 == a.grid_points;
    const double t = last ? range.t1() : range.t0() + static_cast<double>(i) * h;
    // the final row carries the left limit at t1
    const double at = t < range.t1() ? t : std::nextafter(range.t1(), range.t0());
    out << format_double(t) << ',' << format_double(density.density(at)) << '\n';
  }
  finish_output(out, a.out);
  log << "wrote " << a.grid_points << " grid points for unit " << a.unit << " to " << a.out
      << '\n';
}

// --- benchmark ------------------------------------------------------------

struct BenchArgs {
  std::string m_list = "50,100,150,200,250,300";
  std::size_t units = 100;
  std::size_t replicates = 3;
  std::string methods = "histlda,knuth,br";
  std::uint64_t seed = 0;
  std::string out_prefix;
  std::string range = "0,2";
  std::size_t threads = 0;
  std::size_t grid_points = 2001;
  bool timing = false;
  FitConfig cfg;
};

void cmd_benchmark(const BenchArgs& a, std::ostream& log) {
  BenchmarkOptions o;
  o.spec.range = range_flag(a.range);
  o.spec.units = a.units;
  o.replicates = a.replicates;
  o.seed = a.seed;
  o.grid_points = a.grid_points;
  o.fit_config = a.cfg;
  o.threads = a.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : a.threads;
  o.methods.clear();
  for (const auto& name : split(a.methods, ',')) {
    try {
      o.methods.push_back(parse_method(name));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  o.m_values.clear();
  for (const auto& item : split(a.m_list, ',')) {
    double v = 0.0;
    if (!parse_double(item, v) || v < 1.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw UsageError("--m-list entries must be positive integers, got '" + item + "'");
    }
    o.m_values.push_back(static_cast<std::size_t>(v));
  }
  try {
    o.fit_config.validate();
    o.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const BenchmarkReport report = run_benchmark(o);
  const std::string json_path = a.out_prefix + ".json";
  const std::string csv_path = a.out_prefix + ".csv";
  auto json_out = open_output(json_path);
  write_report_json(report, json_out, a.timing);
  finish_output(json_out, json_path);
  auto csv_out = open_output(csv_path);
  write_report_csv(report, csv_out, a.timing);
  finish_output(csv_out, csv_path);

  log << "method\tm\tmean_ise\tsd_ise\n";
  for (const auto& s : report.summary) {
    log << method_name(s.method) << '\t' << s.m << '\t' << format_double(s.mean_ise) << '\t'
        << format_double(s.sd_ise) << '\n';
  }
  for (const auto& c : report.cells) {
    if (!c.error.empty()) {
      log << "failed: " << method_name(c.method) << " m=" << c.m << " replicate=" << c.replicate
          << ": " << c.error << '\n';
    }
  }
}

void add_fit_flags(CLI::App* app, FitConfig& cfg) {
  app->add_option("--k", cfg.k_bases, "Number of basis histograms")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--w-max", cfg.w_max, "Largest bin count considered")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--sweeps", cfg.burn_in_sweeps, "Burn-in sweeps with W and hyperparameter updates")
      ->capture_default_str();
  app->add_option("--np", cfg.posterior_samples, "Posterior samples averaged for the estimates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--alpha0", cfg.alpha0, "Initial alpha")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--beta0", cfg.beta0, "Initial beta")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void report_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  const nlohmann::json line = {{"error", kind}, {"exit_code", code}, {"message", message}};
  err << line.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Histogram LDA: per-unit densities as mixtures of shared basis histograms",
               "histlda"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic trimodal collection");
  generate->add_option("--units", gen.units, "Number of units")->required()->check(CLI::PositiveNumber);
  generate->add_option("--per-unit", gen.per_unit, "Observations per unit")
      ->required()
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  generate->add_option("--out", gen.out, "Output CSV path")->required();
  generate->add_option("--range", gen.range, "Range as t0,t1")->capture_default_str();

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "Fit a model by collapsed Gibbs sampling");
  fitc->add_option("--data", fa.data, "Input CSV with header unit_id,t")->required();
  fitc->add_option("--out", fa.out, "Output model JSON path")->required();
  fitc->add_option("--seed", fa.cfg.seed, "Random seed")->capture_default_str();
  fitc->add_option("--range", fa.range, "Range as t0,t1")->capture_default_str();
  fitc->add_option("--trace", fa.trace, "Optional per-sweep trace CSV");
  fitc->add_flag("--fix-hypers", fa.fix_hypers, "Keep alpha and beta at their initial values");
  add_fit_flags(fitc, fa.cfg);

  EvalArgs ea;
  auto* evalc = app.add_subcommand("eval", "Evaluate a unit's fitted density on a grid");
  evalc->add_option("--model", ea.model, "Model JSON from fit")->required();
  evalc->add_option("--unit", ea.unit, "Unit id as it appears in the data")->required();
  evalc->add_option("--grid-points", ea.grid_points, "Grid size")
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()))
      ->capture_default_str();
  evalc->add_option("--out", ea.out, "Output CSV path")->required();

  BenchArgs ba;
  auto* benchc = app.add_subcommand("benchmark", "Compare HistLDA with Knuth and BR by ISE");
  benchc->add_option("--m-list", ba.m_list, "Comma-separated per-unit sizes")->capture_default_str();
  benchc->add_option("--units", ba.units, "Units per collection")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  benchc->add_option("--replicates", ba.replicates, "Collections per size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  benchc->add_option("--methods", ba.methods, "Comma-separated subset of histlda,knuth,br")
      ->capture_default_str();
  benchc->add_option("--seed", ba.seed, "Master seed")->capture_default_str();
  benchc->add_option("--out-prefix", ba.out_prefix, "Writes PREFIX.json and PREFIX.csv")->required();
  benchc->add_option("--range", ba.range, "Range as t0,t1")->capture_default_str();
  benchc->add_option("--threads", ba.threads, "Worker threads (0 = all cores)")->capture_default_str();
  benchc->add_option("--grid-points", ba.grid_points, "ISE quadrature points")
      ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()))
      ->capture_default_str();
  benchc->add_flag("--timing", ba.timing, "Record wall-clock runtimes in the report");
  add_fit_flags(benchc, ba.cfg);

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", kExitUsage, e.what());
    return kExitUsage;
  }

  try {
    if (generate->parsed()) cmd_generate(gen, out);
    if (fitc->parsed()) cmd_fit(fa, out);
    if (evalc->parsed()) cmd_eval(ea, out);
    if (benchc->parsed()) cmd_benchmark(ba, out);
  } catch (const UsageError& e) {
    report_error(err, "usage", kExitUsage, e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    report_error(err, "data", kExitData, e.what());
    return kExitData;
  } catch (const NumericalError& e) {
    report_error(err, "numerical", kExitData, e.what());
    return kExitData;
  } catch (const std::exception& e) {
    report_error(err, "data", kExitData, e.what());
    return kExitData;
  }
  return kExitOk;
}

}  // namespace histlda::cli
