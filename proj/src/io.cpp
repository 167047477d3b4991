#include "histlda/io.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "histlda/text.hpp"

namespace histlda {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

json config_to_json(const FitConfig& c) {
  return {{"k_bases", c.k_bases},
          {"w_max", c.w_max},
          {"burn_in_sweeps", c.burn_in_sweeps},
          {"posterior_samples", c.posterior_samples},
          {"alpha0", c.alpha0},
          {"beta0", c.beta0},
          {"hyper_update", c.hyper_update},
          {"fixed_point_tol", c.fixed_point_tol},
          {"fixed_point_max_iters", c.fixed_point_max_iters},
          {"seed", c.seed}};
}

FitConfig config_from_json(const json& j) {
  FitConfig c;
  c.k_bases = j.at("k_bases").get<std::size_t>();
  c.w_max = j.at("w_max").get<std::size_t>();
  c.burn_in_sweeps = j.at("burn_in_sweeps").get<std::size_t>();
  c.posterior_samples = j.at("posterior_samples").get<std::size_t>();
  c.alpha0 = j.at("alpha0").get<double>();
  c.beta0 = j.at("beta0").get<double>();
  c.hyper_update = j.at("hyper_update").get<bool>();
  c.fixed_point_tol = j.at("fixed_point_tol").get<double>();
  c.fixed_point_max_iters = j.at("fixed_point_max_iters").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

Range parse_range(const std::string& text) {
  const auto parts = split(text, ',');
  double t0 = 0.0;
  double t1 = 0.0;
  if (parts.size() != 2 || !parse_double(parts[0], t0) || !parse_double(parts[1], t1)) {
    throw std::invalid_argument("range must be given as 't0,t1', got '" + text + "'");
  }
  return Range(t0, t1);
}

LabeledCollection read_data_csv(std::istream& in, const Range& range) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("data file is empty", 1);
  const auto header = split(trim(line), ',');
  if (header.size() != 2 || trim(header[0]) != "unit_id" || trim(header[1]) != "t") {
    throw DataError("row 1: expected header 'unit_id,t'", 1);
  }
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  std::vector<Observation> observations;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto fields = split(content, ',');
    if (fields.size() != 2) {
      throw DataError("row " + std::to_string(row) + ": expected 2 fields", row);
    }
    const std::string id = trim(fields[0]);
    if (id.empty()) throw DataError("row " + std::to_string(row) + ": empty unit_id", row);
    double t = 0.0;
    if (!parse_double(fields[1], t)) {
      throw DataError("row " + std::to_string(row) + ": malformed value '" + trim(fields[1]) + "'",
                      row);
    }
    if (!range.contains(t)) {
      throw DataError("row " + std::to_string(row) + ": t=" + format_double(t) + " outside [" +
                          format_double(range.t0()) + ", " + format_double(range.t1()) + ")",
                      row);
    }
    auto [it, inserted] = index.emplace(id, ids.size());
    if (inserted) ids.push_back(id);
    observations.push_back({t, it->second});
  }
  const std::size_t units = ids.size();
  return {Collection(range, units, std::move(observations)), std::move(ids)};
}

LabeledCollection read_data_csv_file(const std::string& path, const Range& range) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return read_data_csv(in, range);
}

void write_data_csv(std::ostream& out, const Collection& c,
                    const std::vector<std::string>& unit_ids) {
  if (unit_ids.size() != c.unit_count()) {
    throw std::invalid_argument("write_data_csv: one id per unit required");
  }
  out << "unit_id,t\n";
  for (const auto& obs : c.observations()) {
    out << unit_ids[obs.unit] << ',' << format_double(obs.t) << '\n';
  }
}

std::size_t ModelFile::unit_index(const std::string& id) const {
  for (std::size_t u = 0; u < unit_ids.size(); ++u) {
    if (unit_ids[u] == id) return u;
  }
  throw std::out_of_range("unknown unit id '" + id + "'");
}

std::string model_to_json(const ModelFile& model) {
  const auto& f = model.fit;
  json bases = json::array();
  for (const auto& b : f.bases) bases.push_back(b.masses());
  json units = json::array();
  for (std::size_t u = 0; u < model.unit_ids.size(); ++u) {
    units.push_back({{"id", model.unit_ids[u]}, {"theta", f.theta_hat.at(u)}});
  }
  const json doc = {{"schema_version", model.schema_version},
                    {"range", {f.range.t0(), f.range.t1()}},
                    {"k", f.k_bases()},
                    {"bin_counts", f.bin_counts()},
                    {"alpha", f.alpha_hat},
                    {"beta", f.beta_hat},
                    {"final_log_joint", f.final_log_joint},
                    {"bases", bases},
                    {"units", units},
                    {"config", config_to_json(model.config)}};
  return doc.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    ModelFile model;
    model.schema_version = doc.at("schema_version").get<int>();
    if (model.schema_version != ModelFile::kSchemaVersion) {
      throw DataError("unsupported model schema version " + std::to_string(model.schema_version));
    }
    const auto range = doc.at("range").get<std::vector<double>>();
    if (range.size() != 2) throw DataError("model range must have two entries");
    model.fit.range = Range(range[0], range[1]);
    const auto k = doc.at("k").get<std::size_t>();
    const auto bin_counts = doc.at("bin_counts").get<std::vector<std::size_t>>();
    const auto& bases = doc.at("bases");
    if (bin_counts.size() != k || bases.size() != k) {
      throw DataError("model has inconsistent basis count");
    }
    for (std::size_t kk = 0; kk < k; ++kk) {
      auto masses = bases[kk].get<std::vector<double>>();
      if (masses.size() != bin_counts[kk]) throw DataError("basis masses do not match bin count");
      model.fit.bases.emplace_back(model.fit.range, std::move(masses));
    }
    for (const auto& unit : doc.at("units")) {
      model.unit_ids.push_back(unit.at("id").get<std::string>());
      auto theta = unit.at("theta").get<std::vector<double>>();
      if (theta.size() != k) throw DataError("unit weights do not match basis count");
      model.fit.theta_hat.push_back(std::move(theta));
    }
    model.fit.alpha_hat = doc.at("alpha").get<double>();
    model.fit.beta_hat = doc.at("beta").get<double>();
    model.fit.final_log_joint = doc.at("final_log_joint").get<double>();
    model.config = config_from_json(doc.at("config"));
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid model file: ") + e.what());
  }
}

void save_model(const ModelFile& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
  out << model_to_json(model);
  if (!out) throw std::runtime_error("failed writing model file '" + path + "'");
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace histlda
