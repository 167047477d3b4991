#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "histlda/cli.hpp"
#include "histlda/io.hpp"
#include "histlda/text.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace histlda;

namespace {

const Range kRange(0.0, 2.0);

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("histlda_test_" + std::to_string(Rng(std::random_device{}()).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "histlda");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> tiny_fit_args(const std::string& data, const std::string& out) {
  return {"fit", "--data", data, "--out", out, "--k", "2", "--w-max", "6",
          "--sweeps", "40", "--np", "10", "--seed", "9"};
}

}  // namespace

TEST_CASE("read_data_csv parses units in order of first appearance") {
  std::istringstream in("unit_id,t\nb,0.5\na,1.25\nb,1.999\n");
  const auto lc = read_data_csv(in, kRange);
  CHECK(lc.unit_ids == std::vector<std::string>{"b", "a"});
  CHECK(lc.collection.size() == 3);
  CHECK(lc.collection[1].unit == 1);
  CHECK(lc.collection[2].t == 1.999);
}

TEST_CASE("read_data_csv names the offending row") {
  const std::vector<std::pair<std::string, std::size_t>> bad{
      {"unit_id,t\nu,0.5\nu,2.0\n", 3},
      {"unit_id,t\nu,abc\n", 2},
      {"unit_id,t\nu,0.1\nu,0.2\nu,-0.1\n", 4},
      {"unit_id,t\nu\n", 2},
      {"unit_id,t\nu,nan\n", 2},
      {"id,time\nu,0.5\n", 1},
  };
  for (const auto& [text, row] : bad) {
    std::istringstream in(text);
    try {
      read_data_csv(in, kRange);
      FAIL("accepted " << text);
    } catch (const DataError& e) {
      CHECK(e.row() == row);
      CHECK(std::string(e.what()).find(std::to_string(row)) != std::string::npos);
    }
  }
}

TEST_CASE("data CSV round trip") {
  Rng rng(11);
  std::vector<Observation> obs;
  for (int i = 0; i < 200; ++i) obs.push_back({rng.uniform(0.0, 2.0), rng.uniform_index(5)});
  const Collection c(kRange, 5, obs);
  std::ostringstream out;
  write_data_csv(out, c, {"u0", "u1", "u2", "u3", "u4"});
  std::istringstream in(out.str());
  const auto back = read_data_csv(in, kRange);
  REQUIRE(back.collection.size() == c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    CHECK(back.collection[j].t == c[j].t);
    CHECK(back.unit_ids[back.collection[j].unit] == "u" + std::to_string(c[j].unit));
  }
}

TEST_CASE("model JSON round trip is bit-exact") {
  Rng rng(12);
  for (int rep = 0; rep < 25; ++rep) {
    ModelFile m;
    const std::size_t k = 1 + rng.uniform_index(4);
    const std::size_t units = 1 + rng.uniform_index(6);
    const Range r(rng.uniform(-5.0, 0.0), rng.uniform(0.5, 5.0));
    m.fit.range = r;
    for (std::size_t b = 0; b < k; ++b) {
      m.fit.bases.emplace_back(r, rng.dirichlet(rng.uniform(0.1, 3.0), 1 + rng.uniform_index(40)));
    }
    for (std::size_t u = 0; u < units; ++u) {
      m.fit.theta_hat.push_back(rng.dirichlet(0.7, k));
      m.unit_ids.push_back("id," + std::to_string(u) + "\"q");
    }
    m.fit.alpha_hat = rng.uniform(1e-4, 50.0);
    m.fit.beta_hat = rng.uniform(1e-4, 50.0);
    m.fit.final_log_joint = -rng.uniform(0.0, 1e6);
    m.config.k_bases = k;
    m.config.seed = rng.next_u64();
    m.config.hyper_update = rep % 2 == 0;
    const auto back = model_from_json(model_to_json(m));
    CHECK(back.unit_ids == m.unit_ids);
    CHECK(back.fit.range == m.fit.range);
    CHECK(back.fit.theta_hat == m.fit.theta_hat);
    REQUIRE(back.fit.bases.size() == k);
    for (std::size_t b = 0; b < k; ++b) CHECK(back.fit.bases[b].masses() == m.fit.bases[b].masses());
    CHECK(back.fit.alpha_hat == m.fit.alpha_hat);
    CHECK(back.fit.beta_hat == m.fit.beta_hat);
    CHECK(back.fit.final_log_joint == m.fit.final_log_joint);
    CHECK(back.config.seed == m.config.seed);
    CHECK(back.config.hyper_update == m.config.hyper_update);
    CHECK(model_to_json(back) == model_to_json(m));
  }
}

TEST_CASE("model_from_json rejects malformed documents") {
  CHECK_THROWS_AS(model_from_json("not json"), DataError);
  CHECK_THROWS_AS(model_from_json("{}"), DataError);
  CHECK_THROWS_AS(model_from_json(R"({"schema_version": 99})"), DataError);
}

TEST_CASE("parse_range") {
  CHECK(parse_range("0,2") == Range(0.0, 2.0));
  CHECK(parse_range("-1.5,3") == Range(-1.5, 3.0));
  CHECK_THROWS(parse_range("2,0"));
  CHECK_THROWS(parse_range("0"));
  CHECK_THROWS(parse_range("a,b"));
}

TEST_CASE("generate writes the requested rows deterministically") {
  TempDir dir;
  auto r = run_cli({"generate", "--units", "4", "--per-unit", "25", "--seed", "3", "--out",
                    dir.file("a.csv")});
  REQUIRE(r.code == cli::kExitOk);
  const auto lines = lines_of(slurp(dir.file("a.csv")));
  CHECK(lines.size() == 1 + 4 * 25);
  CHECK(lines.front() == "unit_id,t");
  CHECK(fs::exists(dir.file("a.csv.truth.json")));
  run_cli({"generate", "--units", "4", "--per-unit", "25", "--seed", "3", "--out", dir.file("b.csv")});
  CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
  const auto lc = read_data_csv_file(dir.file("a.csv"), kRange);
  CHECK(lc.collection.unit_count() == 4);
}

TEST_CASE("usage errors exit with 2 and a JSON error line") {
  TempDir dir;
  const auto r = run_cli({"generate", "--units", "4", "--per-unit", "0", "--out", dir.file("x.csv")});
  CHECK(r.code == cli::kExitUsage);
  const auto j = nlohmann::json::parse(lines_of(r.err).at(0));
  CHECK(j.at("exit_code") == 2);
  CHECK(j.contains("error"));
  CHECK(j.contains("message"));
  CHECK(run_cli({"nonsense"}).code == cli::kExitUsage);
  CHECK(run_cli({"generate", "--units", "2", "--out", dir.file("nodir/deeper/x.csv")}).code ==
        cli::kExitUsage);
  CHECK(run_cli({"fit", "--data", dir.file("missing.csv"), "--out", dir.file("m.json")}).code ==
        cli::kExitData);
}

TEST_CASE("fit on malformed data exits with 3") {
  TempDir dir;
  write_text(dir.file("bad.csv"), "unit_id,t\nu,0.5\nu,7\n");
  const auto r = run_cli({"fit", "--data", dir.file("bad.csv"), "--out", dir.file("m.json")});
  CHECK(r.code == cli::kExitData);
  CHECK(r.err.find("3") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.file("m.json")));
}

TEST_CASE("fit, eval and reproducibility") {
  TempDir dir;
  REQUIRE(run_cli({"generate", "--units", "5", "--per-unit", "40", "--seed", "1", "--out",
                   dir.file("d.csv")})
              .code == 0);
  auto fit1 = run_cli(tiny_fit_args(dir.file("d.csv"), dir.file("m1.json")));
  REQUIRE(fit1.code == 0);
  CHECK(fit1.out.find("log_joint") != std::string::npos);
  CHECK(fit1.out.find("bin_counts") != std::string::npos);
  auto fit2 = run_cli(tiny_fit_args(dir.file("d.csv"), dir.file("m2.json")));
  CHECK(fit1.out == fit2.out);
  CHECK(slurp(dir.file("m1.json")) == slurp(dir.file("m2.json")));

  const auto model = load_model(dir.file("m1.json"));
  for (const auto& row : model.fit.theta_hat) {
    double s = 0.0;
    for (double v : row) s += v;
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }

  REQUIRE(run_cli({"eval", "--model", dir.file("m1.json"), "--unit", "3", "--out", dir.file("e.csv")})
              .code == 0);
  const auto lines = lines_of(slurp(dir.file("e.csv")));
  REQUIRE(lines.size() == 2002);
  CHECK(lines[0] == "t,density");
  const auto mix = unit_density(model.fit, model.unit_index("3"));
  double area = 0.0;
  double prev_t = 0.0, prev_f = 0.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    double t = 0.0, d = 0.0;
    REQUIRE(parse_double(f.at(0), t));
    REQUIRE(parse_double(f.at(1), d));
    CHECK(d >= 0.0);
    const double at = t < 2.0 ? t : std::nextafter(2.0, 0.0);
    CHECK(d == doctest::Approx(mix.density(at)).epsilon(1e-12));
    if (i > 1) area += 0.5 * (t - prev_t) * (d + prev_f);
    prev_t = t;
    prev_f = d;
  }
  CHECK(std::abs(area - 1.0) <= 1e-3);

  CHECK(run_cli({"eval", "--model", dir.file("m1.json"), "--unit", "nope", "--out", dir.file("f.csv")})
            .code == cli::kExitUsage);
  CHECK(run_cli({"eval", "--model", dir.file("m1.json"), "--unit", "1", "--grid-points", "1", "--out",
                 dir.file("f.csv")})
            .code == cli::kExitUsage);
}

TEST_CASE("a single one-bin basis fits the uniform density") {
  TempDir dir;
  run_cli({"generate", "--units", "3", "--per-unit", "20", "--seed", "5", "--out", dir.file("d.csv")});
  REQUIRE(run_cli({"fit", "--data", dir.file("d.csv"), "--out", dir.file("m.json"), "--k", "1",
                   "--w-max", "1", "--sweeps", "5", "--np", "3"})
              .code == 0);
  const auto m = load_model(dir.file("m.json"));
  REQUIRE(m.fit.bases.size() == 1);
  CHECK(m.fit.bases[0].masses() == std::vector<double>{1.0});
  for (const auto& row : m.fit.theta_hat) CHECK(row == std::vector<double>{1.0});
}

TEST_CASE("fit writes a per-sweep trace") {
  TempDir dir;
  run_cli({"generate", "--units", "3", "--per-unit", "20", "--seed", "5", "--out", dir.file("d.csv")});
  auto args = tiny_fit_args(dir.file("d.csv"), dir.file("m.json"));
  args.insert(args.end(), {"--trace", dir.file("trace.csv")});
  REQUIRE(run_cli(args).code == 0);
  CHECK(lines_of(slurp(dir.file("trace.csv"))).size() == 1 + 40 + 10);
}

TEST_CASE("benchmark subcommand") {
  TempDir dir;
  const std::string prefix = dir.file("bench");
  const auto r = run_cli({"benchmark", "--m-list", "10,20", "--units", "6", "--replicates", "2",
                          "--methods", "knuth,br", "--seed", "4", "--out-prefix", prefix});
  REQUIRE(r.code == 0);
  const auto csv = lines_of(slurp(prefix + ".csv"));
  CHECK(csv.size() == 1 + 2 * 2 * 2);
  const auto j = nlohmann::json::parse(slurp(prefix + ".json"));
  CHECK(j.contains("cells"));
  CHECK(run_cli({"benchmark", "--methods", "knuth,gmm", "--out-prefix", prefix}).code == cli::kExitUsage);
  CHECK(run_cli({"benchmark", "--m-list", "10,x", "--out-prefix", prefix}).code == cli::kExitUsage);
}

TEST_CASE("the installed binary reports exit codes") {
  TempDir dir;
  const std::string exe = HISTLDA_CLI_PATH;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status(exe + " generate --units 2 --per-unit 5 --out " + dir.file("d.csv")) == 0);
  CHECK(status(exe + " generate --units 2 --per-unit 0 --out " + dir.file("d.csv")) == 2);
  write_text(dir.file("bad.csv"), "unit_id,t\nu,9\n");
  CHECK(status(exe + " fit --data " + dir.file("bad.csv") + " --out " + dir.file("m.json")) == 3);
  CHECK(status(exe + " --help") == 0);
}
