// Drives the installed binary end to end through its public flags.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "drx/pipeline.hpp"
#include "plants.hpp"

namespace fs = std::filesystem;
using drx::Json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DRX_CLI_PATH) + " " + args;
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("help is available for every subcommand") {
  REQUIRE(run_cli("--help > /dev/null 2>&1") == 0);
  for (const char* sub : {"ingest", "stats", "fit", "forecast", "spikeprob",
                          "welfare", "synth", "run"}) {
    CAPTURE(sub);
    REQUIRE(run_cli(std::string(sub) + " --help > /dev/null 2>&1") == 0);
  }
}

TEST_CASE("synth - fit - forecast round trip through files") {
  TempDir tmp("drx_cli_roundtrip");
  const fs::path spec = tmp.path / "spec.json";
  Json j{{"price", drx::json_of(plants::white_log_prices())},
         {"plant", Json{{"base", drx::json_of(plants::reference_peak_model())},
                        {"noise_std", 281.0}}}};
  drx::write_json_file(spec.string(), j);
  const fs::path csv = tmp.path / "data.csv";

  REQUIRE(run_cli("synth demand --spec " + spec.string() + " --n 20000 --seed 3 --out " +
                  csv.string() + " 2> /dev/null") == 0);
  REQUIRE(fs::exists(csv));

  // Deterministic regeneration.
  const fs::path csv2 = tmp.path / "data2.csv";
  REQUIRE(run_cli("synth demand --spec " + spec.string() + " --n 20000 --seed 3 --out " +
                  csv2.string() + " 2> /dev/null") == 0);
  REQUIRE(slurp(csv) == slurp(csv2));

  const fs::path fit_out = tmp.path / "fit.json";
  const fs::path model_out = tmp.path / "model.json";
  REQUIRE(run_cli("fit arx --input " + csv.string() +
                  " --lags 1 2 4 --xlags 4 --transform log --threshold 1e18 --out " +
                  fit_out.string() + " --model-out " + model_out.string() +
                  " 2> /dev/null") == 0);
  const Json fit = drx::load_json_file(fit_out.string());
  const double beta = fit.at("model").at("x_coeffs").at(0).get<double>();
  REQUIRE(beta < -180.0);
  REQUIRE(beta > -260.0);

  const fs::path fc_out = tmp.path / "forecast.csv";
  REQUIRE(run_cli("forecast --input " + csv.string() + " --model " +
                  model_out.string() + " --horizon 8 --out " + fc_out.string() +
                  " 2> /dev/null") == 0);
  const std::string fc = slurp(fc_out);
  REQUIRE(fc.find("timestamp,qhat,q,residual") != std::string::npos);
  REQUIRE(std::count(fc.begin(), fc.end(), '\n') == 9);  // header + 8 rows
}

TEST_CASE("stats and spikeprob subcommands emit their formats") {
  TempDir tmp("drx_cli_stats");
  const fs::path spec = tmp.path / "spec.json";
  drx::write_json_file(spec.string(), drx::json_of(plants::spiky_prices()));
  const fs::path csv = tmp.path / "prices.csv";
  REQUIRE(run_cli("synth prices --spec " + spec.string() +
                  " --n 9600 --seed 5 --out " + csv.string() + " 2> /dev/null") == 0);

  const fs::path mom = tmp.path / "moments.json";
  REQUIRE(run_cli("stats moments --input " + csv.string() + " --field price --out " +
                  mom.string() + " 2> /dev/null") == 0);
  const Json m = drx::load_json_file(mom.string());
  REQUIRE(m.at("n").get<std::size_t>() == 9600);
  REQUIRE(m.at("kurtosis").get<double>() > 3.0);

  const fs::path sp = tmp.path / "spike.csv";
  REQUIRE(run_cli("spikeprob --input " + csv.string() +
                  " --window 09:00-15:00 --range q90:q100 --max-delay 12 --out " +
                  sp.string() + " 2> /dev/null") == 0);
  const std::string text = slurp(sp);
  REQUIRE(text.find("lag,conditional,baseline,hits,count") != std::string::npos);
  REQUIRE(std::count(text.begin(), text.end(), '\n') == 13);
}

TEST_CASE("welfare subcommand reports totals") {
  TempDir tmp("drx_cli_welfare");
  const fs::path scenario = tmp.path / "s.json";
  drx::write_json_file(scenario.string(), Json::parse(R"([
    {"demand": {"intercept": 100, "slope": -1},
     "supplies": [{"intercept": 0, "slope": 1}, {"intercept": -20, "slope": 1}]}
  ])"));
  const fs::path out_csv = tmp.path / "w.csv";
  const fs::path out_json = tmp.path / "w.json";
  REQUIRE(run_cli("welfare --scenario " + scenario.string() +
                  " --policy rtrp-inertia --out " + out_csv.string() +
                  " --json-out " + out_json.string() + " 2> /dev/null") == 0);
  const Json totals = drx::load_json_file(out_json.string());
  REQUIRE(totals.at("total").get<double>() == 100.0);
}

TEST_CASE("run subcommand fails loudly on a missing input") {
  TempDir tmp("drx_cli_run_fail");
  const fs::path cfg = tmp.path / "config.json";
  drx::RunConfig c;
  c.input_csv = (tmp.path / "missing.csv").string();
  c.out_dir = (tmp.path / "out").string();
  drx::write_json_file(cfg.string(), drx::json_of(c));
  REQUIRE(run_cli("run --config " + cfg.string() + " 2> /dev/null") == 2);
}

TEST_CASE("unknown flags are rejected") {
  REQUIRE(run_cli("fit --frobnicate 2> /dev/null") != 0);
}
