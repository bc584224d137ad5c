#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fofr/csv.hpp"
#include "fofr/fofr_model.hpp"
#include "fofr/simgen.hpp"
#include "fofr/study_config.hpp"

using namespace fofr;

namespace {

const char* cli_path() { return std::getenv("FOFR_CLI"); }

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string dir = "/tmp/fofr_cli_tests";
  std::filesystem::create_directories(dir);
  const std::string out_file = dir + "/cmd_output.txt";
  const std::string cmd =
      std::string(cli_path()) + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  res.output = ss.str();
  return res;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  os << content;
}

const std::string kDir = "/tmp/fofr_cli_tests";

std::string table1_config(int n, int M) {
  std::ostringstream ss;
  ss << R"({
  "scenario": {"a": 2.5, "latent": "exp", "w": "normal", "slope": "prod",
               "sign_seed": 11, "n": )"
     << n << R"(, "grid_m": 41},
  "bootstrap": {"B": 50, "seed": 12345},
  "study": {"M": )"
     << M << R"(, "n": )" << n << R"(}
})";
  return ss.str();
}

}  // namespace

TEST_CASE("cli: simulate is byte-identical across reruns and round-trips") {
  if (!cli_path()) {
    MESSAGE("FOFR_CLI not set; skipping CLI tests");
    return;
  }
  std::filesystem::create_directories(kDir);
  write_file(kDir + "/sim.json", table1_config(20, 1));

  const RunResult a = run("simulate --config " + kDir + "/sim.json --out-dir " +
                          kDir + "/sim_a");
  REQUIRE(a.exit_code == 0);
  const RunResult b = run("simulate --config " + kDir + "/sim.json --out-dir " +
                          kDir + "/sim_b");
  REQUIRE(b.exit_code == 0);
  for (const char* name : {"x.csv", "y.csv", "x0.csv", "truth_mu_x0.csv",
                           "slope_kernel.csv", "eigvals.csv"}) {
    CHECK(slurp(kDir + "/sim_a/" + name) == slurp(kDir + "/sim_b/" + name));
  }

  // round trip: the re-ingested dataset reproduces the in-memory fit exactly
  const CurveTable xt = read_curve_table(kDir + "/sim_a/x.csv");
  const CurveTable yt = read_curve_table(kDir + "/sim_a/y.csv");

  StudyConfig cfg = parse_study_config(table1_config(20, 1), "inline");
  const StudyContext ctx = make_study_context(cfg.scenario);
  RngStream rng{StreamKey(cfg.seed).child(0).child(0)};
  const Dataset ds = gen_dataset(ctx, cfg.scenario, rng);

  REQUIRE(Grid::same(xt.grid, ctx.grid));
  CHECK((xt.rows.array() == ds.X.rows.array()).all());
  CHECK((yt.rows.array() == ds.Y.rows.array()).all());

  const FofrModel from_files = fit_fofr(xt.fnset(), yt.fnset(), 2);
  const FofrModel in_memory = fit_fofr(ds.X, ds.Y, 2);
  CHECK((from_files.slope_coefs.array() == in_memory.slope_coefs.array())
            .all());
  CHECK((from_files.intercept.values.array() ==
         in_memory.intercept.values.array())
            .all());
}

TEST_CASE("cli: fit prints the k selection and errors carry exit codes") {
  if (!cli_path()) return;
  std::filesystem::create_directories(kDir);
  write_file(kDir + "/sim.json", table1_config(20, 1));
  REQUIRE(run("simulate --config " + kDir + "/sim.json --out-dir " + kDir +
              "/fitdata")
              .exit_code == 0);

  const RunResult fit = run("fit --x " + kDir + "/fitdata/x.csv --y " + kDir +
                            "/fitdata/y.csv --k loocv --k-max 5");
  CHECK(fit.exit_code == 0);
  CHECK(fit.output.find("k_selected: ") != std::string::npos);
  CHECK(fit.output.find("in_sample_mse: ") != std::string::npos);
  CHECK(fit.output.find("eigenvalues:") != std::string::npos);

  // malformed float: exit 2 and the message names the cell
  write_file(kDir + "/bad.csv", "0,0.5,1\n1.0,oops,3.0\n");
  const RunResult bad =
      run("fit --x " + kDir + "/bad.csv --y " + kDir + "/bad.csv");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("line 2") != std::string::npos);
  CHECK(bad.output.find("column 2") != std::string::npos);

  // grid mismatch: exit 3
  write_file(kDir + "/gridA.csv", "0,0.5,1\n1,2,3\n2,3,4\n3,4,5\n");
  write_file(kDir + "/gridB.csv", "0,0.25,0.5\n1,2,3\n2,3,4\n3,4,5\n");
  const RunResult mismatch =
      run("fit --x " + kDir + "/gridA.csv --y " + kDir + "/gridB.csv");
  CHECK(mismatch.exit_code == 3);

  // truncation beyond the numerical rank: exit 4
  const RunResult too_large = run("fit --x " + kDir + "/fitdata/x.csv --y " +
                                  kDir + "/fitdata/y.csv --k 99");
  CHECK(too_large.exit_code == 4);
}

TEST_CASE("cli: fit on a noiseless pair reaches machine-level error") {
  if (!cli_path()) return;
  std::filesystem::create_directories(kDir);
  write_file(kDir + "/lowrank.json", R"({
  "scenario": {"a": 2.5, "J0": 4, "latent": "normal", "w": "normal",
               "slope": "diag", "sign_seed": 8, "n": 20, "grid_m": 41,
               "error_scale": 0.0},
  "bootstrap": {"seed": 21}
})");
  REQUIRE(run("simulate --config " + kDir + "/lowrank.json --out-dir " + kDir +
              "/lowrank")
              .exit_code == 0);
  const RunResult fit =
      run("fit --x " + kDir + "/lowrank/x.csv --y " + kDir +
          "/lowrank/y.csv --k loocv --k-max 6");
  REQUIRE(fit.exit_code == 0);
  // selected truncation captures the full 4-component span exactly
  const auto pos = fit.output.find("in_sample_mse: ");
  REQUIRE(pos != std::string::npos);
  const double mse = std::stod(fit.output.substr(pos + 15));
  CHECK(mse <= 1e-8);
}

TEST_CASE("cli: infer produces the interval table; degenerate data collapses") {
  if (!cli_path()) return;
  std::filesystem::create_directories(kDir);
  write_file(kDir + "/clean.json", R"({
  "scenario": {"a": 2.5, "latent": "exp", "w": "normal", "slope": "prod",
               "sign_seed": 3, "n": 18, "grid_m": 41},
  "bootstrap": {"B": 40, "seed": 5}
})");
  REQUIRE(run("simulate --config " + kDir + "/clean.json --out-dir " + kDir +
              "/clean")
              .exit_code == 0);
  // identical constant responses: residuals are exactly zero, so every
  // halfwidth prints as exactly 0
  {
    const CurveTable xt = read_curve_table(kDir + "/clean/x.csv");
    write_curve_table_file(kDir + "/clean/y.csv", xt.grid,
                           MatrixXd::Ones(xt.rows.rows(), xt.grid->size()),
                           nullptr, {"constant responses"});
  }
  const RunResult inf = run(
      "infer --x " + kDir + "/clean/x.csv --y " + kDir + "/clean/y.csv" +
      " --x0 " + kDir + "/clean/x0.csv --k 1 --g k --h 1 --B 40 --seed 5" +
      " --method rb --proj constant --eval-t 0.5,0.9 --out " + kDir +
      "/clean_infer.csv");
  REQUIRE(inf.exit_code == 0);
  const std::string table = slurp(kDir + "/clean_infer.csv");
  CHECK(table.find("# rng=") != std::string::npos);
  CHECK(table.find("target,method,level,center") != std::string::npos);
  CHECK(table.find("mr,rb,") != std::string::npos);
  CHECK(table.find("proj,rb,") != std::string::npos);
  CHECK(table.find("eval,rb,") != std::string::npos);

  // every halfwidth / radius column reads exactly 0
  std::istringstream lines(table);
  std::string line;
  int data_rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("target,", 0) == 0)
      continue;
    const auto fields = split_csv_line(line);
    REQUIRE(fields.size() >= 7);
    CHECK(fields[4] == "0");
    ++data_rows;
  }
  CHECK(data_rows == 4);  // mr + proj + 2 eval rows
}

TEST_CASE("cli: test command emits a p-value line") {
  if (!cli_path()) return;
  std::filesystem::create_directories(kDir);
  write_file(kDir + "/sim.json", table1_config(25, 1));
  REQUIRE(run("simulate --config " + kDir + "/sim.json --out-dir " + kDir +
              "/testdata")
              .exit_code == 0);
  const RunResult res =
      run("test --x " + kDir + "/testdata/x.csv --y " + kDir +
          "/testdata/y.csv --x0 " + kDir +
          "/testdata/x0.csv --k 2 --g k --h 3 --B 99 --seed 7");
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("statistic,p_value,B") != std::string::npos);
  CHECK(res.output.find(",99\n") != std::string::npos);
}

TEST_CASE("cli: plotdata row count equals the sum of series lengths") {
  if (!cli_path()) return;
  std::filesystem::create_directories(kDir);
  write_file(kDir + "/curves.csv", "0,0.5,1\n1,2,3\n4,5,6\n");
  const RunResult res = run("plotdata --curves " + kDir + "/curves.csv" +
                            " --out " + kDir + "/plot.csv");
  REQUIRE(res.exit_code == 0);
  const std::string out = slurp(kDir + "/plot.csv");
  int rows = 0;
  std::istringstream lines(out);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] != '#' && line.rfind("series,", 0) != 0)
      ++rows;
  }
  CHECK(rows == 2 * 3);
}

TEST_CASE("cli: weather converter shapes, logs, and region averages") {
  if (!cli_path()) return;
  std::filesystem::create_directories(kDir);

  // two cities, 365 synthetic days
  std::ostringstream temp, precip;
  temp << "North,South\n";
  precip << "North,South\n";
  for (int d = 1; d <= 365; ++d) {
    temp << (d * 0.01) << "," << (10.0 + d * 0.02) << "\n";
    precip << (1.0 + d * 0.001) << "," << (2.0 + d * 0.001) << "\n";
  }
  write_file(kDir + "/w_temp.csv", temp.str());
  write_file(kDir + "/w_precip.csv", precip.str());
  write_file(kDir + "/w_regions.csv", "city,region\nNorth,Arctic\nSouth,Pacific\n");

  const RunResult conv = run("weather --temp " + kDir + "/w_temp.csv" +
                             " --precip " + kDir + "/w_precip.csv" +
                             " --regions " + kDir + "/w_regions.csv" +
                             " --out-dir " + kDir + "/weather");
  REQUIRE(conv.exit_code == 0);

  const CurveTable x = read_curve_table(kDir + "/weather/x.csv");
  const CurveTable y = read_curve_table(kDir + "/weather/y.csv");
  REQUIRE(x.rows.rows() == 2);
  REQUIRE(x.grid->size() == 365);
  CHECK(x.grid->points()[0] == 0.0);
  CHECK(x.grid->points()[364] == 1.0);
  CHECK(x.ids == std::vector<std::string>{"North", "South"});
  // responses are log10 of the precipitation
  CHECK(y.rows(0, 0) == doctest::Approx(std::log10(1.001)).epsilon(1e-12));

  // a single-city region average equals the city's curve
  const CurveTable arctic = read_curve_table(kDir + "/weather/x0_Arctic.csv");
  REQUIRE(arctic.rows.rows() == 1);
  CHECK((arctic.rows.row(0).array() == x.rows.row(0).array()).all());

  // non-positive precipitation names the offending cell
  std::ostringstream precip_bad;
  precip_bad << "North,South\n";
  for (int d = 1; d <= 365; ++d) {
    if (d == 42) {
      precip_bad << "0.0," << (2.0 + d * 0.001) << "\n";
    } else {
      precip_bad << (1.0 + d * 0.001) << "," << (2.0 + d * 0.001) << "\n";
    }
  }
  write_file(kDir + "/w_precip_bad.csv", precip_bad.str());
  const RunResult bad = run("weather --temp " + kDir + "/w_temp.csv" +
                            " --precip " + kDir + "/w_precip_bad.csv" +
                            " --regions " + kDir + "/w_regions.csv" +
                            " --out-dir " + kDir + "/weather_bad");
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("day 42") != std::string::npos);
  CHECK(bad.output.find("North") != std::string::npos);

  // wrong day count rejected
  write_file(kDir + "/w_short.csv", "North,South\n1,2\n3,4\n");
  const RunResult short_run = run("weather --temp " + kDir + "/w_short.csv" +
                                  " --precip " + kDir + "/w_precip.csv" +
                                  " --regions " + kDir + "/w_regions.csv" +
                                  " --out-dir " + kDir + "/weather_short");
  CHECK(short_run.exit_code == 3);
}

TEST_CASE("cli: config schema rejects unknown keys") {
  if (!cli_path()) return;
  std::filesystem::create_directories(kDir);
  write_file(kDir + "/bad.json", R"({"scenario": {"a": 2.5}, "typo": 1})");
  const RunResult res = run("coverage --config " + kDir + "/bad.json");
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("unknown key") != std::string::npos);
}

TEST_CASE("cli: coverage runs a tiny study deterministically") {
  if (!cli_path()) return;
  std::filesystem::create_directories(kDir);
  write_file(kDir + "/cov.json", R"({
  "scenario": {"a": 2.5, "latent": "exp", "w": "normal", "slope": "prod",
               "sign_seed": 2, "grid_m": 31},
  "truncations": {"k": "loocv", "k_max": 3, "delta": [0]},
  "bootstrap": {"B": 30, "seed": 77},
  "study": {"M": 6, "n": 15}
})");
  const RunResult a = run("coverage --config " + kDir + "/cov.json --out " +
                          kDir + "/cov_a.csv --threads 1");
  REQUIRE(a.exit_code == 0);
  const RunResult b = run("coverage --config " + kDir + "/cov.json --out " +
                          kDir + "/cov_b.csv --threads 2");
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(kDir + "/cov_a.csv") == slurp(kDir + "/cov_b.csv"));
  CHECK(slurp(kDir + "/cov_a.csv").find("method,target,n,delta") !=
        std::string::npos);

  // FOFR_SEED overrides the configured seed
  const std::string cmd =
      std::string("FOFR_SEED=99 ") + cli_path() + " coverage --config " +
      kDir + "/cov.json --out " + kDir + "/cov_c.csv > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(slurp(kDir + "/cov_c.csv").find("seed=99") != std::string::npos);
}
