// Exercises the installed binary end to end through temp files.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dvqr/data.hpp"
#include "dvqr/oracles.hpp"

using namespace dvqr;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const fs::path outfile = fs::temp_directory_path() / "dvqr_cli_out.txt";
  const std::string cmd = std::string(DVQR_CLI_PATH) + " " + args + " > " +
                          outfile.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream in(outfile);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(rc), ss.str()};
}

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "dvqr_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string worked_example_csv(std::uint64_t seed) {
  MvnSpec spec{{0, 0, 0, 0},
               {{1.0, 0.4, 0.8, 0.0},
                {0.4, 1.0, 0.32, 0.0},
                {0.8, 0.32, 1.0, 0.0},
                {0.0, 0.0, 0.0, 1.0}}};
  Matrix m = sample_mvn(spec, 500, seed);
  DataTable t;
  t.names = {"V", "U1", "U2", "U3"};
  t.cols.assign(4, {});
  for (const auto& row : m)
    for (int c = 0; c < 4; ++c) t.cols[c].push_back(row[c]);
  return format_table(t);
}

}  // namespace

TEST_CASE("fit prints the selected order and is byte-stable") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "train.csv";
  std::ofstream(csv) << worked_example_csv(derive_seed(2024, 1));

  const fs::path model = dir / "model.json";
  RunResult r = run_cli("fit --input " + csv.string() + " --response V --output " +
                        model.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("order: V-U2-U1") != std::string::npos);

  // rerun: identical model document
  const fs::path model2 = dir / "model2.json";
  run_cli("fit --input " + csv.string() + " --response V --output " +
          model2.string());
  std::stringstream a, b;
  a << std::ifstream(model).rdbuf();
  b << std::ifstream(model2).rdbuf();
  CHECK(a.str() == b.str());
  CHECK(!a.str().empty());
}

TEST_CASE("fit error paths exit with code 2") {
  const fs::path dir = workdir();
  RunResult r = run_cli("fit --input " + (dir / "absent.csv").string() +
                        " --response V --output " + (dir / "m.json").string());
  CHECK(r.exit_code == 2);

  const fs::path badcsv = dir / "bad.csv";
  std::ofstream(badcsv) << "V,U1\n1.0,2.0\n1.5,\n";
  r = run_cli("fit --input " + badcsv.string() + " --response V --output " +
              (dir / "m.json").string());
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("row 3") != std::string::npos);

  std::ofstream(badcsv) << "V,U1\n1.0,2.0\n1.5,abc\n";
  r = run_cli("fit --input " + badcsv.string() + " --response V --output " +
              (dir / "m.json").string());
  CHECK(r.exit_code == 2);

  const fs::path okcsv = dir / "ok.csv";
  std::ofstream(okcsv) << worked_example_csv(3);
  r = run_cli("fit --input " + okcsv.string() + " --response NOPE --output " +
              (dir / "m.json").string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("predict: sorted non-crossing columns, model round trip") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "train.csv";
  std::ofstream(csv) << worked_example_csv(derive_seed(2024, 2));
  const fs::path model = dir / "model.json";
  REQUIRE(run_cli("fit --input " + csv.string() + " --response V --output " +
                  model.string()).exit_code == 0);

  const fs::path pred = dir / "pred.csv";
  RunResult r = run_cli("predict --model " + model.string() + " --input " +
                        csv.string() + " --alpha 0.9 --alpha 0.1 --alpha 0.5 " +
                        "--output " + pred.string());
  REQUIRE(r.exit_code == 0);
  DataTable p = read_table(pred.string());
  REQUIRE(p.ncols() == 3);  // ascending alpha order
  CHECK(p.names[0].find("0.1") != std::string::npos);
  for (std::size_t i = 0; i < p.nrows(); ++i) {
    CHECK(p.cols[0][i] < p.cols[1][i]);
    CHECK(p.cols[1][i] < p.cols[2][i]);
  }

  // missing required covariate column named in the error
  const fs::path nou2 = dir / "noU2.csv";
  {
    DataTable t = parse_table(worked_example_csv(5));
    DataTable cut;
    cut.names = {"V", "U1", "U3"};
    cut.cols = {t.cols[0], t.cols[1], t.cols[3]};
    write_table(cut, nou2.string());
  }
  r = run_cli("predict --model " + model.string() + " --input " + nou2.string() +
              " --alpha 0.5 --output " + (dir / "p2.csv").string());
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("U2") != std::string::npos);
}

TEST_CASE("stress: default three paper levels, monotone outputs") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "train.csv";
  std::ofstream(csv) << worked_example_csv(derive_seed(2024, 3));
  const fs::path model = dir / "model.json";
  REQUIRE(run_cli("fit --input " + csv.string() + " --response V --output " +
                  model.string()).exit_code == 0);

  const fs::path stress = dir / "stress.csv";
  RunResult r = run_cli("stress --model " + model.string() + " --output " +
                        stress.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(stress);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> values;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  REQUIRE(values.size() == 3);  // moderate / severe / extreme
  CHECK(values[0] <= values[1]);
  CHECK(values[1] <= values[2]);
  CHECK(values[0] > 0.5);  // positive dependence raises the median level

  // explicit kappa map; out-of-range level is a config error
  r = run_cli("stress --model " + model.string() + " --kappa U2=1.7 --output " +
              (dir / "s2.csv").string());
  CHECK(r.exit_code == 2);
  r = run_cli("stress --model " + model.string() + " --kappa U2=0.95 --output " +
              (dir / "s2.csv").string());
  CHECK(r.exit_code == 0);

  // --raw-scale pushes levels through the response margin (ordering kept)
  r = run_cli("stress --model " + model.string() + " --raw-scale --output " +
              (dir / "s3.csv").string());
  REQUIRE(r.exit_code == 0);
  std::ifstream rin(dir / "s3.csv");
  std::getline(rin, line);
  std::vector<double> raw;
  while (std::getline(rin, line))
    raw.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  REQUIRE(raw.size() == 3);
  CHECK(raw[0] <= raw[1]);
  CHECK(raw[1] <= raw[2]);
  CHECK(raw[2] > 0.5);  // raw response scale, not a u-level
}

TEST_CASE("fit on unrelated covariates prints the no-covariates notice") {
  const fs::path dir = workdir();
  const fs::path csv = dir / "indep.csv";
  {
    DataTable t;
    t.names = {"Y", "X1"};
    t.cols.assign(2, {});
    Rng rng(404);
    for (int i = 0; i < 300; ++i) {
      t.cols[0].push_back(rng.normal());
      t.cols[1].push_back(rng.normal());
    }
    write_table(t, csv.string());
  }
  RunResult r = run_cli("fit --input " + csv.string() + " --response Y "
                        "--output " + (dir / "im.json").string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("no covariates selected") != std::string::npos);
}

TEST_CASE("simulate: smoke, determinism, config errors") {
  const fs::path dir = workdir();
  const fs::path rep = dir / "report.csv";
  RunResult r = run_cli(
      "simulate --scenario c3 --param 0.86 --margins m1 --ntrain 100 --reps 2 "
      "--alpha 0.5 --seed 11 --output " + rep.string());
  REQUIRE(r.exit_code == 0);
  {
    std::ifstream in(rep);
    std::string line;
    std::getline(in, line);
    CHECK(line == "scenario,margins,parameter,n_train,alpha,method,mise,rmise,"
                  "seconds,failures");
    int rows = 0;
    while (std::getline(in, line))
      if (!line.empty()) rows++;
    CHECK(rows == 2);  // DVQR + LQR
    CHECK(r.out.find("DVQR") != std::string::npos);
  }
  CHECK(fs::exists(rep.string() + ".json"));

  const fs::path rep2 = dir / "report2.csv";
  run_cli("simulate --scenario c3 --param 0.86 --margins m1 --ntrain 100 "
          "--reps 2 --alpha 0.5 --seed 11 --output " + rep2.string());
  // identical up to the wall-clock column (timings carry no contract)
  auto strip_seconds = [](const fs::path& p) {
    std::ifstream in(p);
    std::string line, all;
    while (std::getline(in, line)) {
      const auto last = line.rfind(',');
      const auto prev = line.rfind(',', last - 1);
      all += line.substr(0, prev) + line.substr(last) + "\n";
    }
    return all;
  };
  CHECK(strip_seconds(rep) == strip_seconds(rep2));

  r = run_cli("simulate --scenario nope --output " + rep.string());
  CHECK(r.exit_code == 2);
  r = run_cli("simulate --scenario t5 --param r7 --output " + rep.string());
  CHECK(r.exit_code == 2);
}
