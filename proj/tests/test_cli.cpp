#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cqtsim/cli.hpp"

using json = nlohmann::json;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cqt::cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

TEST_CASE("teleporting a basis state from the command line") {
  // seed 1 is a trial whose probe comes out excited
  const RunResult r = run({"teleport", "--zeta", "1", "--xi", "0", "--inject", "minus",
                           "--trials", "1", "--seed", "1"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["command"] == "teleport");
  REQUIRE(j["trials"].size() == 1);
  CHECK(j["trials"][0]["success"] == true);
  CHECK(j["trials"][0]["fidelity"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("bell subcommand reports fidelity and the success probability") {
  const RunResult r = run({"bell", "--kind", "phi+", "--alpha", "2", "--nmax", "64"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["fidelity"].get<double>() >= 1.0 - 1e-9);
  CHECK(j["success_probability"].get<double>() ==
        doctest::Approx(0.4809401184849507).epsilon(1e-9));
  CHECK(j["injection"] == "minus");
  CHECK(j["params"]["nbar"] == 16);
}

TEST_CASE("discriminate matches the prepared kind") {
  const RunResult r = run({"discriminate", "--kind", "psi-", "--trials", "5", "--seed", "3"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["injection"] == "minus");
  for (const auto& t : j["trials"]) {
    CHECK(t["inferred"] == "psi-");
    CHECK(t["match"] == true);
    CHECK(t["outcome1"] == "g");
    CHECK(t["outcome2"] == "g");
  }
}

TEST_CASE("identical argv and seed give byte-identical output") {
  const std::vector<std::string> argv{"teleport", "--zeta", "0.6", "--xi",    "0.8",
                                      "--inject", "plus",   "--trials", "20", "--seed", "42"};
  const RunResult a = run(argv);
  const RunResult b = run(argv);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);

  const std::vector<std::string> sweep_argv{"sweep", "--spec", "gt=0.2,0.4", "--trials", "8",
                                            "--seed", "5"};
  CHECK(run(sweep_argv).out == run(sweep_argv).out);
}

TEST_CASE("csv and json encode the same records") {
  const std::vector<std::string> base{"teleport", "--zeta", "0.6", "--xi", "0.8",
                                      "--trials", "6", "--seed", "11"};
  std::vector<std::string> jargs = base;
  const RunResult jr = run(jargs);
  std::vector<std::string> cargs = base;
  cargs.push_back("--format");
  cargs.push_back("csv");
  const RunResult cr = run(cargs);
  CHECK(jr.code == 0);
  CHECK(cr.code == 0);

  const json j = json::parse(jr.out);
  const auto rows = parse_csv(cr.out);
  REQUIRE(rows.size() == 7);  // header + 6 trials
  CHECK(rows[0] == std::vector<std::string>{"trial", "injection", "outcome1", "outcome2",
                                            "probe_prob", "fidelity"});
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& row = rows[i + 1];
    const auto& trial = j["trials"][i];
    CHECK(std::stoi(row[0]) == static_cast<int>(i));
    CHECK(row[1] == trial["injection"]);
    CHECK(row[2] == trial["outcome1"]);
    CHECK(row[3] == trial["outcome2"]);
    CHECK(std::stod(row[4]) == trial["probe_prob"].get<double>());
    CHECK(std::stod(row[5]) == trial["fidelity"].get<double>());
  }
}

TEST_CASE("sweep emits one row per grid point with the analytic rate peak") {
  const RunResult r = run({"sweep", "--spec", "gt=0.1:0.8:0.05", "--trials", "20", "--seed",
                           "9", "--format", "csv"});
  CHECK(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 16);  // header + 15 points
  CHECK(rows[0][0] == "point");
  double best_value = 0.0;
  double best_prob = -1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double value = std::stod(rows[i][2]);
    const double prob = std::stod(rows[i][4]);
    if (prob > best_prob) {
      best_prob = prob;
      best_value = value;
    }
  }
  // analytic probe probability peaks at the grid point nearest pi/8
  CHECK(best_value == doctest::Approx(0.40).epsilon(1e-12));
}

TEST_CASE("sweeping other variables") {
  const RunResult r =
      run({"sweep", "--spec", "alpha=1,2", "--trials", "4", "--seed", "3", "--format", "csv"});
  CHECK(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][1] == "alpha");
  CHECK(rows[1][2] == "1");
  CHECK(rows[2][2] == "2");
}

TEST_CASE("usage errors exit with 2") {
  SUBCASE("unknown flag") {
    const RunResult r = run({"bell", "--kind", "phi+", "--bogus", "1"});
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(!r.err.empty());
  }
  SUBCASE("unknown subcommand") { CHECK(run({"frobnicate"}).code == 2); }
  SUBCASE("bad kind") { CHECK(run({"bell", "--kind", "tau+"}).code == 2); }
  SUBCASE("bad sweep spec") { CHECK(run({"sweep", "--spec", "zz=1:2:1"}).code == 2); }
  SUBCASE("missing required option") { CHECK(run({"bell"}).code == 2); }
}

TEST_CASE("single-shot probe failure exits with 3") {
  // a tiny pulse area cannot excite the probe, so the one trial fails
  const RunResult r = run({"teleport", "--zeta", "1", "--xi", "0", "--gt", "0.001",
                           "--trials", "1", "--seed", "1"});
  CHECK(r.code == 3);
  const json j = json::parse(r.out);
  CHECK(j["trials"][0]["success"] == false);
  CHECK(j["trials"][0]["probe_prob"].get<double>() < 0.01);
  // several trials: failures are data, not a process failure
  const RunResult many = run({"teleport", "--zeta", "1", "--xi", "0", "--gt", "0.001",
                              "--trials", "3", "--seed", "1"});
  CHECK(many.code == 0);
}

TEST_CASE("run subcommand executes a script file") {
  const std::string path = std::string(CQTSIM_SCRIPTS_DIR) + "/bell_phi_plus.cqp";
  const RunResult r = run({"run", path, "--seed", "4"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["report"]["failed"] == false);
  CHECK(j["report"]["expects"][0]["pass"] == true);

  // parse errors surface as exit 2 with a position
  const std::string bad = "/tmp/cqtsim_bad_script.cqp";
  {
    std::ofstream f(bad);
    f << "rotate A9 R_H\n";
  }
  const RunResult br = run({"run", bad});
  CHECK(br.code == 2);
  CHECK(br.err.find("1:8") != std::string::npos);

  // run has no CSV form
  const RunResult cr = run({"run", path, "--format", "csv"});
  CHECK(cr.code == 2);
}

TEST_CASE("script parameters flow through --param") {
  const std::string path = std::string(CQTSIM_SCRIPTS_DIR) + "/teleport.cqp";
  const RunResult r =
      run({"run", path, "--param", "zeta=0.6", "--param", "xi=0.8", "--seed", "12"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["report"]["expects"][0]["achieved"].get<double>() >= 1.0 - 1e-9);
}

TEST_CASE("CQT_SEED overrides the flag") {
  setenv("CQT_SEED", "42", 1);
  const RunResult env_run = run({"teleport", "--zeta", "0.6", "--xi", "0.8", "--trials", "5",
                                 "--seed", "1"});
  unsetenv("CQT_SEED");
  const RunResult flag_run = run({"teleport", "--zeta", "0.6", "--xi", "0.8", "--trials", "5",
                                  "--seed", "42"});
  CHECK(env_run.out == flag_run.out);
}

TEST_CASE("selftest passes") {
  const RunResult r = run({"selftest"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["passed"] == true);
  for (const auto& c : j["checks"]) CHECK(c["pass"] == true);
}

TEST_CASE("--out writes the payload to a file") {
  const std::string path = "/tmp/cqtsim_out_test.json";
  const RunResult r = run({"bell", "--kind", "psi+", "--out", path});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  const json j = json::parse(ss.str());
  CHECK(j["kind"] == "psi+");
}
