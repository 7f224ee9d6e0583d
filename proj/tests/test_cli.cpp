#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mesoc/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
  json report() const { return json::parse(out); }
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Result r;
  r.code = mesoc::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path(fs::temp_directory_path() / ("mesoc_cli_" + name)) {
    std::ofstream(path) << content;
  }
  ~TempFile() { fs::remove(path); }
};

std::vector<double> as_vector(const json& j) { return j.get<std::vector<double>>(); }

}  // namespace

TEST_CASE("project: Lorentz fixture") {
  const Result r = run({"project", "--p", "1", "--q", "2", "--inline", "1,2,0"});
  REQUIRE(r.code == 0);
  const json j = r.report();
  const auto primal = as_vector(j["primal"]);
  REQUIRE(primal.size() == 3);
  CHECK(primal[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(primal[1] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(primal[2] == 0.0);
  CHECK(j["case"] == "Interior");
  CHECK(j["lambda"].get<double>() == doctest::Approx(1.0 / 3.0));
  CHECK(j["membership"]["primal"] == true);
  CHECK(j["membership"]["dual"] == true);
}

TEST_CASE("project: q = 0 reduces to the monotone nonnegative cone") {
  const Result r = run({"project", "--p", "2", "--q", "0", "--inline", "1,2"});
  REQUIRE(r.code == 0);
  CHECK(as_vector(r.report()["primal"]) == std::vector<double>{1.5, 1.5});
}

TEST_CASE("project: every cone selector") {
  for (const char* cone : {"monotone", "monotone-dual", "monotone-nonneg", "monotone-nonneg-dual"}) {
    CAPTURE(cone);
    const Result r = run({"project", "--p", "3", "--cone", cone, "--inline", "1,-2,3"});
    REQUIRE(r.code == 0);
    const json j = r.report();
    CHECK(j["membership"]["primal"] == true);
    CHECK(j["membership"]["dual"] == true);
    CHECK(j["case"].is_null());
  }
  const Result dual = run({"project", "--p", "2", "--q", "1", "--cone", "mesoc-dual", "--inline", "-1,3,4"});
  REQUIRE(dual.code == 0);
  CHECK(dual.report()["membership"]["primal"] == true);
  CHECK(run({"project", "--p", "2", "--q", "1", "--cone", "monotone", "--inline", "1,2,3"}).code == 3);
}

TEST_CASE("project: error exits") {
  CHECK(run({"project", "--p", "2", "--q", "1", "--inline", "1,2x,3"}).code == 2);
  CHECK(run({"project", "--p", "2", "--q", "1", "--inline", "1,,3"}).code == 2);
  CHECK(run({"project", "--p", "2", "--q", "1", "--inline", "1,nan,3"}).code == 2);
  CHECK(run({"project", "--p", "2", "--q", "2", "--inline", "1,2,3"}).code == 3);
  CHECK(run({"project", "--p", "0", "--q", "3", "--inline", "1,2,3"}).code == 3);
  CHECK(run({"project", "--q", "2", "--inline", "1,2,3"}).code == 2);
  CHECK(run({"project", "--p", "1", "--q", "2"}).code == 2);
  CHECK(run({"project", "--p", "1", "--q", "2", "--file", "/nonexistent/mesoc"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
}

TEST_CASE("project -> check round trip") {
  const Result proj = run({"project", "--p", "3", "--q", "2", "--inline", "0.3,-1.2,2.5,0.7,-0.4"});
  REQUIRE(proj.code == 0);
  const TempFile cert("cert.json", proj.out);
  const Result chk = run({"check", "--file", cert.path.string()});
  REQUIRE(chk.code == 0);
  const json j = chk.report();
  CHECK(j["primal_member"] == true);
  CHECK(j["dual_member"] == true);
  CHECK(j["reconstructs_input"] == true);
  CHECK(j["orthogonal"] == true);
  CHECK(j["ok"] == true);

  // A tampered certificate fails with a property violation.
  json bad = proj.report();
  bad["primal"][0] = bad["primal"][0].get<double>() + 1.0;
  const TempFile tampered("tampered.json", bad.dump());
  CHECK(run({"check", "--file", tampered.path.string()}).code == 1);
}

TEST_CASE("check: plain membership") {
  const Result in = run({"check", "--p", "2", "--q", "1", "--inline", "3,2,1"});
  CHECK(in.code == 0);
  CHECK(in.report()["member"] == true);
  const Result out = run({"check", "--p", "2", "--q", "1", "--inline", "1,2,0"});
  CHECK(out.code == 1);
  CHECK(out.report()["member"] == false);
  CHECK(run({"check", "--p", "3", "--cone", "monotone", "--inline", "1,1,1"}).code == 0);
  CHECK(run({"check", "--p", "3", "--cone", "monotone-nonneg", "--inline", "1,2,0"}).code == 1);
  const TempFile vec("vec.txt", "3\n2\n1\n");
  CHECK(run({"check", "--p", "2", "--q", "1", "--file", vec.path.string()}).code == 0);
}

TEST_CASE("oracle-compare: contract") {
  const Result empty = run({"oracle-compare", "--seed", "1", "--p", "3", "--q", "3", "--count", "0"});
  CHECK(empty.code == 0);
  CHECK(empty.report()["instances"].empty());

  const std::vector<std::string> args{"oracle-compare", "--seed", "42", "--p", "3",
                                      "--q", "2", "--count", "5"};
  const Result a = run(args);
  const Result b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);

  const Result acc = run({"oracle-compare", "--seed", "7", "--p", "4", "--q", "4", "--count", "50",
                          "--tol", "1e-5"});
  CHECK(acc.code == 0);
  const json j = acc.report();
  CHECK(j["instances"].size() == 50);
  CHECK(j["max_deviation"].get<double>() <= 1e-5);
  CHECK(j["all_within_tol"] == true);

  CHECK(run({"oracle-compare", "--p", "9", "--q", "2"}).code == 3);
  CHECK(run({"oracle-compare", "--p", "3", "--q", "3", "--count", "2", "--max-iter", "1"}).code == 4);
}

TEST_CASE("bench: contract") {
  CHECK(run({"bench", "--p", "10", "--q", "10", "--reps", "0"}).code == 2);
  CHECK(run({"bench", "--p", "0", "--q", "10", "--reps", "1"}).code == 3);
  const Result r = run({"bench", "--p", "10", "--q", "10", "--reps", "3", "--seed", "1"});
  REQUIRE(r.code == 0);
  const json j = r.report();
  REQUIRE(j["results"].size() == 2);
  for (const json& row : j["results"]) {
    CHECK(row["timings_s"].size() == 3);
    CHECK(row["median_s"].get<double>() >= 0.0);
  }
}

TEST_CASE("bench: doubling p stays within a near-linear band") {
  const Result r = run({"bench", "--p", "200000,400000", "--q", "1000", "--reps", "7", "--seed", "2"});
  REQUIRE(r.code == 0);
  const json j = r.report();
  for (const char* kind : {"random", "increasing"}) {
    double small = 0.0;
    double large = 0.0;
    for (const json& row : j["results"]) {
      if (row["input"] != kind) continue;
      (row["p"] == 200000 ? small : large) = row["median_s"].get<double>();
    }
    CAPTURE(kind);
    REQUIRE(small > 0.0);
    CHECK(large / small <= 4.0);
  }
}

TEST_CASE("solve-portfolio: end to end") {
  const TempFile csv("scen.csv",
                     "A,B,C,prob\n"
                     "0.04,0.01,-0.02,0.3\n"
                     "-0.03,0.02,0.05,0.2\n"
                     "0.01,-0.01,0.02,0.5\n");
  const Result r = run({"solve-portfolio", "--file", csv.path.string(), "--c0", "3",
                        "--probabilities-column", "prob", "--seed", "5"});
  REQUIRE(r.code == 0);
  const json j = r.report();
  CHECK(j["T"] == 3);
  CHECK(j["n"] == 3);
  CHECK(j["converged"] == true);
  CHECK(j["jstar"].get<int>() >= 1);
  const auto w = as_vector(j["w"]);
  CHECK(w[0] + w[1] + w[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["residuals"]["budget"].get<double>() <= 1e-7);
  CHECK(j["residuals"]["cone"].get<double>() <= 1e-7);
  CHECK(j["dominance"]["dominates"] == true);
  CHECK(j["dominance"]["samples"] == 1000);

  const Result again = run({"solve-portfolio", "--file", csv.path.string(), "--c0", "3",
                            "--probabilities-column", "prob", "--seed", "5"});
  CHECK(again.out == r.out);

  CHECK(run({"solve-portfolio", "--file", csv.path.string(), "--c0", "-1"}).code == 2);
  const TempFile ragged("ragged.csv", "0.1,0.2\n0.3\n");
  CHECK(run({"solve-portfolio", "--file", ragged.path.string(), "--c0", "1"}).code == 2);
}
