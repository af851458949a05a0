#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracbirth/cli.hpp"

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "fracbirth");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = fracbirth::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) v.push_back(l);
  return v;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> v;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) v.push_back(f);
  return v;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("fracbirth_test_" + name);
}

}  // namespace

TEST_CASE("pmf command") {
  auto r = run({"pmf", "--schedule", "linear", "--lambda", "1", "--nu", "1", "--t", "0.6931", "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  CHECK(rows.front() == "row,k,value");
  bool found = false;
  for (const auto& row : rows) {
    const auto f = fields(row);
    if (f[0] == "pmf" && f[1] == "2") {
      CHECK(std::stod(f[2]) == doctest::Approx(0.25).epsilon(1e-4));
      found = true;
    }
  }
  CHECK(found);
  CHECK(fields(rows.back())[0] == "tail");

  r = run({"pmf", "--nu", "0.5", "--t", "1"});
  REQUIRE(r.code == 0);
  double sum = 0.0;
  for (const auto& row : lines(r.out)) {
    const auto f = fields(row);
    if (f[0] == "pmf") sum += std::stod(f[2]);
  }
  CHECK(sum >= 1.0 - 1e-6);
}

TEST_CASE("JSON table round trip") {
  const auto r = run({"pmf", "--nu", "0.7", "--t", "1", "--format", "json"});
  REQUIRE(r.code == 0);
  double sum = 0.0, tail = -1.0;
  for (const auto& l : lines(r.out)) {
    const auto j = nlohmann::json::parse(l);
    if (j.contains("p")) sum += j["p"].get<double>();
    if (j.contains("tail_mass")) tail = j["tail_mass"].get<double>();
  }
  CHECK(std::abs((1.0 - sum) - tail) < 1e-12);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"simulate", "--nu", "0.5"}).code == 2);
  CHECK(run({"pmf", "--nu", "1.5"}).code == 2);
  CHECK(run({"pmf", "--format", "xml"}).code == 2);
  CHECK(run({"pmf", "--nu", "0.3", "--t", "2", "--k-max-hard", "100"}).code == 3);
  CHECK(run({"simulate", "--lambda", "1e7", "--nu", "1", "--t", "10", "--runs", "1", "--seed", "1"}).code == 3);
  CHECK(run({"mean-curve", "--t-grid", "1,0.5"}).code == 2);
}

TEST_CASE("simulate is deterministic") {
  const std::vector<std::string> args{"simulate", "--nu", "0.5", "--t", "1", "--runs", "20000", "--seed", "7"};
  const auto a = run(args);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const auto b = run(threaded);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["runs"] == 20000);
  CHECK(j["p_value"].get<double>() > 1e-3);
  CHECK(std::abs(j["mean_hat"].get<double>() - j["analytic_mean"].get<double>()) < 4.0 * j["mean_se"].get<double>());
}

TEST_CASE("config file and overrides") {
  const auto path = temp_path("config.json");
  {
    std::ofstream f(path);
    f << R"({"schedule": {"kind": "linear", "lambda": 1}, "nu": 1, "t": 0.6931, "format": "json"})";
  }
  auto r = run({"moments", "--config", path.string()});
  REQUIRE(r.code == 0);
  double mean = 0.0;
  for (const auto& l : lines(r.out)) {
    const auto j = nlohmann::json::parse(l);
    if (j["quantity"] == "mean") mean = j["value"].get<double>();
  }
  CHECK(mean == doctest::Approx(std::exp(0.6931)));
  r = run({"moments", "--config", path.string(), "--format", "csv", "--t", "0"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).front() == "quantity,value");
  CHECK(fields(lines(r.out)[1])[1] == "1");
  CHECK(run({"pmf", "--config", (path.string() + ".missing")}).code == 2);
  std::filesystem::remove(path);
}

TEST_CASE("output file") {
  const auto path = temp_path("out.csv");
  const auto r = run({"mean-curve", "--output", path.string(), "--t-grid", "0,1", "--nus", "0.5,1"});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  std::stringstream buf;
  buf << f.rdbuf();
  const auto rows = lines(buf.str());
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == "nu,t,mean");
  CHECK(std::stod(fields(rows[1])[2]) == 1.0);
  CHECK(std::stod(fields(rows[2])[2]) == doctest::Approx(5.00898).epsilon(1e-5));
  CHECK(std::stod(fields(rows[4])[2]) == doctest::Approx(2.71828).epsilon(1e-5));
  std::filesystem::remove(path);
}

TEST_CASE("default mean curve ordering") {
  const auto r = run({"mean-curve"});
  REQUIRE(r.code == 0);
  std::map<double, std::map<double, double>> by_t;
  for (const auto& row : lines(r.out)) {
    const auto f = fields(row);
    if (f[0] == "nu") continue;
    by_t[std::stod(f[1])][std::stod(f[0])] = std::stod(f[2]);
  }
  for (const auto& [t, curve] : by_t) {
    if (t == 0.0) continue;
    double prev = 1e300;
    for (const auto& [nu, mean] : curve) {
      CHECK(mean < prev);
      prev = mean;
    }
  }
}

TEST_CASE("randtime command") {
  auto r = run({"randtime", "--nu", "0.5", "--t", "1", "--s-grid", "0,1"});
  REQUIRE(r.code == 0);
  auto rows = lines(r.out);
  CHECK(rows[0] == "s,density,representation");
  CHECK(std::stod(fields(rows[1])[1]) == doctest::Approx(0.564190).epsilon(1e-6));
  CHECK(fields(rows[1])[2] == "folded-gaussian");

  r = run({"randtime", "--nu", "1", "--mode", "density"});
  CHECK(r.code == 2);
  CHECK(r.err.find("degenerate point mass") != std::string::npos);

  r = run({"randtime", "--nu", "0.25", "--s-grid", "0.5"});
  REQUIRE(r.code == 0);
  CHECK(fields(lines(r.out)[1])[2] == "iterated-bm n=2");

  CHECK(run({"randtime", "--mode", "sample", "--nu", "0.5"}).code == 2);
  r = run({"randtime", "--mode", "sample", "--nu", "0.5", "--runs", "5", "--seed", "3"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).size() == 6);
  CHECK(run({"randtime", "--mode", "sample", "--nu", "0.5", "--runs", "5", "--seed", "3"}).out == r.out);
}

TEST_CASE("verify command") {
  const auto r = run({"verify", "--nus", "0.5"});
  CHECK(r.code == 0);
  const auto rows = lines(r.out);
  CHECK(rows[0] == "identity,lhs,rhs,abs_err,tol,passed");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].ends_with(",true"));
}
