#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "thermoform/cli/commands.hpp"
#include "thermoform/cli/config.hpp"
#include "thermoform/cli/verify.hpp"
#include "thermoform/parallel.hpp"

using namespace thermoform;
using namespace thermoform::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() / ("thermoform_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "thermoform");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path write_config(const fs::path& dir, const Json& j) {
  const auto p = dir / "input.json";
  std::ofstream(p) << j.dump();
  return p;
}

Json binary_config() {
  return Json::parse(R"({
    "system": {"alphabet_size": 2},
    "potentials": [
      {"name": "phi", "type": "window", "symbol_values": [0.0, 0.6931471805599453]},
      {"name": "c", "type": "window", "constant": 0.5}
    ]
  })");
}

}  // namespace

TEST_CASE("config normalization is idempotent") {
  for (const auto& name : example_names()) {
    const auto cfg = load_example(name);
    CHECK(normalize_config(cfg.normalized) == cfg.normalized);
    CHECK(config_hash(normalize_config(cfg.normalized)) == config_hash(cfg.normalized));
  }
  CHECK(example_names().size() >= 6);
}

TEST_CASE("config errors name the offending key") {
  auto j = binary_config();
  j["pressure"] = {{"potential", "phi"}, {"q_grid", Json::array()}};
  try {
    build_config(j);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key().find("q_grid") != std::string::npos);
  }
  auto k = binary_config();
  k["pressure"] = {{"potential", "nope"}};
  CHECK_THROWS_AS(build_config(k), ConfigError);
  auto m = binary_config();
  m["potentials"][0]["constant"] = 1.0;
  CHECK_THROWS_AS(build_config(m), ConfigError);
}

TEST_CASE("exit codes") {
  TempDir dir("exit");
  auto j = binary_config();
  j["pressure"] = {{"potential", "phi"}, {"q_grid", Json::array()}};
  CHECK(run({"pressure", "--config", write_config(dir.path, j).string(), "--out", dir.path.string()}) == 2);
  CHECK(run({"pressure"}) == 2);
  CHECK(run({"frobnicate", "--example", "ex1_1"}) == 2);
  CHECK(run({"membership", "--example", "ex1_1", "--out", dir.path.string()}) == 2);
  CHECK(run({"pressure", "--example", "no_such_example", "--out", dir.path.string()}) == 2);
}

TEST_CASE("pressure command on the diagonal example") {
  TempDir dir("ex11");
  REQUIRE(run({"pressure", "--example", "ex1_1", "--out", dir.path.string()}) == 0);
  const auto rows = read_rows(dir.path / "pressure.csv");
  REQUIRE(rows.size() == 31);
  CHECK(rows[0] == std::vector<std::string>{"q", "value", "upper", "lower"});
  bool seen = false;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (std::abs(std::stod(rows[i][0]) - 2.0) < 1e-12) {
      CHECK(std::abs(std::stod(rows[i][1]) - 2 * std::log(4.0)) <= 0.05);
      seen = true;
    }
  CHECK(seen);
  CHECK(fs::exists(dir.path / "config.json"));
  const auto summary = Json::parse(slurp(dir.path / "pressure.json"));
  CHECK(summary["meta"]["tool"] == "thermoform");
  CHECK(summary["meta"]["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("constant potential gives a straight pressure line") {
  TempDir dir("const");
  auto j = binary_config();
  j["pressure"] = {{"potential", "c"}, {"n", 6}, {"q_grid", {-1.0, 0.0, 1.0, 2.0}}};
  const auto out = cmd_pressure(build_config(j), {dir.path});
  const auto rows = read_rows(dir.path / "pressure.csv");
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double q = std::stod(rows[i][0]);
    CHECK(std::stod(rows[i][1]) == doctest::Approx(std::log(2.0) + 0.5 * q).epsilon(1e-12));
  }
  CHECK(out["domain"] == "all_q");
}

TEST_CASE("spectrum outside the domain is minus infinity with success") {
  TempDir dir("outside");
  auto j = binary_config();
  j["spectrum"] = {{"potential", "phi"}, {"n", 6}, {"alpha_grid", {1.5, 2.0}}};
  REQUIRE(run({"spectrum", "--config", write_config(dir.path, j).string(), "--out", dir.path.string()}) == 0);
  const auto rows = read_rows(dir.path / "spectrum.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"alpha", "value", "flag"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][1] == "-inf");
    CHECK(rows[i][2] == "minus_infinity");
  }
}

TEST_CASE("subdifferential commands") {
  TempDir dir("subdiff");
  const auto poly = cmd_subdiff(load_example("ex6_3"), {dir.path / "a"});
  CHECK(poly["kind"] == "polygon");
  for (const auto& v : poly["vertices"]) {
    // Every vertex lies on the segment from (1,0) to (2,-1).
    const double x = v[0].get<double>(), y = v[1].get<double>();
    CHECK(std::abs(x + y - 1) <= 1e-6);
    CHECK(x >= 1 - 1e-6);
    CHECK(x <= 2 + 1e-6);
  }
  const auto iv = cmd_subdiff(load_example("ex6_2"), {dir.path / "b"});
  CHECK(iv["left"].get<double>() == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(iv["right"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

  auto j = binary_config();
  j["subdiff"] = {{"potentials", {"phi"}}, {"q", {0.0}}, {"n", 6}, {"h", 1e-3}, {"half_width", 0.01}};
  const auto smooth = cmd_subdiff(build_config(j), {dir.path / "c"});
  // P(q) = log(1 + 2^q) has derivative log(2)/2 at 0.
  CHECK(smooth["left"].get<double>() == doctest::Approx(std::log(2.0) / 2).epsilon(1e-3));
  CHECK(smooth["right"].get<double>() - smooth["left"].get<double>() <= 1e-3);
}

TEST_CASE("membership command") {
  TempDir dir("member");
  const auto out = cmd_membership(load_example("additive_binary"), {dir.path});
  CHECK(out["verdict"] == "inside");
}

TEST_CASE("pressure output is byte-identical across runs and thread counts") {
  TempDir dir("det");
  const auto cfg = load_example("positive_pair");
  set_thread_count(1);
  cmd_pressure(cfg, {dir.path / "one"});
  set_thread_count(4);
  cmd_pressure(cfg, {dir.path / "four"});
  set_thread_count(0);
  CHECK(slurp(dir.path / "one" / "pressure.csv") == slurp(dir.path / "four" / "pressure.csv"));
  CHECK(slurp(dir.path / "one" / "config.json") == slurp(dir.path / "four" / "config.json"));
}

TEST_CASE("verify report") {
  CHECK(acceptance_checks().size() == 13);
  const std::vector<int> fast{1, 5, 6, 7, 10, 11};
  const auto report = run_verify({}, fast);
  REQUIRE(report.checks.size() == fast.size());
  for (const auto& c : report.checks) CHECK_MESSAGE(c.passed, format_check(c));
  CHECK(report.to_json()["checks"].size() == fast.size());

  VerifyTolerances tampered;
  tampered.apply(Json{{"membership", -1.0}});
  CHECK(tampered.membership == -1.0);
  const std::vector<int> only{11};
  const auto bad = run_verify(tampered, only);
  REQUIRE(bad.checks.size() == 1);
  CHECK_FALSE(bad.checks[0].passed);
  CHECK(bad.checks[0].name == "membership classification");
  CHECK(format_check(bad.checks[0]).rfind("FAIL [11]", 0) == 0);
  CHECK_THROWS_AS(tampered.apply(Json{{"no_such_tolerance", 1.0}}), ConfigError);
}

TEST_CASE("verify through the command line writes a report") {
  TempDir dir("verify");
  const auto tol = dir.path / "tol.json";
  std::ofstream(tol) << R"({"membership": -1})";
  const int code = run({"verify", "--config", tol.string(), "--out", dir.path.string()});
  CHECK(code == 1);
  const auto j = Json::parse(slurp(dir.path / "verify.json"));
  CHECK(j["checks"].size() >= 10);
  bool found = false;
  for (const auto& c : j["checks"])
    if (c["name"] == "membership classification") {
      CHECK(c["passed"] == false);
      found = true;
    }
  CHECK(found);
}
