#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "necklace/commands.hpp"
#include "necklace/config.hpp"
#include "necklace/error.hpp"
#include "support.hpp"

using namespace testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("necklace_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

Run run(const std::string& args) {
  const auto err = scratch() / "stderr.txt";
  const std::string cmd = std::string(NECKLACE_CLI) + " " + args + " 2>" + err.string();
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

const char* kEqualArm = R"({
  "necklace": {"l1": 0.8, "l2": 0.8, "l3": 0.45,
               "A": [[0, 0, 0.6], [0, 0, 0.8], [0.6, 0.8, 0]]},
  "scan": {"sigma_min": 0.1, "sigma_max": 10.0, "grid": 500},
  "truncation": {"n_cells": 6},
  "period_length": 1.25
})";

const char* kCell = R"({
  "necklace": {"l1": 1.2, "l2": 1.0, "l3": 0.5, "A": [1, 0.5, 1, 0.5, 2, 2, 1, 2, 0.3]},
  "scan": {"sigma_min": 0.2, "sigma_max": 8.0, "grid": 400},
  "truncation": {"n_cells": 4},
  "jobs": 2
})";

const char* kDesign = R"({
  "necklace": {"A": [[1, 0.5, 1], [0.5, 2, 2], [1, 2, 0.3]]},
  "design": {"sigma0": 5.0, "eps": 0.05},
  "truncation": {"n_cells": 10}
})";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kCell);
  CHECK(*cfg.l1 == 1.2);
  CHECK((*cfg.vc)(1, 2) == 2.0);
  CHECK(cfg.scan->grid == 400);
  CHECK(cfg.jobs == 2);

  try {
    parse_config("{\n  \"necklace\": {\n    \"l1\": 1.0,,\n  }\n}");
    FAIL("syntax error accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    parse_config(R"({"necklace": {"l1": 1, "l2": 1, "l3": 1, "A": [1,2,3,4,5,6,7,8,9]}})");
    FAIL("asymmetric A accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AsymmetricCondition);
  }
  try {
    parse_config(R"({"scan": {"sigma_min": 1, "sigma_max": 2, "grid": 10, "extra": 1}})");
    FAIL("unknown field accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("scan.extra") != std::string::npos);
  }
  try {
    parse_config(R"({"scan": {"sigma_min": "a", "sigma_max": 2, "grid": 10}})");
    FAIL("bad type accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("scan.sigma_min") != std::string::npos);
  }

  const auto back = parse_necklace(necklace_to_json(cfg.necklace()));
  CHECK(back.l3 == 0.5);
  CHECK((back.vc.matrix() - cfg.vc->matrix()).norm() == 0.0);
}

TEST_CASE("command requirements") {
  auto cfg = parse_config(kDesign);
  CHECK_THROWS_AS(check_command_config("bands", cfg), Error);
  CHECK_NOTHROW(check_command_config("design", cfg));
  cfg = parse_config(kCell);
  CHECK_THROWS_AS(check_command_config("design", cfg), Error);
  cfg.scan->grid = 1;
  CHECK_THROWS_AS(check_command_config("bands", cfg), Error);
  cfg.scan->grid = 10;
  cfg.scan->sigma_max = 0.1;
  CHECK_THROWS_AS(check_command_config("bands", cfg), Error);
}

TEST_CASE("bands of the equal-arm family follow the closed form") {
  const auto cfg = write_config("equal.json", kEqualArm);
  const auto r = run("bands -c " + cfg.string());
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 501);
  CHECK(rows[0] == std::vector<std::string>{"sigma", "F", "is_pole", "band_id"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double s = std::stod(rows[i][0]);
    CHECK(rows[i][2] == "0");
    CHECK(rows[i][3] == "0");
    CHECK(std::abs(std::stod(rows[i][1]) + 2 * std::cos(s * 1.25)) < 1e-10);
  }
}

TEST_CASE("decoupled loop gives pole rows only") {
  const auto cfg = write_config("decoupled.json", R"({
    "necklace": {"l1": 1.2, "l2": 1.0, "l3": 0.5, "A": [[1, 0, 0], [0, 2, 0], [0, 0, 1]]},
    "scan": {"sigma_min": 0.2, "sigma_max": 8.0, "grid": 50}})");
  const auto r = run("bands -c " + cfg.string());
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 51);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][1].empty());
    CHECK(rows[i][2] == "1");
  }
}

TEST_CASE("bands rows mark poles with a blank F") {
  const auto cfg = write_config("cell.json", kCell);
  const auto r = run("bands -c " + cfg.string());
  REQUIRE(r.code == 0);
  int poles = 0;
  for (const auto& row : parse_csv(r.out)) {
    if (row[2] != "1") continue;
    ++poles;
    CHECK(row[1].empty());
    CHECK(row[3] == "-1");
  }
  CHECK(poles >= 3);
  const auto j = run("bands -c " + cfg.string() + " --format json");
  REQUIRE(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["poles"].size() == static_cast<std::size_t>(poles));
  CHECK(doc.contains("config"));
}

TEST_CASE("dispersion of the equal-arm family") {
  const auto cfg = write_config("equal.json", kEqualArm);
  const auto r = run("dispersion -c " + cfg.string());
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  CHECK(rows[0] == std::vector<std::string>{"sigma", "k", "vg", "band_id"});
  REQUIRE(rows.size() > 400);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::abs(std::abs(std::stod(rows[i][2])) - 1.0) < 1e-6);
    if (i > 1 && rows[i][3] == rows[i - 1][3])
      CHECK(std::abs(std::stod(rows[i][1]) - std::stod(rows[i - 1][1])) < pi / 2);
  }
}

TEST_CASE("dispersion rows stay clear of band edges") {
  const auto cfg = write_config("cell.json", kCell);
  const auto r = run("dispersion -c " + cfg.string());
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() > 10);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double s = std::stod(rows[i][0]);
    const auto f = hill_discriminant(parse_config(kCell).necklace(), s);
    REQUIRE(f.has_value());
    CHECK(std::abs(*f) < 2.0);
    CHECK(std::abs(std::cos(std::stod(rows[i][1])) - *f / 2) < 1e-10);
  }
}

TEST_CASE("reflection sweep") {
  const auto eq = write_config("equal.json", kEqualArm);
  auto r = run("reflect -c " + eq.string());
  REQUIRE(r.code == 0);
  auto rows = parse_csv(r.out);
  CHECK(rows[0] == std::vector<std::string>{"sigma", "formula_r", "oracle_r", "oracle_t", "unitarity_defect", "flag"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!rows[i][1].empty()) CHECK(std::stod(rows[i][1]) < 1e-8);
    CHECK(std::stod(rows[i][2]) < 1e-8);
    CHECK(std::stod(rows[i][4]) < 1e-10);
  }

  const auto cell = write_config("cell.json", kCell);
  r = run("reflect -c " + cell.string());
  const auto r2 = run("reflect -c " + cell.string() + " --cells 8");
  REQUIRE(r.code == 0);
  REQUIRE(r2.code == 0);
  rows = parse_csv(r.out);
  const auto rows2 = parse_csv(r2.out);
  REQUIRE(rows.size() == rows2.size());
  int gap_rows = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!rows[i][4].empty()) CHECK(std::stod(rows[i][4]) < 1e-10);
    if (rows[i][5] != "gap" || rows[i][2].empty() || rows2[i][2].empty()) continue;
    const double a = std::stod(rows[i][2]), b = std::stod(rows2[i][2]);
    if (a > 1 - 1e-12) continue;
    ++gap_rows;
    CHECK(b > a);
  }
  CHECK(gap_rows > 20);
}

TEST_CASE("design report, verification and determinism") {
  const auto cfg = write_config("design.json", kDesign);
  const auto ver = scratch() / "verify.csv";
  const auto a = run("design -c " + cfg.string() + " --verify-csv " + ver.string());
  REQUIRE(a.code == 0);
  const auto doc = nlohmann::json::parse(a.out);
  CHECK(std::abs(doc["diagnostics"]["F_sigma0"].get<double>()) < 1e-8);
  CHECK(doc["config"] == nlohmann::json::parse(kDesign));
  const auto vrows = parse_csv(slurp(ver));
  CHECK(vrows[0] == std::vector<std::string>{"name", "stored", "recomputed", "abs_diff", "compared"});
  CHECK(vrows.size() > 5);

  const auto b = run("design -c " + cfg.string() + " --jobs 3");
  CHECK(a.out == b.out);

  const auto sweep = write_config("sweep.json", R"({
    "necklace": {"A": [[1, 0.5, 1], [0.5, 2, 2], [1, 2, 0.3]]},
    "design": {"sigma0": 5.0, "eps_sweep": [0.1, 0.05, 0.025]}, "jobs": 3})");
  const auto s = run("design -c " + sweep.string() + " --format csv");
  REQUIRE(s.code == 0);
  const auto rows = parse_csv(s.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[4][0] == "slope");
  CHECK(std::stod(rows[4][5]) == doctest::Approx(2.0).epsilon(0.15));
  CHECK(std::stod(rows[4][6]) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("byte-identical reruns across job counts") {
  const auto cfg = write_config("cell.json", kCell);
  for (const char* cmd : {"bands", "dispersion", "reflect"}) {
    const auto a = run(std::string(cmd) + " -c " + cfg.string() + " --jobs 1");
    const auto b = run(std::string(cmd) + " -c " + cfg.string() + " --jobs 4");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
}

TEST_CASE("output path") {
  const auto cfg = write_config("cell.json", kCell);
  const auto out = scratch() / "bands.csv";
  const auto r = run("bands -c " + cfg.string() + " -o " + out.string());
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(slurp(out).rfind("sigma,F,is_pole,band_id\n", 0) == 0);
}

TEST_CASE("exit codes") {
  const auto bad = write_config("degenerate.json", R"({
    "necklace": {"A": [[1, 0.5, 1], [0.5, 2, 0], [1, 0, 0.3]]},
    "design": {"sigma0": 5.0, "eps": 0.05}})");
  auto r = run("design -c " + bad.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("Degenerate") != std::string::npos);
  CHECK(r.out.empty());

  const auto broken = write_config("broken.json", "{\"scan\": [1, 2,\n");
  r = run("bands -c " + broken.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("line") != std::string::npos);

  r = run("bands -c " + (scratch() / "missing.json").string());
  CHECK(r.code == 2);
  r = run("bands --no-such-flag");
  CHECK(r.code == 2);
  r = run("");
  CHECK(r.code == 2);

  const auto design_only = write_config("design.json", kDesign);
  r = run("reflect -c " + design_only.string());
  CHECK(r.code == 2);

  // sigma0 inside a gap of the worked condition's oracle system is fine; a
  // numerical failure is a root that cannot be bracketed
  const auto noroot = write_config("noroot.json", R"({
    "necklace": {"A": [[0, 0, 1e-9], [0, 0, 1], [1e-9, 1, 0]]},
    "design": {"sigma0": 5.0, "eps": 0.05}})");
  r = run("design -c " + noroot.string());
  CHECK(r.code == 1);
}
