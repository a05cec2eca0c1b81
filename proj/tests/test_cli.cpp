#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("qratio_test_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

Result cli(const std::string& args) {
  const auto err_file = std::filesystem::temp_directory_path() / "qratio_test_cli_stderr";
  const std::string cmd = std::string(QRATIO_CLI_PATH) + " " + args + " 2>" + err_file.string();
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(err_file);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

double binomial_weight(int two_j, int k, double theta) {
  const double c = std::lgamma(two_j + 1.0) - std::lgamma(k + 1.0) - std::lgamma(two_j - k + 1.0);
  return std::exp(c) * std::pow(std::cos(theta / 2), 2 * k) * std::pow(std::sin(theta / 2), 2 * (two_j - k));
}

}  // namespace

TEST_CASE("ratio --preset Ag prints Q and class") {
  const auto r = cli("ratio --preset Ag");
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["Q"].get<double>() == doctest::Approx(0.2e-3 / 1.44e-10).epsilon(1e-12));
  CHECK(j["Q"].get<double>() == doctest::Approx(1.39e6).epsilon(1e-3));
  CHECK(j["class"] == "Quantum");
}

TEST_CASE("diffuse --preset table1 prints four rows") {
  const auto r = cli("diffuse --preset table1");
  REQUIRE(r.status == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"name", "mass_kg", "width_m", "doubling_time_s"});
  CHECK(rows[1][0] == "electron");
  CHECK(rows[4][0] == "1 g");
}

TEST_CASE("spin-dist matches the binomial") {
  const auto r = cli("spin-dist --j 13/2 --theta pi/4");
  REQUIRE(r.status == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 15);
  CHECK(rows[0] == std::vector<std::string>{"k", "m", "weight"});
  const double theta = std::acos(-1.0) / 4;
  for (int k = 0; k <= 13; ++k) {
    CHECK(std::stoi(rows[k + 1][0]) == k);
    CHECK(std::stod(rows[k + 1][1]) == -6.5 + k);
    CHECK(std::abs(std::stod(rows[k + 1][2]) - binomial_weight(13, k, theta)) < 1e-12);
  }
  const auto deg = cli("spin-dist --j 13/2 --theta '45 deg' --format json");
  REQUIRE(deg.status == 0);
  CHECK(nlohmann::json::parse(deg.out).size() == 14);
}

TEST_CASE("tunnel energy sweep") {
  const auto r = cli("tunnel --barrier 'rectangular:2 eV:0.5 nm' --energy-sweep '0.5 eV:1.5 eV:3'");
  REQUIRE(r.status == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"E", "T_wkb", "T_exact"});
  // E = 1 eV: the benchmark values quoted to two figures
  CHECK(std::stod(rows[2][1]) == doctest::Approx(6.0e-3).epsilon(0.01));
  CHECK(std::stod(rows[2][2]) == doctest::Approx(2.4e-2).epsilon(0.02));
}

TEST_CASE("errors are machine readable") {
  const auto dir = scratch("errors");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "bad.qcfg") << "kind = diffuse\nwidth = 3\n[body e]\nmass = 1 g\n";
  auto r = cli("run --config " + (dir / "bad.qcfg").string());
  CHECK(r.status != 0);
  auto j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "config");
  CHECK(j["message"].get<std::string>().find("line 2") != std::string::npos);

  std::ofstream(dir / "empty.qcfg") << "";
  r = cli("run --config " + (dir / "empty.qcfg").string());
  CHECK(r.status != 0);
  CHECK(nlohmann::json::parse(r.err)["message"].get<std::string>().find("scenario kind required") !=
        std::string::npos);

  r = cli("ratio --preset nosuch");
  CHECK(r.status != 0);
  CHECK(nlohmann::json::parse(r.err)["error"] == "lookup");

  r = cli("spin-dist --preset table1");
  CHECK(r.status != 0);

  // module errors keep their kind and gain the scenario
  r = cli("run --preset sg --set points_z=100");
  CHECK(r.status != 0);
  j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "resolution");
  CHECK(j["scenario"] == "sg/decoupled");

  r = cli("run --preset sg --set steps=4");
  CHECK(r.status != 0);
  j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "step_size");
  CHECK(j["suggested_dt"].get<double>() > 0.0);

  r = cli("ratio --bogus");
  CHECK(r.status == 2);
  CHECK(nlohmann::json::parse(r.err)["error"] == "usage");
  std::filesystem::remove_all(dir);
}

TEST_CASE("output directory, manifest and verify") {
  const auto dir = scratch("out");
  auto r = cli("talbot --preset fig4 --out " + dir.string());
  REQUIRE(r.status == 0);
  const auto manifest = nlohmann::json::parse(std::ifstream(dir / "manifest.json"));
  CHECK(manifest["kind"] == "talbot");
  CHECK(manifest["mode"] == "lau");
  CHECK(manifest["files"].size() == 3);
  CHECK(manifest["config_hash"].get<std::string>().size() == 64);
  r = cli("verify " + dir.string());
  CHECK(r.status == 0);
  std::ofstream(dir / "lau.csv", std::ios::app) << "x";
  r = cli("verify " + dir.string());
  CHECK(r.status == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("preset path variable and batch mode") {
  const auto dir = scratch("batch");
  std::filesystem::create_directories(dir / "presets");
  std::ofstream(dir / "presets" / "tiny.qcfg") << "kind = spin-dist\nj = 1\ntheta = pi/2 rad\n";
  std::ofstream(dir / "c.qcfg") << "kind = ratio\nexperiments = C70\n";
  const std::string env = "QRATIO_PRESET_PATH=" + (dir / "presets").string() + " ";
  auto r = cli("presets");
  CHECK(r.out.find("fig2\n") != std::string::npos);
  CHECK(r.out.find("tiny") == std::string::npos);
  const auto cmd = std::string("env ") + env + QRATIO_CLI_PATH + " batch tiny " + (dir / "c.qcfg").string() +
                   " table2 --threads 2 --out " + (dir / "runs").string() + " > " + (dir / "log").string();
  REQUIRE(std::system(cmd.c_str()) == 0);
  const auto log = nlohmann::json::parse(std::ifstream(dir / "log"));
  REQUIRE(log.size() == 3);
  for (const auto& e : log) {
    CHECK(e["status"] == "ok");
    CHECK(std::filesystem::exists(std::filesystem::path(e["dir"].get<std::string>()) / "manifest.json"));
  }
  CHECK(std::filesystem::exists(dir / "runs" / "000-spin-dist-exact" / "distribution.csv"));
  CHECK(std::filesystem::exists(dir / "runs" / "001-ratio-table" / "ratio.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("print-config round trips through the parser") {
  const auto a = cli("tunnel --preset fig8 --print-config");
  REQUIRE(a.status == 0);
  const auto dir = scratch("print");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "c.qcfg") << a.out;
  const auto b = cli("run --config " + (dir / "c.qcfg").string() + " --print-config");
  REQUIRE(b.status == 0);
  CHECK(a.out == b.out);
  std::filesystem::remove_all(dir);
}
