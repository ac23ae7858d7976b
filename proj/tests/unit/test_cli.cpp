#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "battery.hpp"
#include "rflab/config.hpp"
#include "rflab/error.hpp"
#include "rflab/report.hpp"

using namespace rflab;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

fs::path scratch_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  const fs::path p = fs::temp_directory_path() / ("rflab-test-" + tag + "-" + std::to_string(rng()));
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kStaticPlane = R"(
[model]
n = 2
kappa = 0
[scale]
variant = static
a0 = 1.5
[tau]
min = 0
max = 2
[grid]
rho_min = 0
rho_max = 1
rho_nodes = 6
tau_min = 0.5
tau_max = 1.5
tau_nodes = 3
)";

}  // namespace

TEST_CASE("config parsing") {
  const ScenarioConfig c = parse(kStaticPlane);
  CHECK(c.model.dimension == 2);
  CHECK(c.model.curvature == Curvature::Flat);
  CHECK(c.scale.a0 == 1.5);
  CHECK(c.grid.rho_nodes == 6);
  CHECK(c.grid.tau_hi == 1.5);
  CHECK(c.heat.solution == "eigen");
  CHECK_FALSE(c.multistart);

  const ScenarioConfig k = parse("[scale]\nvariant = backward_k_ricci\nK = 0.4\n[model]\nkappa = 1\n"
                                 "[quantities]\nmuller_convention = remark\n[scaling]\nK = 0, 0.5\n");
  REQUIRE(std::holds_alternative<scale::BackwardKRicci>(k.scale.variant));
  CHECK(std::get<scale::BackwardKRicci>(k.scale.variant).K == 0.4);
  CHECK(k.convention == MullerConvention::Remark);
  CHECK(k.scaling.K == std::vector<double>{0.0, 0.5});

  const ScenarioConfig commented = parse("seed = 7 ; trailing note\n[model]\nn = 3   # dimension\nkappa = -1\n");
  CHECK(commented.seed == 7);
  CHECK(commented.model.dimension == 3);
  CHECK(commented.model.curvature == Curvature::Hyperbolic);

  CHECK(parse_real_list("0:1:5") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(parse_real_list(" 1, 2 ,3") == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse("[model]\nn = two\n"), ConfigError);
  CHECK_THROWS_AS(parse("[model]\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse("[model]\nkappa = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scale]\nvariant = shrinking\n"), ConfigError);
  CHECK_THROWS_AS(parse("[scale]\nvariant = tabulated\n"), ConfigError);
  CHECK_THROWS_AS(parse("[heat]\nsolution = quadratic\n"), ConfigError);
  CHECK_THROWS_AS(parse("[grid]\nrho_nodes = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_real_list("1:0"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/rflab.ini"), ConfigError);
}

TEST_CASE("tabulated scale from a CSV table") {
  const fs::path dir = scratch_dir("table");
  fs::create_directories(dir);
  {
    std::ofstream t(dir / "scale.csv");
    t << "tau,a\n";
    for (int k = 0; k <= 10; ++k) t << 0.1 * k << "," << std::sqrt(1.0 + 0.2 * k) << "\n";
  }
  {
    std::ofstream c(dir / "run.ini");
    c << "[model]\nn = 2\nkappa = 1\n[scale]\nvariant = tabulated\ntable = scale.csv\n";
  }
  const ScenarioConfig cfg = load_config(dir / "run.ini");
  REQUIRE(std::holds_alternative<scale::Tabulated>(cfg.scale.variant));
  CHECK(std::get<scale::Tabulated>(cfg.scale.variant).tau.size() == 11);
  fs::remove_all(dir);
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_real(0.1) == "0.1");
  CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_real(std::nan("")) == "nan");
}

TEST_CASE("reduced-field task writes the static oracle") {
  ScenarioConfig cfg = parse(kStaticPlane);
  cfg.output_dir = scratch_dir("reduced");
  const battery::TaskResult r = battery::run_task("reduced-field", cfg);
  CHECK(r.pass);
  CHECK(r.report["pass"].get<bool>());
  REQUIRE(fs::exists(cfg.output_dir / "report.json"));
  std::ifstream csv(cfg.output_dir / "data.csv");
  std::string header, line;
  std::getline(csv, header);
  CHECK(header == "rho,tau,L,ell,Lbar,dfrak,smooth");
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream s(line);
    std::string cell;
    std::vector<double> v;
    for (int k = 0; k < 6 && std::getline(s, cell, ','); ++k) v.push_back(std::stod(cell));
    const double expect = (1.5 * v[0]) * (1.5 * v[0]) / (4.0 * v[1]);
    CHECK(v[3] == doctest::Approx(expect).epsilon(1e-8));
    ++rows;
  }
  CHECK(rows == 18);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("reports are byte-identical across runs") {
  ScenarioConfig cfg = parse(std::string(kStaticPlane) + "[lgeodesic]\nrho = 0.7\ntau = 0.9\nknots = 32\n");
  cfg.seed = 11;
  const fs::path a = scratch_dir("a"), b = scratch_dir("b");
  cfg.output_dir = a;
  battery::run_task("lgeodesic", cfg);
  cfg.output_dir = b;
  battery::run_task("lgeodesic", cfg);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "data.csv") == slurp(b / "data.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("grad-check on a sign-changing solution is inapplicable, not failed") {
  ScenarioConfig cfg = parse(R"(
[model]
n = 1
kappa = 0
[tau]
max = 4
[grid]
rho_min = -2
rho_max = 2
rho_nodes = 21
tau_min = 0.1
tau_max = 1
tau_nodes = 10
[heat]
solution = linear
slope = 1
offset = 0
[estimate]
R = 1
T = 1
cutoff_grid = 64
)");
  cfg.output_dir = scratch_dir("grad");
  const battery::TaskResult r = battery::run_task("grad-check", cfg);
  CHECK(r.pass);
  CHECK(r.report["status"].get<std::string>() == "inapplicable");
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("failed tasks leave no artifacts") {
  ScenarioConfig cfg = parse(std::string(kStaticPlane) + "[heat]\nsolution = eigen\n");
  cfg.output_dir = scratch_dir("fail");
  CHECK_THROWS(battery::run_task("heat-solve", cfg));
  CHECK_FALSE(fs::exists(cfg.output_dir));

  cfg = parse("task = lgeodesic\n" + std::string(kStaticPlane));
  cfg.output_dir = scratch_dir("mismatch");
  CHECK_THROWS_AS(battery::run_task("reduced-field", cfg), ConfigError);
  CHECK_FALSE(fs::exists(cfg.output_dir));
}

TEST_CASE("every task name is known") {
  CHECK(battery::task_names().size() == 10);
  ScenarioConfig cfg = parse(kStaticPlane);
  cfg.output_dir = scratch_dir("unknown");
  CHECK_THROWS_AS(battery::run_task("no-such-task", cfg), ConfigError);
}
