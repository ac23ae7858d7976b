#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "rflab/flow_quantities.hpp"
#include "rflab/model_flows.hpp"

namespace rflab {

struct GridSpec {
  double rho_lo = 0.0;
  double rho_hi = 1.0;
  int rho_nodes = 50;
  double tau_lo = 0.1;
  double tau_hi = 1.0;
  int tau_nodes = 50;
};

struct HeatConfig {
  // "constant", "linear", "exp", "eigen": catalog entries; "numeric" solves
  // backward from the catalog entry named by `terminal`, sampled at tau = grid.tau_max.
  std::string solution = "eigen";
  std::string terminal = "eigen";
  double value = 1.0;
  double slope = 1.0;
  double offset = 0.0;
  double scale = 1.0;
  double amplitude = 1.0;
  double shift = 10.0;
  int nodes = 401;
  double window = 10.0;  // half-width of the numeric window on non-compact charts
};

struct EstimateConfig {
  std::vector<double> R = {1.0};
  std::vector<double> T = {1.0};
  double K = 0.0;
  std::optional<double> A;  // defaults to sup u on the grid
  int cutoff_grid = 2048;
};

struct LiouvilleConfig {
  std::vector<double> R_list = {4.0, 8.0, 16.0, 32.0};
  double probe_rho = 0.5;
  double probe_tau = 1.0;
};

struct ScalingConfig {
  std::vector<double> K = {0.0, 0.3, 1.0};
  std::vector<double> t_grid;  // empty: 50 points up to 0.9 of the extinction time
  std::vector<double> v_grid = {0.0, 0.5, 1.0, 2.0};
  std::vector<double> ancient_t_grid;  // empty: 50 points on [-3, 0]
};

struct LGeodesicConfig {
  double rho = 0.5;
  double tau = 1.0;
  int knots = 64;
};

struct ScenarioConfig {
  std::string task;  // optional; must match the subcommand when present
  ModelSpaceSpec model;
  ScaleFlowSpec scale;
  TauDomain tau{0.0, 1.0};
  GridSpec grid;
  std::filesystem::path output_dir = "rflab-out";
  std::uint64_t seed = 0;
  unsigned workers = 0;
  bool multistart = false;
  MullerConvention convention = MullerConvention::Definition;
  HeatConfig heat;
  EstimateConfig estimate;
  LiouvilleConfig liouville;
  ScalingConfig scaling;
  LGeodesicConfig lgeodesic;
};

// INI-style key/value document; sections map to the dotted prefixes
// ([model] n = 2 is model.n). Unknown keys and malformed values throw ConfigError.
// Relative paths (scale.table) resolve against `base_dir`.
ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
ScenarioConfig load_config(const std::filesystem::path& path);

// "a,b,c" or "lo:hi:count" (inclusive, evenly spaced).
std::vector<double> parse_real_list(const std::string& text);

// Two-column CSV (tau, a); a header line is skipped if present.
scale::Tabulated read_scale_table(const std::filesystem::path& path);

}  // namespace rflab
