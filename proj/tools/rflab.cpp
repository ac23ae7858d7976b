#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "battery.hpp"
#include "rflab/config.hpp"
#include "rflab/error.hpp"
#include "rflab/report.hpp"

namespace {

using namespace rflab;
using battery::Json;

// Flag values gathered before the config is read; applied on top of it.
struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string K, t_grid, v_grid, R, T, r_list;
  std::optional<double> A, probe_rho, probe_tau;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("config", o.config, "scenario config (INI)")->required()->check(CLI::ExistingFile);
  sub->add_option("-o,--out", o.out, "output directory (overrides output.dir)");
  sub->add_option("--seed", o.seed, "seed for multi-start shooting and sampling");
  sub->add_option("--workers", o.workers, "worker threads, 0 = all cores");
}

void add_task_flags(const std::string& task, CLI::App* sub, Overrides& o) {
  if (task == "derivative-check" || task == "grad-check") {
    sub->add_option("--K", o.K, "constant K of the curvature hypothesis");
  }
  if (task == "grad-check") {
    sub->add_option("--R", o.R, "radii, list or lo:hi:count");
    sub->add_option("--T", o.T, "time scales, same length as --R");
    sub->add_option("--A", o.A, "bound A (default: sup u on the grid)");
  }
  if (task == "liouville-sweep") {
    sub->add_option("--r-list", o.r_list, "radii of the sweep");
    sub->add_option("--probe-rho", o.probe_rho, "probe radius");
    sub->add_option("--probe-tau", o.probe_tau, "probe time");
  }
  if (task == "scaling-check" || task == "harnack-check") {
    sub->add_option("--K", o.K, "K values, list or lo:hi:count");
    sub->add_option("--t-grid", o.t_grid, "forward times");
  }
  if (task == "harnack-check" || task == "kfrdv-check") {
    sub->add_option("--v-grid", o.v_grid, "|V| magnitudes");
  }
}

ScenarioConfig resolve(const std::string& task, const Overrides& o) {
  ScenarioConfig cfg = load_config(o.config);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  auto list = [](const std::string& flag, const std::string& text) {
    try {
      return parse_real_list(text);
    } catch (const ConfigError& e) {
      throw ConfigError(flag + ": " + e.what());
    }
  };
  if (!o.K.empty()) {
    if (task == "scaling-check" || task == "harnack-check") {
      cfg.scaling.K = list("--K", o.K);
    } else {
      const auto v = list("--K", o.K);
      if (v.size() != 1) throw ConfigError("--K expects one value for " + task);
      cfg.estimate.K = v.front();
    }
  }
  if (!o.t_grid.empty()) cfg.scaling.t_grid = list("--t-grid", o.t_grid);
  if (!o.v_grid.empty()) cfg.scaling.v_grid = list("--v-grid", o.v_grid);
  if (!o.R.empty()) cfg.estimate.R = list("--R", o.R);
  if (!o.T.empty()) cfg.estimate.T = list("--T", o.T);
  if (cfg.estimate.R.size() != cfg.estimate.T.size()) {
    throw ConfigError("--R and --T must have the same length");
  }
  if (o.A) cfg.estimate.A = *o.A;
  if (!o.r_list.empty()) cfg.liouville.R_list = list("--r-list", o.r_list);
  if (o.probe_rho) cfg.liouville.probe_rho = *o.probe_rho;
  if (o.probe_tau) cfg.liouville.probe_tau = *o.probe_tau;
  return cfg;
}

int run_suite(const std::string& out_dir, std::uint64_t seed, unsigned workers) {
  battery::AcceptanceOptions opt;
  opt.seed = seed;
  opt.workers = workers;
  Json criteria = Json::array();
  bool all = true;
  const auto results = battery::run_acceptance(opt, [](const battery::CriterionResult& r) {
    std::cout << battery::format_line(r) << std::endl;
  });
  for (const auto& r : results) {
    criteria.push_back(battery::criterion_json(r));
    all = all && r.pass;
  }
  const Json report = {{"schema_version", battery::kSchemaVersion},
                       {"task", "suite"},
                       {"seed", seed},
                       {"pass", all},
                       {"criteria", criteria}};
  std::filesystem::create_directories(out_dir);
  battery::write_json(std::filesystem::path(out_dir) / "report.json", report);
  CsvWriter csv(std::filesystem::path(out_dir) / "data.csv", {"id", "name", "pass", "seconds"});
  for (const auto& r : results) csv.cell(r.id).cell(r.name).cell(r.pass).cell(r.seconds).end_row();
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rflab: reduced geometry laboratory for model flows"};
  app.require_subcommand(1);

  std::map<std::string, Overrides> overrides;
  for (const auto& task : battery::task_names()) {
    auto* sub = app.add_subcommand(task, "run the " + task + " task from a scenario config");
    add_common(sub, overrides[task]);
    add_task_flags(task, sub, overrides[task]);
  }
  std::string suite_out = "rflab-suite";
  std::uint64_t suite_seed = 0;
  unsigned suite_workers = 0;
  auto* suite = app.add_subcommand("suite", "run the acceptance battery");
  suite->add_option("-o,--out", suite_out, "output directory");
  suite->add_option("--seed", suite_seed, "seed");
  suite->add_option("--workers", suite_workers, "worker threads, 0 = all cores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (suite->parsed()) return run_suite(suite_out, suite_seed, suite_workers);
    for (const auto& task : battery::task_names()) {
      if (!app.got_subcommand(task)) continue;
      const ScenarioConfig cfg = resolve(task, overrides[task]);
      const battery::TaskResult result = battery::run_task(task, cfg);
      std::cout << task << ": " << (result.pass ? "pass" : "FAIL") << " ("
                << (cfg.output_dir / "report.json").string() << ")\n";
      return result.pass ? 0 : 2;
    }
  } catch (const ConfigError& e) {
    std::cerr << "rflab: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "rflab: precondition: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "rflab: numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "rflab: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
