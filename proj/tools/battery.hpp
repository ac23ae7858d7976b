#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rflab/config.hpp"
#include "rflab/model_flows.hpp"

namespace rflab::battery {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct TaskResult {
  Json report;
  bool pass = true;
};

// Subcommands that run from a scenario config (everything except `suite`).
const std::vector<std::string>& task_names();

// Runs one task and writes report.json and data.csv into config.output_dir.
// Nothing is written when the task throws.
TaskResult run_task(const std::string& task, const ScenarioConfig& config);

Json flow_json(const FlowMetric& flow);

// Writes `report` with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const Json& report);

}  // namespace rflab::battery
