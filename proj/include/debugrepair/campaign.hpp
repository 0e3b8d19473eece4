#pragma once

#include "debugrepair/orchestrator.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace debugrepair {

// Scripted completions for one task: the inspector and the coder each get
// their own queue.
struct MockTaskScript {
  std::vector<std::string> inspector;
  std::vector<std::string> coder;
  bool cycle_inspector = false;
  bool cycle_coder = false;
};

// {"tasks": {"<task_id>": {"inspector": [...], "coder": [...],
//   "cycle_inspector"?: bool, "cycle_coder"?: bool}}, "default"?: {...}}
struct MockScriptBook {
  std::map<std::string, MockTaskScript> tasks;
  std::optional<MockTaskScript> fallback;

  static MockScriptBook load(const std::filesystem::path &path);
  // Task entry, else the default, else nullptr.
  const MockTaskScript *find(const std::string &task_id) const;
};

// Model table from the run config file:
// {"models": {"<name>": {"input_price": "2.5e-6", "output_price": "1e-5",
//   "endpoint"?: "...", "api_key_env"?: "..."}}}
// Prices are USD per token, as decimal strings or numbers.
ModelSpec resolve_model(const std::string &name,
                        const std::optional<std::filesystem::path> &config_file);

// What one task needs to run.
struct TaskEnvironment {
  std::shared_ptr<LlmClient> inspector_llm;
  std::shared_ptr<LlmClient> coder_llm;
  std::unique_ptr<TestRunner> tests;
  BackendFactory backends;
};

using EnvironmentFactory = std::function<TaskEnvironment(const RepairTask &)>;

struct CampaignOptions {
  std::filesystem::path out_dir;
  int workers = 1;
  RepairConfig repair;
  ModelSpec model;
  bool exclude_errored = false;
  bool quiet = false;
};

struct CampaignResult {
  int executed = 0;
  int skipped = 0; // already had an outcome (resume)
  RunSummary summary;
};

// Runs every task without an existing outcome, writing
//   <out>/outcomes/<task_id>.json, <out>/trajectories/<task_id>.jsonl,
//   <out>/summary.json, <out>/summary.txt
// Per-task failures become errored outcomes; the campaign always completes.
CampaignResult run_campaign(const std::vector<RepairTask> &tasks, const CampaignOptions &options,
                            const PromptAssets &assets, const EnvironmentFactory &environment);

// Outcomes found under <run>/outcomes, ordered by task id.
std::vector<RepairOutcome> load_outcomes(const std::filesystem::path &run_dir);

// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path &path, const std::string &content);

struct LiveSettings {
  std::vector<std::string> shim_argv;     // interpreter + shim script
  std::optional<std::filesystem::path> mock_script;
  std::filesystem::path work_root;
  TestLimits test_limits;
};

// Mock clients when a mock script is given (otherwise one shared HTTP
// client), the shim-backed test runner and live debugger processes.
EnvironmentFactory make_live_environment(const LiveSettings &settings);

int default_worker_count();

} // namespace debugrepair
