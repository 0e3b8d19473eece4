#pragma once

#include "debugrepair/inspector.hpp"
#include "debugrepair/llm.hpp"
#include "debugrepair/patch_coder.hpp"
#include "debugrepair/prompts.hpp"
#include "debugrepair/session.hpp"
#include "debugrepair/task.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace debugrepair {

struct RunMetrics {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  Money cost;
  double wall_time_seconds = 0.0;
  int patch_attempts = 0;
  int reasoning_iterations = 0;
  bool resolved = false;
};

struct RepairOutcome {
  std::string task_id;
  bool resolved = false;
  bool errored = false; // infrastructure fault (harness, LLM, debugger launch)
  std::string error;
  std::string final_code;
  std::vector<PatchAttempt> attempts;
  RunMetrics metrics;
};

nlohmann::json outcome_to_json(const RepairOutcome &outcome);
RepairOutcome outcome_from_json(const nlohmann::json &j);

// Append-only JSONL trajectory log: one "turn" record per inspector turn,
// one "attempt" record per patch attempt, one final "outcome" record.
class TrajectoryLog {
public:
  // Opens (truncating) the file. Throws StorageFailure.
  explicit TrajectoryLog(const std::filesystem::path &path);

  void log_turn(const std::string &task_id, int attempt, const TrajectoryStep &step);
  void log_attempt(const std::string &task_id, const PatchAttempt &attempt,
                   const TokenUsage &usage, int reasoning_turns);
  void log_outcome(const RepairOutcome &outcome, const nlohmann::json &rollup);

  std::size_t records() const noexcept { return records_; }

private:
  void write(const nlohmann::json &record);

  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t records_ = 0;
};

nlohmann::json step_to_json(const TrajectoryStep &step);

struct ActionRollup {
  std::map<std::string, int> per_verb; // all four verbs, zero-filled
  int inspection = 0;
  int modification = 0;
  int parse_errors = 0;
  int violations = 0;
  nlohmann::json to_json() const;
};

ActionRollup rollup_actions(const std::vector<std::vector<TrajectoryStep>> &trajectories);

using BackendFactory = std::function<std::unique_ptr<DebuggerBackend>()>;

struct RepairConfig {
  int max_patch_attempts = 5;
  InspectorConfig inspector;
  ChatLimits limits;
  LaunchSpec launch; // workdir is filled in per attempt
  SessionOptions session;
};

struct RepairContext {
  LlmClient &inspector_llm;
  LlmClient &coder_llm;
  TestRunner &tests;
  BackendFactory backends;
  const PromptAssets &assets;
  const ModelSpec &model;
  TrajectoryLog *log = nullptr;
};

// The debug-then-patch loop for one task. Infrastructure faults do not
// escape: they produce an errored, unresolved outcome.
RepairOutcome repair(const RepairTask &task, const RepairConfig &config, RepairContext &ctx);

struct MetricsRow {
  std::string task_id;
  bool resolved = false;
  bool errored = false;
  RunMetrics metrics;
};

struct RunSummary {
  std::vector<MetricsRow> rows;
  int total = 0;
  int resolved = 0;
  int errored = 0;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  Money cost;
  double wall_time_seconds = 0.0;
  std::optional<double> resolve_rate;     // resolved / total
  std::optional<double> fixes_per_hour;   // resolved / hours
  std::optional<double> fixes_per_dollar; // resolved / dollars
};

// Errored tasks stay in the denominator unless exclude_errored is set.
RunSummary compute_run_metrics(const std::vector<RepairOutcome> &outcomes,
                               bool exclude_errored = false);

// "67.87%"; "n/a" when undefined.
std::string format_percent(std::optional<double> ratio);
std::string format_number(std::optional<double> value, int decimals = 2);

nlohmann::json summary_to_json(const RunSummary &summary, const ModelSpec &model);
std::string render_summary(const RunSummary &summary, const ModelSpec &model);

} // namespace debugrepair
