#pragma once

#include "debugrepair/llm.hpp"
#include "debugrepair/prompts.hpp"
#include "debugrepair/protocol.hpp"
#include "debugrepair/session.hpp"
#include "debugrepair/task.hpp"

#include <optional>
#include <string>
#include <vector>

namespace debugrepair {

enum class Interaction { Inspection, Modification };
std::string_view to_string(Interaction kind);

// Inspection iff the code calls print (a real `print` token followed by
// '(', outside strings and comments).
Interaction classify_interaction(std::string_view code);

enum class ReportSource { ProposedByAgent, ForcedByLimit };
std::string_view to_string(ReportSource source);

struct RootCauseReport {
  std::string root_cause;
  std::string repair_plan;
  ReportSource source = ReportSource::ProposedByAgent;

  // "The root cause of the bug is that <cause>, to fix the bug, consider <plan>"
  std::string render() const;
  friend bool operator==(const RootCauseReport &, const RootCauseReport &) = default;
};

// Splits free text into cause and plan (case-insensitive markers); missing
// parts get a generic placeholder so both fields are always non-empty.
RootCauseReport parse_report(std::string_view text, ReportSource source);

struct TrajectoryStep {
  int turn_index = 0; // 1-based
  std::string completion;
  std::string thought;
  std::vector<InspectorAction> actions;
  std::vector<Observation> observations; // executed actions only
  std::vector<Observation> skipped;      // actions not run after a failure
  std::vector<Interaction> classifications; // one per interact_code action
  std::optional<ParseError> parse_error;
};

// Text returned to the model for this step.
std::string step_feedback(const TrajectoryStep &step);

struct InspectorConfig {
  int max_reasoning_iterations = 20;
  bool breakpoint_inspection = true; // few-shot for value inspection
  bool runtime_modification = true;  // few-shots for runtime changes
};

std::vector<ChatMessage> build_inspector_prompt(const PromptAssets &assets,
                                                const InspectorConfig &config,
                                                const RepairTask &task, std::string_view code,
                                                const FailingTest &t_fail,
                                                const SessionStatus &status,
                                                const std::vector<TrajectoryStep> &trajectory);

struct InspectionResult {
  RootCauseReport report;
  std::vector<TrajectoryStep> trajectory;
  TokenUsage usage;
  int llm_calls = 0;
};

// ReAct loop over an open session. Stops when propose_repair executes or
// after max_reasoning_iterations turns, in which case one extra completion
// asks for a summary. Throws LlmUnavailable.
InspectionResult run_inspection(Session &session, const RepairTask &task, std::string_view code,
                                const FailingTest &t_fail, LlmClient &llm, const ModelSpec &model,
                                const PromptAssets &assets, const InspectorConfig &config,
                                const ChatLimits &limits = {});

} // namespace debugrepair
