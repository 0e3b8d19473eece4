#pragma once

#include "debugrepair/inspector.hpp"
#include "debugrepair/llm.hpp"
#include "debugrepair/prompts.hpp"
#include "debugrepair/task.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace debugrepair {

struct PatchAttempt {
  int version = 0; // 1-based; version 0 is the buggy code
  std::string code;
  RootCauseReport report; // the report this version was written from
  TestReport test_report;
};

// Prompt with the task, one "## Code Version k" section per known version
// (0 = buggy code) each with its error and the repair plan that followed
// it; the last version carries the current report.
std::vector<ChatMessage> build_coder_prompt(const PromptAssets &assets, const RepairTask &task,
                                            const FailingTest &initial_failure,
                                            const std::vector<PatchAttempt> &attempts,
                                            const RootCauseReport &report);

// Body of the last fenced block, without its language tag. Throws
// ExtractionError when the completion has no fenced block.
std::string extract_patch(std::string_view completion);

struct PatchGeneration {
  std::optional<std::string> code; // empty when both completions lacked a block
  std::string failure;             // why, when code is empty
  TokenUsage usage;
  int llm_calls = 0;
};

// One completion, plus a single re-prompt when no code block came back.
PatchGeneration generate_patch(LlmClient &llm, const ModelSpec &model, const ChatLimits &limits,
                               const PromptAssets &assets, std::vector<ChatMessage> messages);

// First failure; the report must not be passing.
const FailingTest &select_focus(const TestReport &report);

struct TestLimits {
  std::chrono::milliseconds per_test{10'000};
  std::chrono::milliseconds per_suite{60'000};
  std::size_t output_cap = 64 * 1024;
  // Slack on top of per_suite before the runner kills the process.
  std::chrono::milliseconds grace{5'000};
};

enum class TestScope { Public, Full };

class TestRunner {
public:
  virtual ~TestRunner() = default;
  // Runs the suite against `code` in a fresh directory named by `label`.
  // Failing or unparseable code gives a failed report; HarnessFailure means
  // the environment itself is broken.
  virtual TestReport run_tests(const std::string &code, const RepairTask &task, TestScope scope,
                               const std::string &label) = 0;
  // Prepares a debugging directory whose test file runs `focus` against
  // `code`; returns the directory.
  virtual std::filesystem::path prepare_debug(const std::string &code, const RepairTask &task,
                                              const FailingTest &focus,
                                              const std::string &label) = 0;
};

struct ShimCommand {
  std::vector<std::string> interpreter_argv; // e.g. {"python3", "-u", "/path/shim.py"}
};

// Runs tests through the debuggee shim:
//   shim --encapsulate task.json --file __test__.py --marker M
//     writes the test file and prints "<MARKER> tests [names...]"
//   shim --run --file __test__.py --marker M --test-timeout S
//     prints "<MARKER> test-result {name, passed, error, trace}" per test
// Tests without a result line count as failed.
// Directories: <run_root>/<task_id>/<label>/__test__.py
class ShimTestRunner final : public TestRunner {
public:
  ShimTestRunner(ShimCommand shim, std::filesystem::path run_root, TestLimits limits = {});

  TestReport run_tests(const std::string &code, const RepairTask &task, TestScope scope,
                       const std::string &label) override;
  std::filesystem::path prepare_debug(const std::string &code, const RepairTask &task,
                                      const FailingTest &focus, const std::string &label) override;

  const std::filesystem::path &run_root() const noexcept { return run_root_; }

private:
  std::filesystem::path fresh_dir(const RepairTask &task, const std::string &label) const;
  void encapsulate(const std::filesystem::path &dir, const std::string &code,
                   const RepairTask &task, TestScope scope, const std::string &focus) const;

  ShimCommand shim_;
  std::filesystem::path run_root_;
  TestLimits limits_;
};

// Parses the shim's run output into a report. `expected` lists the test
// names in declaration order (missing ones become failures).
TestReport parse_test_output(std::string_view output, const std::vector<std::string> &expected,
                             bool timed_out, std::size_t output_cap);

} // namespace debugrepair
