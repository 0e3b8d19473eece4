#include "debugrepair/errors.hpp"
#include "debugrepair/fake_backend.hpp"
#include "debugrepair/orchestrator.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <set>

using namespace debugrepair;
using testsupport::chunk;

namespace {

const PromptAssets &assets() {
  static const PromptAssets a = PromptAssets::load(default_asset_dir());
  return a;
}

std::unique_ptr<DebuggerBackend> idle_backend() {
  return std::make_unique<FakeBackend>(
      Transcript{chunk("start"), {}}, [](std::string_view cmd) {
        if (cmd.starts_with("tbreak "))
          return chunk("start", "Breakpoint 1 at /w/__test__.py:3", {{1, "__test__.py", 3, 0}});
        if (cmd == wire::kStatus)
          return chunk("start", "event\tprogram not started");
        return chunk("start");
      });
}

// Code passes when listed in `passing`; `public_only` passes the public
// subset but fails the full suite with a hidden test.
class ScriptedRunner final : public TestRunner {
public:
  std::set<std::string> passing;
  std::set<std::string> public_only;
  bool broken = false;
  std::vector<std::string> labels;
  std::vector<std::string> debug_focus;

  TestReport run_tests(const std::string &code, const RepairTask &, TestScope scope,
                       const std::string &label) override {
    if (broken)
      throw HarnessFailure("interpreter missing");
    labels.push_back(label);
    TestReport r;
    if (passing.count(code) || (scope == TestScope::Public && public_only.count(code))) {
      r.passed = true;
      return r;
    }
    if (public_only.count(code))
      r.failures.push_back({"test_hidden", "AssertionError: hidden", "trace"});
    else
      r.failures.push_back({"test_case_1", "TypeError: bad " + code, "trace"});
    return r;
  }

  std::filesystem::path prepare_debug(const std::string &, const RepairTask &,
                                      const FailingTest &focus, const std::string &label) override {
    labels.push_back(label);
    debug_focus.push_back(focus.name);
    return "/w";
  }
};

std::string turn(std::string_view body) {
  return "### THOUGHT\nnext\n### ACTION\n```debugger\n" + std::string(body) + "\n```";
}

const std::string kPropose =
    turn("propose_repair('The root cause of the bug is that x is wrong. To fix this, fix x.')");

RepairTask sample_task() {
  RepairTask t;
  t.task_id = "sample";
  t.requirement = "Return one.";
  t.buggy_code = "BUGGY\n";
  return t;
}

struct Rig {
  ScriptedRunner runner;
  MockLlm inspector;
  MockLlm coder;
  ModelSpec model{"mock", Money::parse("2e-6"), Money::parse("6e-6")};
  RepairConfig config;

  Rig(std::vector<std::string> inspector_script, std::vector<std::string> coder_script,
      bool cycle = false)
      : inspector(std::move(inspector_script), cycle), coder(std::move(coder_script), cycle) {}

  RepairOutcome run(TrajectoryLog *log = nullptr) {
    RepairContext ctx{inspector, coder, runner, idle_backend, assets(), model, log};
    return repair(sample_task(), config, ctx);
  }
};

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::vector<nlohmann::json> out;
  for (std::string line; std::getline(in, line);)
    out.push_back(nlohmann::json::parse(line));
  return out;
}

} // namespace

TEST(Repair, AlreadyPassingCodeNeedsNoAttempts) {
  Rig rig({}, {});
  rig.runner.passing = {"BUGGY\n"};
  const auto out = rig.run();
  EXPECT_TRUE(out.resolved);
  EXPECT_TRUE(out.attempts.empty());
  EXPECT_EQ(out.final_code, "BUGGY\n");
  EXPECT_EQ(rig.inspector.calls(), 0u);
  EXPECT_EQ(out.metrics.cost, Money{});
  EXPECT_EQ(rig.runner.labels, (std::vector<std::string>{"v0", "v0-final"}));
}

TEST(Repair, ResolvedOnFirstAttempt) {
  Rig rig({kPropose}, {"```python\nGOOD\n```"});
  rig.runner.passing = {"GOOD\n"};
  const auto out = rig.run();
  EXPECT_TRUE(out.resolved);
  EXPECT_FALSE(out.errored);
  ASSERT_EQ(out.attempts.size(), 1u);
  EXPECT_EQ(out.attempts[0].version, 1);
  EXPECT_EQ(out.attempts[0].report.root_cause, "x is wrong");
  EXPECT_EQ(out.final_code, "GOOD\n");
  EXPECT_EQ(out.metrics.patch_attempts, 1);
  EXPECT_EQ(out.metrics.reasoning_iterations, 1);
  EXPECT_EQ(out.metrics.cost,
            cost_of({out.metrics.input_tokens, out.metrics.output_tokens}, rig.model));
  EXPECT_EQ(rig.runner.labels, (std::vector<std::string>{"v0", "v0-debug", "v1", "v1-final"}));
  EXPECT_EQ(rig.runner.debug_focus, std::vector<std::string>{"test_case_1"});
}

TEST(Repair, LimitsBoundTheLoopAndReturnTheLastVersion) {
  std::vector<std::string> coder;
  for (int k = 1; k <= 5; ++k)
    coder.push_back("```python\nBAD" + std::to_string(k) + "\n```");
  Rig rig({turn("set_breakpoint(3)")}, coder, true);
  const auto out = rig.run();
  EXPECT_FALSE(out.resolved);
  EXPECT_FALSE(out.errored);
  ASSERT_EQ(out.attempts.size(), 5u);
  EXPECT_EQ(out.final_code, "BAD5\n");
  EXPECT_EQ(out.metrics.reasoning_iterations, 100);
  EXPECT_EQ(rig.inspector.calls(), 5u * 21u);
  EXPECT_EQ(rig.coder.calls(), 5u);
  for (const auto &a : out.attempts)
    EXPECT_EQ(a.report.source, ReportSource::ForcedByLimit);
  // Each coder prompt lists every earlier version.
  const auto last = rig.coder.requests().back();
  for (int k = 0; k <= 4; ++k)
    EXPECT_NE(last[1].content.find("## Code Version " + std::to_string(k)), std::string::npos);
}

TEST(Repair, ConfiguredLimits) {
  Rig rig({turn("set_breakpoint(3)")}, {"```python\nBAD\n```"}, true);
  rig.config.max_patch_attempts = 2;
  rig.config.inspector.max_reasoning_iterations = 3;
  const auto out = rig.run();
  EXPECT_EQ(out.attempts.size(), 2u);
  EXPECT_EQ(out.metrics.reasoning_iterations, 6);
}

TEST(Repair, ExtractionFailureKeepsCurrentCode) {
  Rig rig({kPropose}, {"no code here", "still none"});
  rig.config.max_patch_attempts = 1;
  const auto out = rig.run();
  EXPECT_FALSE(out.resolved);
  ASSERT_EQ(out.attempts.size(), 1u);
  EXPECT_EQ(out.attempts[0].code, "BUGGY\n");
  ASSERT_EQ(out.attempts[0].test_report.failures.size(), 1u);
  EXPECT_EQ(out.attempts[0].test_report.failures[0].name, "patch-extraction");
  EXPECT_EQ(rig.coder.calls(), 2u);
}

TEST(Repair, HiddenFailureBecomesTheNextFocus) {
  Rig rig({kPropose, kPropose}, {"```python\nPUBLIC\n```", "```python\nGOOD\n```"});
  rig.runner.public_only = {"PUBLIC\n"};
  rig.runner.passing = {"GOOD\n"};
  const auto out = rig.run();
  EXPECT_TRUE(out.resolved);
  ASSERT_EQ(out.attempts.size(), 2u);
  EXPECT_EQ(rig.runner.debug_focus, (std::vector<std::string>{"test_case_1", "test_hidden"}));
  EXPECT_EQ(out.attempts[0].test_report.failures[0].name, "test_hidden");
}

TEST(Repair, InfrastructureFaultIsErroredOutcome) {
  Rig rig({kPropose}, {});
  rig.runner.broken = true;
  const auto out = rig.run();
  EXPECT_TRUE(out.errored);
  EXPECT_FALSE(out.resolved);
  EXPECT_NE(out.error.find("interpreter missing"), std::string::npos);
  EXPECT_EQ(out.final_code, "BUGGY\n");
}

TEST(Repair, LlmOutageIsErroredOutcome) {
  Rig rig({}, {});
  const auto out = rig.run();
  EXPECT_TRUE(out.errored);
}

TEST(Log, RecordCountAndCostReplay) {
  const auto dir = testsupport::temp_dir("log");
  const auto path = dir / "sample.jsonl";
  Rig rig({turn("set_breakpoint(3)"), kPropose},
          {"```python\nBAD\n```", "```python\nGOOD\n```"}, true);
  rig.runner.passing = {"GOOD\n"};
  RepairOutcome out;
  std::size_t records = 0;
  {
    TrajectoryLog log(path);
    out = rig.run(&log);
    records = log.records();
  }
  ASSERT_TRUE(out.resolved);
  // Attempt 1: 2 turns; attempt 2: the cycle starts over at set_breakpoint, then proposes.
  const auto lines = read_jsonl(path);
  ASSERT_EQ(lines.size(), records);
  std::size_t turns = 0, attempts = 0, outcomes = 0;
  std::int64_t in = 0, outt = 0;
  for (const auto &r : lines) {
    const auto type = r.at("type").get<std::string>();
    turns += type == "turn";
    outcomes += type == "outcome";
    if (type == "attempt") {
      ++attempts;
      in += r.at("usage").at("input_tokens").get<std::int64_t>();
      outt += r.at("usage").at("output_tokens").get<std::int64_t>();
    }
  }
  EXPECT_EQ(turns, static_cast<std::size_t>(out.metrics.reasoning_iterations));
  EXPECT_EQ(attempts, out.attempts.size());
  EXPECT_EQ(outcomes, 1u);
  EXPECT_EQ(lines.size(), turns + attempts + 1);
  EXPECT_EQ(in, out.metrics.input_tokens);
  EXPECT_EQ(outt, out.metrics.output_tokens);
  const auto replayed = token_cost(in, rig.model.input_price, outt, rig.model.output_price);
  EXPECT_EQ(replayed, out.metrics.cost);
  EXPECT_EQ(Money::parse(lines.back().at("metrics").at("cost").get<std::string>()),
            out.metrics.cost);
  const auto rollup = lines.back().at("rollup");
  EXPECT_EQ(rollup.at("per_verb").at("propose_repair").get<int>(), 2);
}

TEST(Outcome, JsonRoundTrip) {
  Rig rig({kPropose}, {"```python\nGOOD\n```"});
  rig.runner.passing = {"GOOD\n"};
  const auto out = rig.run();
  const auto j = outcome_to_json(out);
  const auto back = outcome_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(outcome_to_json(back), j);
  EXPECT_EQ(back.metrics.cost, out.metrics.cost);
  EXPECT_EQ(back.attempts[0].report, out.attempts[0].report);
}

namespace {

RepairOutcome outcome(std::string id, bool resolved, bool errored, std::int64_t in,
                      std::int64_t out, const char *cost, double secs) {
  RepairOutcome o;
  o.task_id = std::move(id);
  o.resolved = resolved;
  o.errored = errored;
  o.metrics.input_tokens = in;
  o.metrics.output_tokens = out;
  o.metrics.cost = Money::parse(cost);
  o.metrics.wall_time_seconds = secs;
  o.metrics.resolved = resolved;
  return o;
}

} // namespace

// Hand-computed: 2 of 3 resolved over 1800 s and $0.50.
TEST(Metrics, HandOracle) {
  const std::vector<RepairOutcome> outs = {outcome("a", true, false, 100, 10, "0.20", 600),
                                           outcome("b", false, false, 200, 20, "0.25", 900),
                                           outcome("c", true, false, 300, 30, "0.05", 300)};
  const auto s = compute_run_metrics(outs);
  EXPECT_EQ(s.total, 3);
  EXPECT_EQ(s.resolved, 2);
  EXPECT_EQ(s.input_tokens, 600);
  EXPECT_EQ(s.output_tokens, 60);
  EXPECT_EQ(s.cost, Money::parse("0.50"));
  EXPECT_DOUBLE_EQ(*s.resolve_rate, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*s.fixes_per_hour, 4.0);
  EXPECT_DOUBLE_EQ(*s.fixes_per_dollar, 4.0);
  EXPECT_EQ(format_percent(s.resolve_rate), "66.67%");
}

TEST(Metrics, ResolveRateFormatting) {
  std::vector<RepairOutcome> outs;
  for (int i = 0; i < 607; ++i)
    outs.push_back(outcome("t" + std::to_string(i), i < 412, false, 0, 0, "0", 1));
  EXPECT_EQ(format_percent(compute_run_metrics(outs).resolve_rate), "67.87%");
}

TEST(Metrics, ErroredTasksAndEmptyRuns) {
  const std::vector<RepairOutcome> outs = {outcome("a", true, false, 1, 1, "0.01", 10),
                                           outcome("b", false, true, 0, 0, "0", 0)};
  EXPECT_EQ(format_percent(compute_run_metrics(outs).resolve_rate), "50.00%");
  const auto excl = compute_run_metrics(outs, true);
  EXPECT_EQ(excl.total, 1);
  EXPECT_EQ(excl.errored, 1);
  EXPECT_EQ(format_percent(excl.resolve_rate), "100.00%");

  const auto empty = compute_run_metrics({});
  EXPECT_FALSE(empty.resolve_rate.has_value());
  EXPECT_EQ(format_percent(empty.resolve_rate), "n/a");
  EXPECT_FALSE(empty.fixes_per_dollar.has_value());
  const auto text = render_summary(empty, ModelSpec{"mock"});
  EXPECT_NE(text.find("Resolve rate:   n/a"), std::string::npos);
}

TEST(Metrics, SummaryJson) {
  const std::vector<RepairOutcome> outs = {outcome("a", true, false, 1000, 200, "0.0032", 36)};
  const auto j = summary_to_json(compute_run_metrics(outs), ModelSpec{"m"});
  EXPECT_EQ(j.at("resolve_rate_text"), "100.00%");
  EXPECT_EQ(j.at("cost"), "0.003200000000");
  EXPECT_DOUBLE_EQ(j.at("fixes_per_hour").get<double>(), 100.0);
  EXPECT_EQ(j.at("tasks").size(), 1u);
}
