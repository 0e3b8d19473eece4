#include "debugrepair/protocol.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace debugrepair;

namespace {

AgentTurn turn_of(const std::variant<AgentTurn, ParseError> &r) {
  if (const auto *e = std::get_if<ParseError>(&r))
    throw std::runtime_error("unexpected parse error: " + e->message + " | " + e->fragment);
  return std::get<AgentTurn>(r);
}

ParseError error_of(const std::variant<AgentTurn, ParseError> &r) {
  if (!std::holds_alternative<ParseError>(r))
    throw std::runtime_error("expected a parse error");
  return std::get<ParseError>(r);
}

std::string block(std::string_view body, std::string_view tag = "debugger") {
  return "### THOUGHT\nlook\n### ACTION\n```" + std::string(tag) + "\n" + std::string(body) +
         "\n```";
}

std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST(Parse, NewlinesAndSemicolonsSeparateCalls) {
  const auto &t = turn_of(parse_turn(
      block("set_breakpoint(10);set_breakpoint(40)\ncontrol_execution(\"continue\")")));
  EXPECT_EQ(t.thought, "look");
  ASSERT_EQ(t.actions.size(), 3u);
  EXPECT_EQ(t.actions[0], InspectorAction(SetBreakpoint{10}));
  EXPECT_EQ(t.actions[1], InspectorAction(SetBreakpoint{40}));
  EXPECT_EQ(t.actions[2], InspectorAction(ControlExecution{ExecCommand::Continue}));
  EXPECT_FALSE(t.truncated);
}

TEST(Parse, NestedQuotesAndEscapes) {
  const auto &t = turn_of(parse_turn(block(
      R"x(interact_code("print('a;b', \"c\")"); interact_code('x = "1\n2"'))x")));
  ASSERT_EQ(t.actions.size(), 2u);
  EXPECT_EQ(t.actions[0], InspectorAction(InteractCode{"print('a;b', \"c\")"}));
  EXPECT_EQ(t.actions[1], InspectorAction(InteractCode{"x = \"1\n2\""}));
}

TEST(Parse, TripleQuotedMultilineCode) {
  const auto &t = turn_of(parse_turn(block("interact_code(\"\"\"for i in range(2):\n"
                                           "    print(i)\"\"\")")));
  ASSERT_EQ(t.actions.size(), 1u);
  EXPECT_EQ(t.actions[0], InspectorAction(InteractCode{"for i in range(2):\n    print(i)"}));
}

TEST(Parse, KeywordArgumentsAndTags) {
  const auto &t = turn_of(parse_turn(
      block("set_breakpoint(line=7)\ncontrol_execution(cmd='restart')", "toolcalls")));
  ASSERT_EQ(t.actions.size(), 2u);
  EXPECT_EQ(t.actions[0], InspectorAction(SetBreakpoint{7}));
  EXPECT_EQ(t.actions[1], InspectorAction(ControlExecution{ExecCommand::Restart}));
  EXPECT_TRUE(std::holds_alternative<AgentTurn>(parse_turn(block("set_breakpoint(3)", ""))));
}

TEST(Parse, UnknownVerbListsLegalOnes) {
  const auto &e = error_of(parse_turn(block("step_over(3)")));
  EXPECT_EQ(e.fragment, "step_over(3)");
  for (const char *verb : {"set_breakpoint", "control_execution", "interact_code",
                           "propose_repair"})
    EXPECT_NE(e.message.find(verb), std::string::npos) << verb;
}

TEST(Parse, BadArgumentsExplainTheFix) {
  EXPECT_NE(error_of(parse_turn(block("control_execution('next')"))).message.find("'continue'"),
            std::string::npos);
  EXPECT_NE(error_of(parse_turn(block("set_breakpoint('abc')"))).message.find("integer"),
            std::string::npos);
  EXPECT_NE(error_of(parse_turn(block("set_breakpoint(0)"))).message.find("start at 1"),
            std::string::npos);
  EXPECT_NE(error_of(parse_turn(block("interact_code('x'"))).message.find("')'"),
            std::string::npos);
  EXPECT_NE(error_of(parse_turn(block("interact_code(x)"))).message.find("literal"),
            std::string::npos);
  EXPECT_NE(error_of(parse_turn(block("", "python"))).message.find("```debugger"),
            std::string::npos);
  EXPECT_NE(error_of(parse_turn("no block at all")).message.find("### ACTION"),
            std::string::npos);
}

TEST(Parse, CallsAfterProposeRepairAreDropped) {
  const auto &t = turn_of(parse_turn(block("propose_repair('fix it')\nset_breakpoint(3)")));
  ASSERT_EQ(t.actions.size(), 1u);
  EXPECT_TRUE(t.truncated);
}

TEST(Parse, EchoParsesBack) {
  const std::vector<InspectorAction> actions = {
      SetBreakpoint{12}, ControlExecution{ExecCommand::Restart},
      InteractCode{"print(\"it's\")\n\tx = '\\n'"}, ProposeRepair{"flatten T1"}};
  for (const auto &a : actions) {
    const auto &t = turn_of(parse_turn(block(render_echo(a))));
    ASSERT_EQ(t.actions.size(), 1u);
    EXPECT_EQ(t.actions[0], a);
  }
  EXPECT_EQ(render_echo(ControlExecution{ExecCommand::Continue}),
            "control_execution('continue')");
}

namespace {

std::string random_text(std::mt19937 &rng) {
  static const std::vector<std::string> pieces = {
      "x", " ", "'", "\"", "\\", "\n", "\t", ";", "(", ")", "```", "###", "é", "中", "\r",
      "print(", "df = pd.DataFrame()", "\"\"\"", "'''", "\\n", "\x01", "@@IW-7f3a@@", "#"};
  std::string out = "v";
  for (int i = static_cast<int>(rng() % 12); i > 0; --i)
    out += pieces[rng() % pieces.size()];
  return out;
}

InspectorAction random_action(std::mt19937 &rng, bool allow_propose) {
  switch (rng() % (allow_propose ? 4 : 3)) {
  case 0: return SetBreakpoint{1 + static_cast<int>(rng() % 100000)};
  case 1: return ControlExecution{rng() % 2 ? ExecCommand::Continue : ExecCommand::Restart};
  case 2: return InteractCode{random_text(rng)};
  default: return ProposeRepair{random_text(rng)};
  }
}

} // namespace

TEST(Parse, FormatParseRoundTripProperty) {
  std::mt19937 rng(4242);
  for (int round = 0; round < 10000; ++round) {
    std::vector<InspectorAction> actions;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i)
      actions.push_back(random_action(rng, i + 1 == n));
    const auto text = format_turn("step " + std::to_string(round), actions);
    const auto parsed = parse_turn(text);
    ASSERT_TRUE(std::holds_alternative<AgentTurn>(parsed))
        << text << "\n" << std::get<ParseError>(parsed).message;
    ASSERT_EQ(std::get<AgentTurn>(parsed).actions, actions) << text;
    ASSERT_EQ(std::get<AgentTurn>(parsed).thought, "step " + std::to_string(round));
  }
}

TEST(Parse, ArbitraryBytesNeverThrow) {
  std::mt19937 rng(99);
  const std::string alphabet = "set_breakpoint(control_execution'\"\\\n;)```### ACTION";
  for (int round = 0; round < 5000; ++round) {
    std::string text;
    const int n = static_cast<int>(rng() % 200);
    for (int i = 0; i < n; ++i)
      text += rng() % 4 ? alphabet[rng() % alphabet.size()] : static_cast<char>(rng());
    if (round % 2)
      text = "### ACTION\n```debugger\n" + text;
    EXPECT_NO_THROW(parse_turn(text));
  }
}

TEST(Render, StatusMatchesGolden) {
  EXPECT_EQ(render_status(testsupport::paused_status()),
            read_file(testsupport::fixture("golden/paused_status.txt")));
}

TEST(Render, StatusInOtherModes) {
  SessionStatus start;
  EXPECT_EQ(render_status(start),
            "## PDB Execution Status\nProgram not started.\nActive Breakpoints:\n"
            "No active breakpoints.");

  SessionStatus done;
  done.mode = SessionMode::Done;
  EXPECT_EQ(render_status(done), "## PDB Execution Status\nSession closed. No program is running.");

  SessionStatus pm;
  pm.mode = SessionMode::PostMortem;
  pm.stack = {{1, "<module>", "__test__.py", 3, "h({})"}};
  pm.last_event = "KeyError: 'missing'";
  const auto text = render_status(pm);
  EXPECT_NE(text.find("Post mortem mode after KeyError: 'missing'"), std::string::npos);
  EXPECT_NE(text.find("[1] <module> at __test__.py:3| h({}) (paused here)"), std::string::npos);

  SessionStatus err;
  err.mode = SessionMode::RuntimeError;
  EXPECT_NE(render_status(err).find("control_execution('restart')"), std::string::npos);
}

TEST(Render, Observations) {
  const Observation a{"set_breakpoint(26)", "Breakpoint b1 set at __test__.py:26",
                      SessionMode::Start, ObservationKind::Executed};
  const Observation b{"control_execution('continue')", "Paused before line 26 at test.py",
                      SessionMode::RuntimeState, ObservationKind::Executed};
  EXPECT_EQ(render_observation(a), "> set_breakpoint(26)\n← Breakpoint b1 set at __test__.py:26");
  EXPECT_EQ(render_observations({a, b}),
            "> set_breakpoint(26)\n← Breakpoint b1 set at __test__.py:26\n"
            "> control_execution('continue')\n← Paused before line 26 at test.py");
  EXPECT_EQ(render_parse_error({"step_over(3)", "unknown action"}),
            "Parse error: unknown action\nOffending text: step_over(3)");
}
