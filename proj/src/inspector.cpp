#include "debugrepair/inspector.hpp"

#include "debugrepair/errors.hpp"

#include <algorithm>
#include <cctype>

namespace debugrepair {
namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Position just past the string literal starting at `pos` (at the quote).
std::size_t skip_string(std::string_view code, std::size_t pos) {
  const char q = code[pos];
  const bool triple = code.substr(pos, 3) == std::string(3, q);
  std::size_t i = pos + (triple ? 3 : 1);
  while (i < code.size()) {
    if (code[i] == '\\') {
      i += 2;
      continue;
    }
    if (triple) {
      if (code.substr(i, 3) == std::string(3, q))
        return i + 3;
    } else if (code[i] == q) {
      return i + 1;
    } else if (code[i] == '\n') {
      return i;
    }
    ++i;
  }
  return code.size();
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
    ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
    --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string strip_edges(std::string s) {
  s = trim(s);
  while (!s.empty() && (s.back() == ',' || s.back() == '.' || s.back() == ';' || s.back() == ':'))
    s.pop_back();
  s = trim(s);
  // Drop a single pair of wrapping quotes.
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    s = trim(s.substr(1, s.size() - 2));
  return s;
}

bool is_failure(ObservationKind kind) {
  return kind == ObservationKind::Violation || kind == ObservationKind::Timeout ||
         kind == ObservationKind::BackendError || kind == ObservationKind::BackendDead;
}

} // namespace

std::string_view to_string(Interaction kind) {
  return kind == Interaction::Inspection ? "inspection" : "modification";
}

Interaction classify_interaction(std::string_view code) {
  std::size_t i = 0;
  while (i < code.size()) {
    const char c = code[i];
    if (c == '#') {
      while (i < code.size() && code[i] != '\n')
        ++i;
    } else if (c == '\'' || c == '"') {
      i = skip_string(code, i);
    } else if (ident_start(c)) {
      const std::size_t start = i;
      while (i < code.size() && ident_char(code[i]))
        ++i;
      const auto word = code.substr(start, i - start);
      // String prefixes such as f"..." or rb'...'.
      if (i < code.size() && (code[i] == '\'' || code[i] == '"') && word.size() <= 2 &&
          lower(word).find_first_not_of("rbuf") == std::string::npos) {
        i = skip_string(code, i);
        continue;
      }
      if (word != "print")
        continue;
      std::size_t before = start;
      while (before > 0 && (code[before - 1] == ' ' || code[before - 1] == '\t'))
        --before;
      if (before > 0 && code[before - 1] == '.')
        continue;
      std::size_t j = i;
      while (j < code.size() && (code[j] == ' ' || code[j] == '\t'))
        ++j;
      if (j < code.size() && code[j] == '(')
        return Interaction::Inspection;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < code.size() && (ident_char(code[i]) || code[i] == '.'))
        ++i;
    } else {
      ++i;
    }
  }
  return Interaction::Modification;
}

std::string_view to_string(ReportSource source) {
  return source == ReportSource::ProposedByAgent ? "proposed_by_agent" : "forced_by_limit";
}

std::string RootCauseReport::render() const {
  return "The root cause of the bug is that " + root_cause + ", to fix the bug, consider " +
         repair_plan;
}

RootCauseReport parse_report(std::string_view text, ReportSource source) {
  const std::string body = trim(text);
  const std::string low = lower(body);

  constexpr std::string_view kCause = "the root cause of the bug is that";
  std::size_t cause_begin = 0;
  if (const auto p = low.find(kCause); p != std::string::npos)
    cause_begin = p + kCause.size();

  static constexpr std::string_view kPlanMarkers[] = {
      "to fix the bug, consider", "to fix the bug consider", "to fix the bug,", "to fix this,",
      "to fix it,",               "to fix this",             "to fix the bug", "to fix"};
  std::size_t plan_marker = std::string::npos, plan_begin = std::string::npos;
  for (auto marker : kPlanMarkers) {
    const auto p = low.find(marker, cause_begin);
    if (p != std::string::npos) {
      plan_marker = p;
      plan_begin = p + marker.size();
      break;
    }
  }

  RootCauseReport report;
  report.source = source;
  if (plan_marker != std::string::npos) {
    report.root_cause = strip_edges(body.substr(cause_begin, plan_marker - cause_begin));
    report.repair_plan = strip_edges(body.substr(plan_begin));
  } else {
    report.root_cause = strip_edges(body.substr(cause_begin));
  }
  if (report.root_cause.empty())
    report.root_cause = "not established by the debugging session";
  if (report.repair_plan.empty())
    report.repair_plan = "correcting the faulty logic described above so the failing test passes";
  return report;
}

std::string step_feedback(const TrajectoryStep &step) {
  if (step.parse_error)
    return render_parse_error(*step.parse_error);
  std::string out = render_observations(step.observations);
  if (!step.skipped.empty()) {
    if (!out.empty())
      out += '\n';
    out += render_observations(step.skipped);
  }
  return out;
}

std::vector<ChatMessage> build_inspector_prompt(const PromptAssets &assets,
                                                const InspectorConfig &config,
                                                const RepairTask &task, std::string_view code,
                                                const FailingTest &t_fail,
                                                const SessionStatus &status,
                                                const std::vector<TrajectoryStep> &trajectory) {
  std::string few_shots;
  auto add_shot = [&](const std::string &shot) {
    if (!few_shots.empty())
      few_shots += "\n\n";
    few_shots += shot;
  };
  if (config.breakpoint_inspection)
    add_shot(assets.fewshot_breakpoint_inspection);
  if (config.runtime_modification) {
    add_shot(assets.fewshot_missing_logic);
    add_shot(assets.fewshot_flawed_logic);
  }

  std::vector<ChatMessage> messages;
  messages.push_back({"system", fill_template(assets.inspector_system,
                                              {{"tool_explanations", assets.tool_explanations},
                                               {"few_shots", few_shots},
                                               {"restrictions", assets.restrictions}})});

  std::string user = "## Coding Task\n" + task.requirement + "\n## Buggy Code\n```python\n" +
                     std::string(code);
  if (!user.empty() && user.back() != '\n')
    user += '\n';
  user += "```\n## Test Results\nError Message on Failing Test Case:\n";
  if (!t_fail.name.empty())
    user += "Test: " + t_fail.name + "\n";
  user += format_failure(t_fail);
  user += "\n## PDB Session State\n";
  user += render_status(status);
  messages.push_back({"user", std::move(user)});

  for (const auto &step : trajectory) {
    messages.push_back({"assistant", step.completion});
    messages.push_back({"user", step_feedback(step)});
  }
  return messages;
}

InspectionResult run_inspection(Session &session, const RepairTask &task, std::string_view code,
                                const FailingTest &t_fail, LlmClient &llm, const ModelSpec &model,
                                const PromptAssets &assets, const InspectorConfig &config,
                                const ChatLimits &limits) {
  InspectionResult result;
  const int max_turns = std::max(1, config.max_reasoning_iterations);

  for (int turn = 1; turn <= max_turns; ++turn) {
    const auto messages = build_inspector_prompt(assets, config, task, code, t_fail,
                                                 session.snapshot(), result.trajectory);
    const auto exchange = chat_fitting(llm, messages, model, limits);
    result.usage += exchange.usage;
    ++result.llm_calls;

    TrajectoryStep step;
    step.turn_index = turn;
    step.completion = exchange.completion;
    auto parsed = parse_turn(exchange.completion);
    if (auto *error = std::get_if<ParseError>(&parsed)) {
      step.parse_error = std::move(*error);
      result.trajectory.push_back(std::move(step));
      continue;
    }
    auto &agent_turn = std::get<AgentTurn>(parsed);
    step.thought = std::move(agent_turn.thought);
    step.actions = std::move(agent_turn.actions);
    for (const auto &action : step.actions)
      if (const auto *ic = std::get_if<InteractCode>(&action))
        step.classifications.push_back(classify_interaction(ic->code));

    std::optional<RootCauseReport> proposed;
    for (std::size_t i = 0; i < step.actions.size(); ++i) {
      const auto &action = step.actions[i];
      auto obs = session.apply_action(action);
      const bool failed = is_failure(obs.kind);
      step.observations.push_back(std::move(obs));
      if (const auto *repair = std::get_if<ProposeRepair>(&action); repair && !failed) {
        proposed = parse_report(repair->plan, ReportSource::ProposedByAgent);
        break;
      }
      if (failed) {
        for (std::size_t k = i + 1; k < step.actions.size(); ++k)
          step.skipped.push_back(Observation{
              render_echo(step.actions[k]),
              "Skipped: an earlier action in this turn did not complete.", session.mode(),
              ObservationKind::Skipped});
        break;
      }
    }
    result.trajectory.push_back(std::move(step));
    if (proposed) {
      result.report = std::move(*proposed);
      return result;
    }
  }

  auto messages = build_inspector_prompt(assets, config, task, code, t_fail, session.snapshot(),
                                         result.trajectory);
  messages.push_back({"user", assets.summarize_request});
  const auto exchange = chat_fitting(llm, std::move(messages), model, limits);
  result.usage += exchange.usage;
  ++result.llm_calls;

  std::string text = exchange.completion;
  const auto parsed = parse_turn(exchange.completion);
  if (const auto *agent_turn = std::get_if<AgentTurn>(&parsed)) {
    if (!agent_turn->thought.empty())
      text = agent_turn->thought;
    for (const auto &action : agent_turn->actions)
      if (const auto *repair = std::get_if<ProposeRepair>(&action))
        text = repair->plan;
  }
  result.report = parse_report(text, ReportSource::ForcedByLimit);
  return result;
}

} // namespace debugrepair
