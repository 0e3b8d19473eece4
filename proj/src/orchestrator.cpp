#include "debugrepair/orchestrator.hpp"

#include "debugrepair/errors.hpp"

#include <chrono>
#include <cstdio>

namespace debugrepair {

using nlohmann::json;

namespace {

json observation_to_json(const Observation &o) {
  return {{"echo", o.action_echo},
          {"body", o.body},
          {"mode", state_word(o.resulting_mode)},
          {"kind", to_string(o.kind)}};
}

json report_json(const RootCauseReport &r) {
  return {{"root_cause", r.root_cause},
          {"repair_plan", r.repair_plan},
          {"source", to_string(r.source)},
          {"text", r.render()}};
}

RootCauseReport report_from(const json &j) {
  RootCauseReport r;
  r.root_cause = j.at("root_cause").get<std::string>();
  r.repair_plan = j.at("repair_plan").get<std::string>();
  r.source = j.at("source").get<std::string>() == "forced_by_limit" ? ReportSource::ForcedByLimit
                                                                     : ReportSource::ProposedByAgent;
  return r;
}

json metrics_to_json(const RunMetrics &m) {
  return {{"input_tokens", m.input_tokens},
          {"output_tokens", m.output_tokens},
          {"cost", m.cost.to_string()},
          {"wall_time_seconds", m.wall_time_seconds},
          {"patch_attempts", m.patch_attempts},
          {"reasoning_iterations", m.reasoning_iterations},
          {"resolved", m.resolved}};
}

RunMetrics metrics_from_json(const json &j) {
  RunMetrics m;
  m.input_tokens = j.at("input_tokens").get<std::int64_t>();
  m.output_tokens = j.at("output_tokens").get<std::int64_t>();
  m.cost = Money::parse(j.at("cost").get<std::string>());
  m.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  m.patch_attempts = j.at("patch_attempts").get<int>();
  m.reasoning_iterations = j.at("reasoning_iterations").get<int>();
  m.resolved = j.at("resolved").get<bool>();
  return m;
}

json attempt_to_json(const PatchAttempt &a) {
  return {{"version", a.version},
          {"code", a.code},
          {"report", report_json(a.report)},
          {"test_report", report_to_json(a.test_report)}};
}

std::string fmt(const char *format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

} // namespace

json step_to_json(const TrajectoryStep &step) {
  json actions = json::array();
  for (const auto &a : step.actions)
    actions.push_back(render_echo(a));
  json observations = json::array();
  for (const auto &o : step.observations)
    observations.push_back(observation_to_json(o));
  json skipped = json::array();
  for (const auto &o : step.skipped)
    skipped.push_back(observation_to_json(o));
  json classes = json::array();
  for (auto c : step.classifications)
    classes.push_back(to_string(c));
  json j = {{"turn", step.turn_index},
            {"completion", step.completion},
            {"thought", step.thought},
            {"actions", std::move(actions)},
            {"observations", std::move(observations)},
            {"skipped", std::move(skipped)},
            {"classifications", std::move(classes)},
            {"feedback", step_feedback(step)}};
  if (step.parse_error)
    j["parse_error"] = {{"fragment", step.parse_error->fragment},
                        {"message", step.parse_error->message}};
  return j;
}

json outcome_to_json(const RepairOutcome &outcome) {
  json attempts = json::array();
  for (const auto &a : outcome.attempts)
    attempts.push_back(attempt_to_json(a));
  return {{"task_id", outcome.task_id},
          {"resolved", outcome.resolved},
          {"errored", outcome.errored},
          {"error", outcome.error},
          {"final_code", outcome.final_code},
          {"attempts", std::move(attempts)},
          {"metrics", metrics_to_json(outcome.metrics)}};
}

RepairOutcome outcome_from_json(const json &j) {
  RepairOutcome o;
  o.task_id = j.at("task_id").get<std::string>();
  o.resolved = j.at("resolved").get<bool>();
  o.errored = j.value("errored", false);
  o.error = j.value("error", "");
  o.final_code = j.at("final_code").get<std::string>();
  for (const auto &a : j.at("attempts")) {
    PatchAttempt p;
    p.version = a.at("version").get<int>();
    p.code = a.at("code").get<std::string>();
    p.report = report_from(a.at("report"));
    p.test_report = report_from_json(a.at("test_report"));
    o.attempts.push_back(std::move(p));
  }
  o.metrics = metrics_from_json(j.at("metrics"));
  return o;
}

TrajectoryLog::TrajectoryLog(const std::filesystem::path &path) : path_(path) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  out_.open(path, std::ios::trunc);
  if (!out_)
    throw StorageFailure("cannot open trajectory log " + path.string());
}

void TrajectoryLog::write(const json &record) {
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_)
    throw StorageFailure("cannot append to trajectory log " + path_.string());
  ++records_;
}

void TrajectoryLog::log_turn(const std::string &task_id, int attempt, const TrajectoryStep &step) {
  json record = step_to_json(step);
  record["type"] = "turn";
  record["task_id"] = task_id;
  record["attempt"] = attempt;
  write(record);
}

void TrajectoryLog::log_attempt(const std::string &task_id, const PatchAttempt &attempt,
                                const TokenUsage &usage, int reasoning_turns) {
  json record = attempt_to_json(attempt);
  record["type"] = "attempt";
  record["task_id"] = task_id;
  record["attempt"] = attempt.version;
  record["reasoning_turns"] = reasoning_turns;
  record["usage"] = {{"input_tokens", usage.input_tokens}, {"output_tokens", usage.output_tokens}};
  write(record);
}

void TrajectoryLog::log_outcome(const RepairOutcome &outcome, const json &rollup) {
  json record = outcome_to_json(outcome);
  record.erase("attempts");
  record["type"] = "outcome";
  record["attempt_count"] = outcome.attempts.size();
  record["rollup"] = rollup;
  write(record);
}

json ActionRollup::to_json() const {
  return {{"per_verb", per_verb},
          {"inspection", inspection},
          {"modification", modification},
          {"parse_errors", parse_errors},
          {"violations", violations}};
}

ActionRollup rollup_actions(const std::vector<std::vector<TrajectoryStep>> &trajectories) {
  ActionRollup r;
  for (auto verb : {"set_breakpoint", "control_execution", "interact_code", "propose_repair"})
    r.per_verb[verb] = 0;
  for (const auto &trajectory : trajectories) {
    for (const auto &step : trajectory) {
      if (step.parse_error)
        ++r.parse_errors;
      for (const auto &a : step.actions)
        ++r.per_verb[std::string(verb_name(a))];
      for (auto c : step.classifications)
        ++(c == Interaction::Inspection ? r.inspection : r.modification);
      for (const auto &o : step.observations)
        if (o.kind == ObservationKind::Violation)
          ++r.violations;
    }
  }
  return r;
}

RepairOutcome repair(const RepairTask &task, const RepairConfig &config, RepairContext &ctx) {
  const auto started = std::chrono::steady_clock::now();
  RepairOutcome out;
  out.task_id = task.task_id;
  std::string current = task.buggy_code;
  TokenUsage usage;
  int iterations = 0;
  std::vector<std::vector<TrajectoryStep>> trajectories;

  auto finish = [&]() -> RepairOutcome {
    if (out.final_code.empty())
      out.final_code = current;
    out.metrics.input_tokens = usage.input_tokens;
    out.metrics.output_tokens = usage.output_tokens;
    out.metrics.cost = cost_of(usage, ctx.model);
    out.metrics.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out.metrics.patch_attempts = static_cast<int>(out.attempts.size());
    out.metrics.reasoning_iterations = iterations;
    out.metrics.resolved = out.resolved;
    if (ctx.log)
      ctx.log->log_outcome(out, rollup_actions(trajectories).to_json());
    return out;
  };

  try {
    TestReport initial = ctx.tests.run_tests(task.buggy_code, task, TestScope::Public, "v0");
    if (initial.passed) {
      const TestReport full = ctx.tests.run_tests(task.buggy_code, task, TestScope::Full, "v0-final");
      if (full.passed) {
        out.resolved = true;
        out.final_code = task.buggy_code;
        return finish();
      }
      initial = full;
    }
    const FailingTest initial_failure = select_focus(initial);
    FailingTest focus = initial_failure;

    for (int k = 1; k <= config.max_patch_attempts; ++k) {
      TokenUsage attempt_usage;
      LaunchSpec spec = config.launch;
      spec.workdir =
          ctx.tests.prepare_debug(current, task, focus, "v" + std::to_string(k - 1) + "-debug");
      InspectionResult inspection;
      {
        Session session(ctx.backends(), spec, config.session);
        session.open();
        inspection = run_inspection(session, task, current, focus, ctx.inspector_llm, ctx.model,
                                    ctx.assets, config.inspector, config.limits);
        session.close();
      }
      attempt_usage += inspection.usage;
      iterations += static_cast<int>(inspection.trajectory.size());
      if (ctx.log)
        for (const auto &step : inspection.trajectory)
          ctx.log->log_turn(task.task_id, k, step);
      trajectories.push_back(inspection.trajectory);

      auto messages =
          build_coder_prompt(ctx.assets, task, initial_failure, out.attempts, inspection.report);
      auto generation =
          generate_patch(ctx.coder_llm, ctx.model, config.limits, ctx.assets, std::move(messages));
      attempt_usage += generation.usage;
      usage += attempt_usage;

      PatchAttempt attempt;
      attempt.version = k;
      attempt.report = inspection.report;
      bool resolved = false;
      if (!generation.code) {
        attempt.code = current;
        attempt.test_report.passed = false;
        attempt.test_report.failures.push_back(
            {"patch-extraction", "no patch produced: " + generation.failure, ""});
      } else {
        attempt.code = *generation.code;
        TestReport report =
            ctx.tests.run_tests(attempt.code, task, TestScope::Public, "v" + std::to_string(k));
        if (report.passed) {
          TestReport full = ctx.tests.run_tests(attempt.code, task, TestScope::Full,
                                                "v" + std::to_string(k) + "-final");
          resolved = full.passed;
          report = std::move(full);
        }
        attempt.test_report = std::move(report);
        focus = resolved ? focus : select_focus(attempt.test_report);
      }
      current = attempt.code;
      out.attempts.push_back(attempt);
      if (ctx.log)
        ctx.log->log_attempt(task.task_id, attempt, attempt_usage,
                             static_cast<int>(inspection.trajectory.size()));
      if (resolved) {
        out.resolved = true;
        out.final_code = current;
        return finish();
      }
    }
    out.final_code = current;
  } catch (const Error &e) {
    out.errored = true;
    out.resolved = false;
    out.error = e.what();
    out.final_code = current;
  }
  return finish();
}

RunSummary compute_run_metrics(const std::vector<RepairOutcome> &outcomes, bool exclude_errored) {
  RunSummary s;
  for (const auto &o : outcomes) {
    s.rows.push_back({o.task_id, o.resolved, o.errored, o.metrics});
    if (o.errored)
      ++s.errored;
    if (o.errored && exclude_errored)
      continue;
    ++s.total;
    if (o.resolved)
      ++s.resolved;
    s.input_tokens += o.metrics.input_tokens;
    s.output_tokens += o.metrics.output_tokens;
    s.cost += o.metrics.cost;
    s.wall_time_seconds += o.metrics.wall_time_seconds;
  }
  if (s.total > 0)
    s.resolve_rate = static_cast<double>(s.resolved) / s.total;
  if (s.wall_time_seconds > 0)
    s.fixes_per_hour = s.resolved / (s.wall_time_seconds / 3600.0);
  if (s.cost.picos() > 0)
    s.fixes_per_dollar = s.resolved / s.cost.to_double();
  return s;
}

std::string format_percent(std::optional<double> ratio) {
  if (!ratio)
    return "n/a";
  return fmt("%.2f%%", *ratio * 100.0);
}

std::string format_number(std::optional<double> value, int decimals) {
  if (!value)
    return "n/a";
  char format[16];
  std::snprintf(format, sizeof format, "%%.%df", decimals);
  return fmt(format, *value);
}

json summary_to_json(const RunSummary &s, const ModelSpec &model) {
  auto opt = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
  json rows = json::array();
  for (const auto &r : s.rows)
    rows.push_back({{"task_id", r.task_id},
                    {"resolved", r.resolved},
                    {"errored", r.errored},
                    {"metrics", metrics_to_json(r.metrics)}});
  return {{"model", model.model_name},
          {"total", s.total},
          {"resolved", s.resolved},
          {"errored", s.errored},
          {"resolve_rate", opt(s.resolve_rate)},
          {"resolve_rate_text", format_percent(s.resolve_rate)},
          {"fixes_per_hour", opt(s.fixes_per_hour)},
          {"fixes_per_dollar", opt(s.fixes_per_dollar)},
          {"input_tokens", s.input_tokens},
          {"output_tokens", s.output_tokens},
          {"cost", s.cost.to_string()},
          {"wall_time_seconds", s.wall_time_seconds},
          {"tasks", std::move(rows)}};
}

std::string render_summary(const RunSummary &s, const ModelSpec &model) {
  std::string out;
  out += "Model:          " + model.model_name + "\n";
  out += "Tasks:          " + std::to_string(s.total) + " (errored: " + std::to_string(s.errored) +
         ")\n";
  out += "Resolved:       " + std::to_string(s.resolved) + "\n";
  out += "Resolve rate:   " + format_percent(s.resolve_rate) + "\n";
  out += "Fixes/hour:     " + format_number(s.fixes_per_hour) + "\n";
  out += "Fixes/dollar:   " + format_number(s.fixes_per_dollar) + "\n";
  out += "Input tokens:   " + std::to_string(s.input_tokens) + "\n";
  out += "Output tokens:  " + std::to_string(s.output_tokens) + "\n";
  out += "Cost (USD):     " + s.cost.to_display() + "\n";
  out += "Debug time (s): " + fmt("%.2f", s.wall_time_seconds) + "\n\n";

  char line[256];
  std::snprintf(line, sizeof line, "%-24s %-8s %-7s %8s %10s %10s %10s %14s %9s\n", "task",
                "resolved", "errored", "attempts", "iterations", "in_tokens", "out_tokens",
                "cost", "time_s");
  out += line;
  for (const auto &r : s.rows) {
    std::snprintf(line, sizeof line, "%-24s %-8s %-7s %8d %10d %10lld %10lld %14s %9.2f\n",
                  r.task_id.c_str(), r.resolved ? "yes" : "no", r.errored ? "yes" : "no",
                  r.metrics.patch_attempts, r.metrics.reasoning_iterations,
                  static_cast<long long>(r.metrics.input_tokens),
                  static_cast<long long>(r.metrics.output_tokens),
                  r.metrics.cost.to_display().c_str(), r.metrics.wall_time_seconds);
    out += line;
  }
  return out;
}

} // namespace debugrepair
