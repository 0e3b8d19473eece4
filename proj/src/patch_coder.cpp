#include "debugrepair/patch_coder.hpp"

#include "debugrepair/errors.hpp"
#include "debugrepair/output_filter.hpp"
#include "debugrepair/subprocess.hpp"
#include "debugrepair/wire.hpp"

#include <json.hpp>

#include <cassert>
#include <fstream>

namespace debugrepair {

using nlohmann::json;

namespace {

std::string version_error(const TestReport &report) {
  if (report.failures.empty())
    return report.passed ? "All tests passed." : "Tests failed without a recorded error.";
  return format_failure(report.failures.front());
}

void append_version(std::string &out, int version, const std::string &code,
                    const std::string &error, const std::string &plan) {
  out += "\n## Code Version " + std::to_string(version) + "\n```python\n" + code;
  if (!code.empty() && code.back() != '\n')
    out += '\n';
  out += "```\n### Stack Trace and Error:\n" + error + "\n### Repair Plan:\n" + plan + "\n";
}

std::string ltrim_copy(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
    ++i;
  return std::string(s.substr(i));
}

std::string rtrim_copy(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.pop_back();
  return s;
}

} // namespace

std::vector<ChatMessage> build_coder_prompt(const PromptAssets &assets, const RepairTask &task,
                                            const FailingTest &initial_failure,
                                            const std::vector<PatchAttempt> &attempts,
                                            const RootCauseReport &report) {
  std::string user = "# Coding Task\n" + task.requirement + "\n";
  const auto plan_after = [&](std::size_t index) {
    // Plan written after version `index`: the report behind the next version.
    return index < attempts.size() ? attempts[index].report.render() : report.render();
  };
  append_version(user, 0, task.buggy_code, format_failure(initial_failure), plan_after(0));
  for (std::size_t i = 0; i < attempts.size(); ++i)
    append_version(user, attempts[i].version, attempts[i].code,
                   version_error(attempts[i].test_report), plan_after(i + 1));
  while (!user.empty() && user.back() == '\n')
    user.pop_back();
  return {{"system", assets.coder_system}, {"user", std::move(user)}};
}

std::string extract_patch(std::string_view completion) {
  std::optional<std::string> last;
  std::string current;
  bool inside = false;
  std::size_t pos = 0;
  while (pos <= completion.size()) {
    auto nl = completion.find('\n', pos);
    if (nl == std::string_view::npos)
      nl = completion.size();
    const std::string line(completion.substr(pos, nl - pos));
    const std::string stripped = rtrim_copy(ltrim_copy(line));
    if (!inside) {
      if (stripped.rfind("```", 0) == 0) {
        inside = true;
        current.clear();
      }
    } else if (stripped == "```") {
      inside = false;
      last = current;
    } else {
      current += line;
      current += '\n';
    }
    pos = nl + 1;
  }
  if (inside && !current.empty())
    last = current; // unterminated trailing block
  if (!last || last->find_first_not_of(" \t\r\n") == std::string::npos)
    throw ExtractionError("no fenced code block in the completion");
  return *last;
}

PatchGeneration generate_patch(LlmClient &llm, const ModelSpec &model, const ChatLimits &limits,
                               const PromptAssets &assets, std::vector<ChatMessage> messages) {
  PatchGeneration gen;
  for (int round = 0; round < 2; ++round) {
    const auto exchange = chat_fitting(llm, messages, model, limits);
    gen.usage += exchange.usage;
    ++gen.llm_calls;
    try {
      gen.code = extract_patch(exchange.completion);
      return gen;
    } catch (const ExtractionError &e) {
      gen.failure = e.what();
      messages.push_back({"assistant", exchange.completion});
      messages.push_back({"user", assets.coder_reprompt});
    }
  }
  return gen;
}

const FailingTest &select_focus(const TestReport &report) {
  assert(!report.passed && !report.failures.empty());
  return report.failures.front();
}

TestReport parse_test_output(std::string_view output, const std::vector<std::string> &expected,
                             bool timed_out, std::size_t output_cap) {
  const std::string prefix = std::string(wire::kMarker) + " test-result ";
  std::map<std::string, FailingTest> failed;
  std::map<std::string, bool> seen;
  std::vector<std::string> order;
  std::string plain;

  std::size_t pos = 0;
  while (pos < output.size()) {
    auto nl = output.find('\n', pos);
    if (nl == std::string_view::npos)
      nl = output.size();
    const auto line = output.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.rfind(prefix, 0) == 0) {
      try {
        const auto rec = json::parse(line.substr(prefix.size()));
        const auto name = rec.at("name").get<std::string>();
        if (seen.count(name))
          continue;
        seen[name] = rec.at("passed").get<bool>();
        order.push_back(name);
        if (!seen[name]) {
          FailingTest f;
          f.name = name;
          f.error_message = rec.value("error", "");
          f.stack_trace = rec.value("trace", "");
          if (f.error_message.empty())
            f.error_message = "test failed";
          failed[name] = std::move(f);
        }
        continue;
      } catch (const json::exception &) {
        // fall through: keep the line as plain output
      }
    }
    plain.append(line);
    plain += '\n';
  }

  // Last non-empty plain line: typically the interpreter's error summary.
  std::string last_line;
  {
    std::size_t end = plain.size();
    while (end > 0 && last_line.empty()) {
      const auto nl = end >= 2 ? plain.rfind('\n', end - 2) : std::string::npos;
      const std::size_t begin = nl == std::string::npos ? 0 : nl + 1;
      last_line = rtrim_copy(plain.substr(begin, end - 1 - begin));
      end = begin;
    }
  }

  TestReport report;
  report.timed_out = timed_out;
  report.raw_output = truncate_output(output, output_cap);
  bool first_missing = true;
  auto add_missing = [&](const std::string &name) {
    FailingTest f;
    f.name = name;
    if (timed_out) {
      f.error_message = first_missing ? "TimeoutError: test suite exceeded its time limit"
                                      : "not run: the test suite was stopped";
    } else {
      f.error_message = last_line.empty() ? "no result reported for this test" : last_line;
      f.stack_trace = truncate_output(plain, 4096);
    }
    first_missing = false;
    report.failures.push_back(std::move(f));
  };

  // Declaration order: expected names first, then anything extra.
  for (const auto &name : expected) {
    if (auto it = seen.find(name); it != seen.end()) {
      if (!it->second)
        report.failures.push_back(failed[name]);
    } else {
      add_missing(name);
    }
  }
  for (const auto &name : order)
    if (std::find(expected.begin(), expected.end(), name) == expected.end() && !seen[name])
      report.failures.push_back(failed[name]);
  if (expected.empty() && order.empty())
    add_missing("<suite>");
  report.passed = report.failures.empty();
  return report;
}

ShimTestRunner::ShimTestRunner(ShimCommand shim, std::filesystem::path run_root, TestLimits limits)
    : shim_(std::move(shim)), run_root_(std::move(run_root)), limits_(limits) {}

std::filesystem::path ShimTestRunner::fresh_dir(const RepairTask &task,
                                                const std::string &label) const {
  const auto dir = run_root_ / task.task_id / label;
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw HarnessFailure("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

namespace {

std::vector<std::string> parse_names(std::string_view output) {
  const std::string prefix = std::string(wire::kMarker) + " tests ";
  std::size_t pos = 0;
  while (pos < output.size()) {
    auto nl = output.find('\n', pos);
    if (nl == std::string_view::npos)
      nl = output.size();
    const auto line = output.substr(pos, nl - pos);
    if (line.rfind(prefix, 0) == 0)
      return json::parse(line.substr(prefix.size())).get<std::vector<std::string>>();
    pos = nl + 1;
  }
  throw HarnessFailure("shim did not report the encapsulated test names: " +
                       std::string(output.substr(0, 500)));
}

} // namespace

void ShimTestRunner::encapsulate(const std::filesystem::path &dir, const std::string &code,
                                 const RepairTask &task, TestScope scope,
                                 const std::string &focus) const {
  json spec = task_to_json(task);
  spec["code"] = code;
  if (scope == TestScope::Public && !task.public_subset.empty())
    spec["select"] = task.public_subset;
  if (!focus.empty())
    spec["focus"] = focus;
  {
    std::ofstream out(dir / "task.json");
    out << spec.dump();
    if (!out)
      throw HarnessFailure("cannot write " + (dir / "task.json").string());
  }
  auto argv = shim_.interpreter_argv;
  argv.insert(argv.end(), {"--encapsulate", "task.json", "--file", "__test__.py", "--marker",
                           std::string(wire::kMarker)});
  CaptureResult res;
  try {
    res = run_capture(argv, dir, limits_.per_suite, limits_.output_cap);
  } catch (const SpawnFailure &e) {
    throw HarnessFailure(std::string("cannot start the shim: ") + e.what());
  }
  if (res.timed_out || res.exit_code != 0)
    throw HarnessFailure("test encapsulation failed (exit " + std::to_string(res.exit_code) +
                         "): " + truncate_output(res.output, 2000));
  std::ofstream(dir / "tests.txt") << json(parse_names(res.output)).dump();
}

TestReport ShimTestRunner::run_tests(const std::string &code, const RepairTask &task,
                                     TestScope scope, const std::string &label) {
  const auto dir = fresh_dir(task, label);
  encapsulate(dir, code, task, scope, "");
  std::vector<std::string> names;
  {
    std::ifstream in(dir / "tests.txt");
    names = json::parse(in).get<std::vector<std::string>>();
  }
  auto argv = shim_.interpreter_argv;
  const auto per_test_s = std::max<long long>(
      1, std::chrono::duration_cast<std::chrono::seconds>(limits_.per_test).count());
  argv.insert(argv.end(), {"--run", "--file", "__test__.py", "--marker",
                           std::string(wire::kMarker), "--test-timeout",
                           std::to_string(per_test_s)});
  CaptureResult res;
  try {
    res = run_capture(argv, dir, limits_.per_suite + limits_.grace, limits_.output_cap);
  } catch (const SpawnFailure &e) {
    throw HarnessFailure(std::string("cannot start the shim: ") + e.what());
  }
  return parse_test_output(res.output, names, res.timed_out, limits_.output_cap);
}

std::filesystem::path ShimTestRunner::prepare_debug(const std::string &code,
                                                    const RepairTask &task,
                                                    const FailingTest &focus,
                                                    const std::string &label) {
  const auto dir = fresh_dir(task, label);
  encapsulate(dir, code, task, TestScope::Public, focus.name);
  return dir;
}

} // namespace debugrepair
