#include "debugrepair/task.hpp"

#include "debugrepair/errors.hpp"

#include <fstream>
#include <set>

namespace debugrepair {

using nlohmann::json;

std::string_view to_string(TestFramework framework) {
  switch (framework) {
  case TestFramework::Unittest: return "unittest";
  case TestFramework::Pytest: return "pytest";
  case TestFramework::Io: return "io";
  }
  return "?";
}

std::optional<TestFramework> framework_from_string(std::string_view name) {
  if (name == "unittest")
    return TestFramework::Unittest;
  if (name == "pytest")
    return TestFramework::Pytest;
  if (name == "io")
    return TestFramework::Io;
  return std::nullopt;
}

std::string format_failure(const FailingTest &failure) {
  if (failure.stack_trace.empty())
    return failure.error_message;
  if (failure.stack_trace.find(failure.error_message) != std::string::npos)
    return failure.stack_trace;
  std::string out = failure.stack_trace;
  if (!out.empty() && out.back() != '\n')
    out += '\n';
  return out + failure.error_message;
}

namespace {

struct FieldError {
  std::string message;
};

const json &require(const json &obj, const char *field, const char *where = "") {
  if (!obj.contains(field) || obj.at(field).is_null())
    throw FieldError{std::string("missing field '") + where + field + "'"};
  return obj.at(field);
}

std::string require_string(const json &obj, const char *field, const char *where = "") {
  const auto &v = require(obj, field, where);
  if (!v.is_string())
    throw FieldError{std::string("field '") + where + field + "' must be a string"};
  return v.get<std::string>();
}

bool mentions_testcase_class(const std::string &source) {
  return source.find("unittest.TestCase") != std::string::npos ||
         source.find("(TestCase)") != std::string::npos;
}

RepairTask parse_record(const json &record) {
  if (!record.is_object())
    throw FieldError{"record is not a JSON object"};
  RepairTask task;
  task.task_id = require_string(record, "task_id");
  if (task.task_id.empty() || task.task_id.find_first_of("/\\") != std::string::npos ||
      task.task_id == "." || task.task_id == "..")
    throw FieldError{"field 'task_id' must be a non-empty name without path separators"};
  task.requirement = require_string(record, "requirement");
  task.buggy_code = require_string(record, "buggy_code");
  if (task.buggy_code.empty())
    throw FieldError{"field 'buggy_code' is empty"};

  const auto &tests = require(record, "tests");
  if (!tests.is_object())
    throw FieldError{"field 'tests' must be an object"};

  std::optional<TestFramework> framework;
  if (tests.contains("framework") && !tests.at("framework").is_null()) {
    const auto &fw = tests.at("framework");
    if (!fw.is_string() || !(framework = framework_from_string(fw.get<std::string>())))
      throw FieldError{"field 'tests.framework' must be one of unittest, pytest, io"};
  }

  if (tests.contains("cases") && !tests.at("cases").is_null()) {
    const auto &cases = tests.at("cases");
    if (!cases.is_array() || cases.empty())
      throw FieldError{"field 'tests.cases' must be a non-empty array"};
    for (const auto &c : cases) {
      if (!c.is_object())
        throw FieldError{"each entry of 'tests.cases' must be an object"};
      IoCase io;
      io.input = require_string(c, "input", "tests.cases[].");
      io.expected_output = require_string(c, "output", "tests.cases[].");
      task.tests.cases.push_back(std::move(io));
    }
    if (!framework)
      framework = TestFramework::Io;
  }
  if (tests.contains("source") && !tests.at("source").is_null()) {
    task.tests.source = require_string(tests, "source", "tests.");
    if (!framework)
      framework = mentions_testcase_class(task.tests.source) ? TestFramework::Unittest
                                                              : TestFramework::Pytest;
  }
  if (!framework)
    throw FieldError{"missing field 'tests.source' or 'tests.cases'"};
  task.tests.framework = *framework;
  if (task.tests.framework == TestFramework::Io && task.tests.cases.empty())
    throw FieldError{"io tests need a non-empty 'tests.cases'"};
  if (task.tests.framework != TestFramework::Io && task.tests.source.empty())
    throw FieldError{"field 'tests.source' is empty"};

  if (record.contains("public_subset") && !record.at("public_subset").is_null()) {
    const auto &subset = record.at("public_subset");
    if (!subset.is_array())
      throw FieldError{"field 'public_subset' must be an array of test names"};
    for (const auto &name : subset) {
      if (!name.is_string())
        throw FieldError{"field 'public_subset' must be an array of test names"};
      task.public_subset.push_back(name.get<std::string>());
    }
  }
  if (record.contains("entry_point") && !record.at("entry_point").is_null()) {
    if (!record.at("entry_point").is_string())
      throw FieldError{"field 'entry_point' must be a string"};
    task.entry_point = record.at("entry_point").get<std::string>();
  }
  return task;
}

} // namespace

RepairTask task_from_json(const json &record) {
  try {
    return parse_record(record);
  } catch (const FieldError &e) {
    throw SchemaError(e.message, 0);
  }
}

json task_to_json(const RepairTask &task) {
  json tests = {{"framework", to_string(task.tests.framework)}};
  if (task.tests.framework == TestFramework::Io) {
    json cases = json::array();
    for (const auto &c : task.tests.cases)
      cases.push_back({{"input", c.input}, {"output", c.expected_output}});
    tests["cases"] = std::move(cases);
  } else {
    tests["source"] = task.tests.source;
  }
  json j = {{"task_id", task.task_id},
            {"requirement", task.requirement},
            {"buggy_code", task.buggy_code},
            {"tests", std::move(tests)}};
  if (!task.public_subset.empty())
    j["public_subset"] = task.public_subset;
  if (!task.entry_point.empty())
    j["entry_point"] = task.entry_point;
  return j;
}

LoadResult load_tasks(const std::filesystem::path &path, LoadOptions options) {
  std::ifstream in(path);
  if (!in)
    throw StorageFailure("cannot read task file " + path.string());

  LoadResult result;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::string message;
    try {
      auto task = parse_record(json::parse(line));
      if (!seen.insert(task.task_id).second)
        throw FieldError{"duplicate task_id '" + task.task_id + "'"};
      result.tasks.push_back(std::move(task));
      continue;
    } catch (const FieldError &e) {
      message = e.message;
    } catch (const json::exception &e) {
      message = std::string("malformed JSON: ") + e.what();
    }
    const std::string full = path.filename().string() + ":" + std::to_string(line_no) + ": " + message;
    if (!options.skip_bad_records)
      throw SchemaError(full, line_no);
    result.skipped.push_back(full);
  }
  return result;
}

json report_to_json(const TestReport &report) {
  json failures = json::array();
  for (const auto &f : report.failures)
    failures.push_back(
        {{"name", f.name}, {"error_message", f.error_message}, {"stack_trace", f.stack_trace}});
  return {{"passed", report.passed},
          {"failures", std::move(failures)},
          {"raw_output", report.raw_output},
          {"timed_out", report.timed_out}};
}

TestReport report_from_json(const json &j) {
  TestReport r;
  r.passed = j.at("passed").get<bool>();
  for (const auto &f : j.at("failures"))
    r.failures.push_back({f.at("name").get<std::string>(), f.at("error_message").get<std::string>(),
                          f.at("stack_trace").get<std::string>()});
  r.raw_output = j.value("raw_output", "");
  r.timed_out = j.value("timed_out", false);
  return r;
}

} // namespace debugrepair
