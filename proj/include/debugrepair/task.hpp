#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace debugrepair {

enum class TestFramework { Unittest, Pytest, Io };

std::string_view to_string(TestFramework framework);
std::optional<TestFramework> framework_from_string(std::string_view name);

struct IoCase {
  std::string input;
  std::string expected_output;
  friend bool operator==(const IoCase &, const IoCase &) = default;
};

struct TestSuite {
  TestFramework framework = TestFramework::Unittest;
  std::string source;         // unittest / pytest
  std::vector<IoCase> cases;  // io
  friend bool operator==(const TestSuite &, const TestSuite &) = default;
};

struct RepairTask {
  std::string task_id;
  std::string requirement;
  std::string buggy_code;
  TestSuite tests;
  // Test names visible while debugging; empty means the whole suite.
  std::vector<std::string> public_subset;
  std::string entry_point;
  friend bool operator==(const RepairTask &, const RepairTask &) = default;
};

struct FailingTest {
  std::string name;
  std::string error_message;
  std::string stack_trace;
  friend bool operator==(const FailingTest &, const FailingTest &) = default;
};

struct TestReport {
  bool passed = false;
  std::vector<FailingTest> failures; // execution order
  std::string raw_output;
  bool timed_out = false;
  friend bool operator==(const TestReport &, const TestReport &) = default;
};

// Stack trace followed by the error line, as shown to both agents.
std::string format_failure(const FailingTest &failure);

// Task file records (one JSON object per line):
//   {task_id, requirement, buggy_code,
//    tests: {framework?, source | cases: [{input, output}]},
//    public_subset?, entry_point?}
// A missing framework is inferred: cases -> io, a TestCase class ->
// unittest, otherwise pytest.
RepairTask task_from_json(const nlohmann::json &record);
nlohmann::json task_to_json(const RepairTask &task);

struct LoadOptions {
  bool skip_bad_records = false;
};

struct LoadResult {
  std::vector<RepairTask> tasks;
  std::vector<std::string> skipped; // one message per skipped record
};

// Throws SchemaError (1-based line number) for the first bad record unless
// skipping is enabled, and StorageFailure when the file cannot be read.
LoadResult load_tasks(const std::filesystem::path &path, LoadOptions options = {});

nlohmann::json report_to_json(const TestReport &report);
TestReport report_from_json(const nlohmann::json &j);

} // namespace debugrepair
