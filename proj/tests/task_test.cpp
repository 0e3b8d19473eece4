#include "debugrepair/errors.hpp"
#include "debugrepair/task.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace debugrepair;
using nlohmann::json;

namespace {

std::filesystem::path write_lines(const std::string &name, const std::vector<std::string> &lines) {
  const auto path = testsupport::temp_dir(name) / "tasks.jsonl";
  std::ofstream out(path);
  for (const auto &l : lines)
    out << l << "\n";
  return path;
}

const std::string kGood =
    R"({"task_id":"a","requirement":"r","buggy_code":"x = 1\n","tests":{"source":"import unittest\nclass T(unittest.TestCase):\n    def test_a(self): pass\n"}})";

} // namespace

TEST(Tasks, FixtureFileLoads) {
  const auto loaded = load_tasks(testsupport::fixture("tasks.jsonl"));
  ASSERT_EQ(loaded.tasks.size(), 12u);
  EXPECT_TRUE(loaded.skipped.empty());
  int unittest = 0, pytest = 0, io = 0;
  for (const auto &t : loaded.tasks) {
    EXPECT_FALSE(t.buggy_code.empty());
    switch (t.tests.framework) {
    case TestFramework::Unittest: ++unittest; break;
    case TestFramework::Pytest: ++pytest; break;
    case TestFramework::Io: ++io; break;
    }
  }
  EXPECT_EQ(unittest, 5);
  EXPECT_EQ(pytest, 4);
  EXPECT_EQ(io, 3);
  EXPECT_EQ(loaded.tasks[2].public_subset,
            (std::vector<std::string>{"test_plain", "test_duplicates"}));
}

TEST(Tasks, MissingBuggyCodeNamesFieldAndLine) {
  const auto path = write_lines(
      "schema", {kGood, R"({"task_id":"b","requirement":"r","tests":{"source":"def test_x(): pass"}})"});
  try {
    load_tasks(path);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError &e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("buggy_code"), std::string::npos);
  }
}

TEST(Tasks, SkipBadRecordsWhenAsked) {
  const auto path = write_lines("skip", {"{not json", kGood, R"({"task_id":"c"})"});
  const auto loaded = load_tasks(path, LoadOptions{true});
  ASSERT_EQ(loaded.tasks.size(), 1u);
  EXPECT_EQ(loaded.tasks[0].task_id, "a");
  EXPECT_EQ(loaded.skipped.size(), 2u);
}

TEST(Tasks, DuplicateIdsRejected) {
  EXPECT_THROW(load_tasks(write_lines("dup", {kGood, kGood})), SchemaError);
}

TEST(Tasks, BlankLinesIgnoredAndMissingFileFails) {
  const auto loaded = load_tasks(write_lines("blank", {"", kGood, "   "}));
  EXPECT_EQ(loaded.tasks.size(), 1u);
  EXPECT_THROW(load_tasks("/nonexistent/tasks.jsonl"), StorageFailure);
}

TEST(Tasks, FrameworkInference) {
  auto base = json::parse(kGood);
  EXPECT_EQ(task_from_json(base).tests.framework, TestFramework::Unittest);
  base["tests"] = {{"source", "def test_plain():\n    assert True\n"}};
  EXPECT_EQ(task_from_json(base).tests.framework, TestFramework::Pytest);
  base["tests"] = {{"cases", {{{"input", "1\n"}, {"output", "1\n"}}}}};
  const auto io = task_from_json(base);
  EXPECT_EQ(io.tests.framework, TestFramework::Io);
  EXPECT_EQ(io.tests.cases, (std::vector<IoCase>{{"1\n", "1\n"}}));
  base["tests"] = {{"framework", "nose"}, {"source", "x"}};
  EXPECT_THROW(task_from_json(base), SchemaError);
}

TEST(Tasks, JsonRoundTrip) {
  for (const auto &t : load_tasks(testsupport::fixture("tasks.jsonl")).tasks)
    EXPECT_EQ(task_from_json(task_to_json(t)), t) << t.task_id;
}

TEST(Tasks, PathLikeIdsRejected) {
  auto rec = json::parse(kGood);
  rec["task_id"] = "../escape";
  EXPECT_THROW(task_from_json(rec), SchemaError);
}

TEST(Reports, JsonRoundTripAndFormatting) {
  TestReport r;
  r.failures.push_back({"test_a", "AssertionError: 1 != 2", "Traceback (most recent call last):"});
  r.raw_output = "out";
  r.timed_out = true;
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
  const auto text = format_failure(r.failures[0]);
  EXPECT_LT(text.find("Traceback"), text.find("AssertionError: 1 != 2"));
}
