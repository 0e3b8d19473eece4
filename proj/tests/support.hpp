#pragma once

#include "debugrepair/fake_backend.hpp"
#include "debugrepair/session_status.hpp"
#include "debugrepair/wire.hpp"

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

namespace testsupport {

inline std::filesystem::path fixture(const std::string &name) {
  return std::filesystem::path(DEBUGREPAIR_FIXTURE_DIR) / name;
}

inline std::string python() {
#ifdef DEBUGREPAIR_PYTHON
  return DEBUGREPAIR_PYTHON;
#else
  return "python3";
#endif
}

inline std::string stub_shim() { return fixture("stub_shim.py").string(); }

// Backend chunk as the shim would print it.
inline std::string chunk(std::string_view state, std::string_view payload = "",
                         std::vector<debugrepair::wire::WireBreakpoint> bps = {}) {
  return debugrepair::wire::encode_frame(
      {std::string(state), std::move(bps), std::string(payload)});
}

inline std::string status_payload(const std::vector<debugrepair::StackFrame> &frames,
                                  std::string_view event) {
  return debugrepair::wire::format_status_payload({frames, std::string(event)});
}

// The three-frame status shown while paused inside task_func.
inline debugrepair::SessionStatus paused_status() {
  debugrepair::SessionStatus s;
  s.mode = debugrepair::SessionMode::RuntimeState;
  s.stack = {{1, "<module>", "__test__.py", 95, "testcases.test_case_2()"},
             {2, "test_case_2", "__test__.py", 66, "result = task_func(...)"},
             {3, "task_func", "__test__.py", 38, "if not matching_files:"}};
  s.breakpoints = {{1, "__test__.py", 38, 0}};
  s.last_event = "breakpoint b1 set";
  return s;
}

inline std::filesystem::path temp_dir(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("debugrepair-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace testsupport
