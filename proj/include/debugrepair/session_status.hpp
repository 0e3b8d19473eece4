#pragma once

#include "debugrepair/session_mode.hpp"

#include <string>
#include <vector>

namespace debugrepair {

struct Breakpoint {
  int id = 0;
  std::string file;
  int line = 0;
  int hit_count = 0;

  friend bool operator==(const Breakpoint &, const Breakpoint &) = default;
};

// index is 1-based from the outermost frame.
struct StackFrame {
  int index = 0;
  std::string function_name;
  std::string file;
  int line = 0;
  std::string source_text;

  friend bool operator==(const StackFrame &, const StackFrame &) = default;
};

struct SessionStatus {
  SessionMode mode = SessionMode::Start;
  std::vector<StackFrame> stack; // outermost first
  std::vector<Breakpoint> breakpoints;
  std::string last_event;

  friend bool operator==(const SessionStatus &, const SessionStatus &) = default;
};

} // namespace debugrepair
