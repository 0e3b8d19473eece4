#pragma once

#include "debugrepair/session_mode.hpp"

#include <string>

namespace debugrepair {

enum class ObservationKind {
  Executed,    // delegated to the backend (or handled locally) normally
  Violation,   // rejected by validate(); session state untouched
  Timeout,     // backend command timed out; session now in Runtime Error
  BackendDead, // backend process gone; session now Done
  BackendError, // unreadable backend output; session now in Runtime Error
  ParseError,  // the completion could not be parsed into actions
  Skipped,     // not run because an earlier action in the turn failed
};

std::string_view to_string(ObservationKind kind);

struct Observation {
  std::string action_echo;
  std::string body;
  SessionMode resulting_mode = SessionMode::Start;
  ObservationKind kind = ObservationKind::Executed;

  friend bool operator==(const Observation &, const Observation &) = default;
};

} // namespace debugrepair
