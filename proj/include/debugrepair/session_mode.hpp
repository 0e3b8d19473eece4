#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace debugrepair {

// Debugger session modes tracked by the middleware.
enum class SessionMode {
  Start,
  RuntimeState,
  RuntimeError,
  PostMortem,
  Done,
};

inline constexpr std::array<SessionMode, 5> kAllModes{
    SessionMode::Start, SessionMode::RuntimeState, SessionMode::RuntimeError,
    SessionMode::PostMortem, SessionMode::Done};

enum class SessionEvent {
  SessionOpened,
  BreakpointHit,
  UncaughtException,
  ProgramExitOk,
  RestartIssued,
  InteractOpened,
  InteractClosed,
  SessionClosed,
  BackendFailure,
};

inline constexpr std::array<SessionEvent, 9> kAllEvents{
    SessionEvent::SessionOpened,  SessionEvent::BreakpointHit,
    SessionEvent::UncaughtException, SessionEvent::ProgramExitOk,
    SessionEvent::RestartIssued,  SessionEvent::InteractOpened,
    SessionEvent::InteractClosed, SessionEvent::SessionClosed,
    SessionEvent::BackendFailure};

struct TransitionResult {
  SessionMode next;
  // Set when the (mode, event) pair is not expected; next == the input mode.
  bool anomaly = false;

  friend bool operator==(const TransitionResult &, const TransitionResult &) = default;
};

// Display name ("Start", "Runtime State", ...).
std::string_view to_string(SessionMode mode);
std::string_view to_string(SessionEvent event);

// Short machine word used on the wire ("start", "runtime", ...).
std::string_view state_word(SessionMode mode);
std::optional<SessionMode> mode_from_state_word(std::string_view word);

// The full transition table, row per mode in kAllModes order, column per
// event in kAllEvents order. Exported so tests can enumerate it.
const std::array<std::array<TransitionResult, kAllEvents.size()>, kAllModes.size()> &
transition_table();

// Total over every (mode, event) pair.
TransitionResult transition(SessionMode mode, SessionEvent event);

} // namespace debugrepair
