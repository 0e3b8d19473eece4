#include "debugrepair/session_mode.hpp"

namespace debugrepair {

std::string_view to_string(SessionMode mode) {
  switch (mode) {
  case SessionMode::Start: return "Start";
  case SessionMode::RuntimeState: return "Runtime State";
  case SessionMode::RuntimeError: return "Runtime Error";
  case SessionMode::PostMortem: return "Post Mortem";
  case SessionMode::Done: return "Done";
  }
  return "?";
}

std::string_view to_string(SessionEvent event) {
  switch (event) {
  case SessionEvent::SessionOpened: return "session_opened";
  case SessionEvent::BreakpointHit: return "breakpoint_hit";
  case SessionEvent::UncaughtException: return "uncaught_exception";
  case SessionEvent::ProgramExitOk: return "program_exit_ok";
  case SessionEvent::RestartIssued: return "restart_issued";
  case SessionEvent::InteractOpened: return "interact_opened";
  case SessionEvent::InteractClosed: return "interact_closed";
  case SessionEvent::SessionClosed: return "session_closed";
  case SessionEvent::BackendFailure: return "backend_failure";
  }
  return "?";
}

std::string_view state_word(SessionMode mode) {
  switch (mode) {
  case SessionMode::Start: return "start";
  case SessionMode::RuntimeState: return "runtime";
  case SessionMode::RuntimeError: return "error";
  case SessionMode::PostMortem: return "postmortem";
  case SessionMode::Done: return "done";
  }
  return "?";
}

std::optional<SessionMode> mode_from_state_word(std::string_view word) {
  for (auto m : kAllModes)
    if (state_word(m) == word)
      return m;
  return std::nullopt;
}

namespace {

constexpr TransitionResult go(SessionMode m) { return {m, false}; }
constexpr TransitionResult stay(SessionMode m) { return {m, true}; }

using S = SessionMode;

// Columns: opened, bp_hit, exception, exit_ok, restart, i_open, i_close,
// closed, failure.
constexpr std::array<std::array<TransitionResult, 9>, 5> kTable{{
    // Start
    {go(S::Start), go(S::RuntimeState), go(S::PostMortem), go(S::Start),
     go(S::Start), stay(S::Start), stay(S::Start), go(S::Done), go(S::Done)},
    // RuntimeState
    {stay(S::RuntimeState), go(S::RuntimeState), go(S::PostMortem),
     go(S::Start), go(S::Start), go(S::RuntimeState), go(S::RuntimeState),
     go(S::Done), go(S::Done)},
    // RuntimeError: only restart, close and failure leave it.
    {stay(S::RuntimeError), stay(S::RuntimeError), stay(S::RuntimeError),
     stay(S::RuntimeError), go(S::Start), stay(S::RuntimeError),
     stay(S::RuntimeError), go(S::Done), go(S::Done)},
    // PostMortem: inspection is allowed, execution is not.
    {stay(S::PostMortem), stay(S::PostMortem), stay(S::PostMortem),
     stay(S::PostMortem), go(S::Start), go(S::PostMortem), go(S::PostMortem),
     go(S::Done), go(S::Done)},
    // Done is absorbing.
    {stay(S::Done), stay(S::Done), stay(S::Done), stay(S::Done),
     stay(S::Done), stay(S::Done), stay(S::Done), go(S::Done), stay(S::Done)},
}};

} // namespace

const std::array<std::array<TransitionResult, kAllEvents.size()>, kAllModes.size()> &
transition_table() {
  return kTable;
}

TransitionResult transition(SessionMode mode, SessionEvent event) {
  return kTable[static_cast<std::size_t>(mode)][static_cast<std::size_t>(event)];
}

} // namespace debugrepair
