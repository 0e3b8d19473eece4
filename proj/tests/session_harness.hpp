#pragma once

#include "debugrepair/fake_backend.hpp"
#include "debugrepair/session.hpp"
#include "debugrepair/session_mode.hpp"

#include "support.hpp"

#include <memory>
#include <string>
#include <vector>

namespace testsupport {

using namespace debugrepair;
using M = SessionMode;
using E = SessionEvent;

// Rule-based oracle, written independently of the table.
inline TransitionResult expected_transition(M mode, E event) {
  if (event == E::SessionClosed)
    return {M::Done, false};
  if (mode == M::Done)
    return {M::Done, true};
  if (event == E::BackendFailure)
    return {M::Done, false};
  if (event == E::RestartIssued)
    return {M::Start, false};
  switch (mode) {
  case M::RuntimeError:
    return {M::RuntimeError, true};
  case M::PostMortem:
    if (event == E::InteractOpened || event == E::InteractClosed)
      return {M::PostMortem, false};
    return {M::PostMortem, true};
  case M::Start:
    switch (event) {
    case E::SessionOpened: return {M::Start, false};
    case E::BreakpointHit: return {M::RuntimeState, false};
    case E::UncaughtException: return {M::PostMortem, false};
    case E::ProgramExitOk: return {M::Start, false};
    default: return {M::Start, true};
    }
  case M::RuntimeState:
    switch (event) {
    case E::SessionOpened: return {M::RuntimeState, true};
    case E::BreakpointHit: return {M::RuntimeState, false};
    case E::UncaughtException: return {M::PostMortem, false};
    case E::ProgramExitOk: return {M::Start, false};
    default: return {M::RuntimeState, false};
    }
  default:
    break;
  }
  return {mode, true};
}

inline const std::string kMarker(wire::kMarker);
inline const std::string kStatus(wire::kStatus);
inline const std::string kPath = "/w/__test__.py";

inline std::string interact_cmd(const std::string &code) {
  return std::string(wire::kInteractOpen) + "\n" + code + "\n" + std::string(wire::kInteractClose);
}

inline std::string paused_at(int line) {
  return chunk("runtime", "> " + kPath + "(" + std::to_string(line) + ")task_func()\n-> x = 1");
}

inline std::string status_at(int line) {
  return chunk("runtime", testsupport::status_payload(
                              {{1, "<module>", "__test__.py", 40, "task_func()"},
                               {2, "task_func", "__test__.py", line, "x = 1"}},
                              "paused"));
}

struct Harness {
  FakeBackend *fake = nullptr;
  std::unique_ptr<Session> session;

  explicit Harness(std::vector<TranscriptEntry> exchanges, FakeBackend::Responder r = {}) {
    auto backend = std::make_unique<FakeBackend>(Transcript{chunk("start"), std::move(exchanges)},
                                                 std::move(r));
    fake = backend.get();
    LaunchSpec spec;
    spec.workdir = "/w";
    session = std::make_unique<Session>(std::move(backend), spec);
    session->open();
  }
  Observation operator()(const InspectorAction &a) { return session->apply_action(a); }
};

inline std::vector<TranscriptEntry> reach_runtime() {
  return {{"tbreak __test__.py:26", chunk("start", "Breakpoint 1 at " + kPath + ":26",
                                         {{1, "__test__.py", 26, 0}})},
          {"continue", paused_at(26)},
          {kStatus, status_at(26)}};
}

inline std::vector<TranscriptEntry> reach_postmortem() {
  return {{"continue", chunk("postmortem",
                             "ZeroDivisionError. PDB session entering post mortem mode at "
                             "__test__.py:3\nZeroDivisionError: division by zero")},
          {kStatus, chunk("postmortem",
                          testsupport::status_payload(
                              {{1, "<module>", "__test__.py", 3, "1/0"}},
                              "ZeroDivisionError: division by zero"))}};
}

// Brings a fresh harness into `mode`.
inline std::unique_ptr<Harness> in_mode(M mode) {
  switch (mode) {
  case M::Start:
    return std::make_unique<Harness>(std::vector<TranscriptEntry>{});
  case M::RuntimeState: {
    auto h = std::make_unique<Harness>(reach_runtime());
    (*h)(SetBreakpoint{26});
    (*h)(ControlExecution{ExecCommand::Continue});
    return h;
  }
  case M::PostMortem: {
    auto h = std::make_unique<Harness>(reach_postmortem());
    (*h)(ControlExecution{ExecCommand::Continue});
    return h;
  }
  case M::RuntimeError: {
    auto h = std::make_unique<Harness>(std::vector<TranscriptEntry>{{"continue", "<timeout>"}});
    (*h)(ControlExecution{ExecCommand::Continue});
    return h;
  }
  case M::Done: {
    auto h = std::make_unique<Harness>(std::vector<TranscriptEntry>{});
    h->session->close();
    return h;
  }
  }
  return nullptr;
}

inline std::vector<InspectorAction> sample_actions() {
  return {SetBreakpoint{5},
          ControlExecution{ExecCommand::Continue},
          ControlExecution{ExecCommand::Restart},
          InteractCode{"print(x)"},
          InteractCode{"x = 1"},
          ProposeRepair{"The root cause of the bug is that x, to fix the bug, consider y"}};
}

// Legality oracle per mode, by verb.
inline bool legal(M mode, const InspectorAction &a) {
  if (std::holds_alternative<ProposeRepair>(a))
    return true;
  if (mode == M::Done)
    return false;
  if (const auto *c = std::get_if<ControlExecution>(&a); c && c->cmd == ExecCommand::Restart)
    return true;
  switch (mode) {
  case M::Start: return !std::holds_alternative<InteractCode>(a);
  case M::RuntimeState: return true;
  case M::RuntimeError: return false;
  case M::PostMortem: return std::holds_alternative<InteractCode>(a);
  default: return false;
  }
}

} // namespace testsupport
