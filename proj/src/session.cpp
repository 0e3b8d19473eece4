#include "debugrepair/session.hpp"

#include "debugrepair/errors.hpp"
#include "debugrepair/output_filter.hpp"
#include "debugrepair/pdb_driver.hpp"
#include "debugrepair/wire.hpp"

#include <algorithm>
#include <set>

namespace debugrepair {
namespace {

std::string reject(const InspectorAction &action, SessionMode mode, std::string_view why) {
  return render_echo(action) + " rejected in " + std::string(to_string(mode)) + " mode: " +
         std::string(why);
}

std::string first_line(std::string_view text) {
  return std::string(text.substr(0, text.find('\n')));
}

} // namespace

std::optional<Violation> validate(SessionMode mode, const InspectorAction &action) {
  if (std::holds_alternative<ProposeRepair>(action))
    return std::nullopt;

  if (mode == SessionMode::Done)
    return Violation{reject(action, mode,
                            "the debugging session is closed and no execution exists; "
                            "call propose_repair to finish")};

  if (std::holds_alternative<SetBreakpoint>(action)) {
    switch (mode) {
    case SessionMode::PostMortem:
      return Violation{reject(action, mode,
                              "cannot set breakpoints in post-mortem mode; restart first "
                              "with control_execution('restart')")};
    case SessionMode::RuntimeError:
      return Violation{reject(action, mode,
                              "cannot set breakpoints after a failed command; restart first "
                              "with control_execution('restart')")};
    default:
      return std::nullopt;
    }
  }

  if (const auto *ctl = std::get_if<ControlExecution>(&action)) {
    if (ctl->cmd == ExecCommand::Restart)
      return std::nullopt;
    switch (mode) {
    case SessionMode::PostMortem:
      return Violation{reject(action, mode,
                              "the program has already crashed and cannot continue; use "
                              "control_execution('restart')")};
    case SessionMode::RuntimeError:
      return Violation{reject(action, mode,
                              "the previous command did not complete; only "
                              "control_execution('restart') is allowed")};
    default:
      return std::nullopt;
    }
  }

  // interact_code
  switch (mode) {
  case SessionMode::Start:
    return Violation{reject(action, mode,
                            "the program is not paused anywhere yet; set a breakpoint and "
                            "call control_execution('continue') first")};
  case SessionMode::RuntimeError:
    return Violation{reject(action, mode,
                            "the previous command did not complete; restart first with "
                            "control_execution('restart')")};
  default:
    return std::nullopt;
  }
}

Session::Session(std::unique_ptr<DebuggerBackend> backend, LaunchSpec spec,
                 SessionOptions options)
    : backend_(std::move(backend)), spec_(std::move(spec)), options_(options) {}

Session::~Session() {
  if (backend_)
    backend_->kill();
}

void Session::open() {
  const auto chunk = backend_->start(spec_);
  const auto frame = wire::decode_single(chunk);
  std::vector<Breakpoint> bps;
  for (const auto &bp : frame.breakpoints)
    bps.push_back({bp.id, bp.file, bp.line, bp.hits});
  sync_breakpoints(bps);
  apply_event(SessionEvent::SessionOpened, frame.state_word);
  last_event_ = "session opened";
}

Observation Session::apply_action(const InspectorAction &action) {
  const std::string echo = render_echo(action);
  if (auto violation = validate(mode_, action))
    return make(echo, violation->explanation, ObservationKind::Violation);

  try {
    return std::visit(
        [&](const auto &a) -> Observation {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, ProposeRepair>) {
            return make(echo, "Repair plan recorded; inspection finished.");
          } else if constexpr (std::is_same_v<T, SetBreakpoint>) {
            return set_breakpoint(echo, a.line);
          } else if constexpr (std::is_same_v<T, ControlExecution>) {
            if (mode_ == SessionMode::RuntimeError)
              return respawn(echo);
            return control(echo, a.cmd);
          } else {
            return interact(echo, action);
          }
        },
        action);
  } catch (const Error &error) {
    return handle_failure(echo, error);
  }
}

Observation Session::handle_failure(const std::string &echo, const std::exception &error) {
  if (dynamic_cast<const CommandTimeout *>(&error)) {
    mark_runtime_error("command timed out");
    return make(echo,
                "Command timed out after " + std::to_string(spec_.command_timeout.count() / 1000) +
                    " s; the program may be stuck in an infinite loop. The session is now "
                    "in Runtime Error mode; use control_execution('restart').",
                ObservationKind::Timeout);
  }
  if (const auto *garbled = dynamic_cast<const ProtocolError *>(&error)) {
    mark_runtime_error("unrecognized debugger output");
    return make(echo,
                "Unrecognized debugger output; the session is now in Runtime Error mode "
                "and must be restarted. Output tail:\n" +
                    filter_output(garbled->tail(), 1024),
                ObservationKind::BackendError);
  }
  // PipeClosed, SpawnFailure, HandshakeTimeout: nothing left to talk to.
  backend_->kill();
  apply_event(SessionEvent::BackendFailure, "");
  stack_.clear();
  last_event_ = "debugger process lost";
  return make(echo,
              std::string("The debugger process is gone (") + error.what() +
                  "); the session is closed.",
              ObservationKind::BackendDead);
}

Observation Session::respawn(const std::string &echo) {
  backend_->kill();
  const auto chunk = backend_->start(spec_);
  const auto frame = wire::decode_single(chunk);
  by_backend_id_.clear();
  stack_.clear();
  apply_event(SessionEvent::RestartIssued, frame.state_word);
  last_event_ = "debugger relaunched after runtime error";
  return make(echo, "Debugger relaunched: the program is back at its first line and all "
                    "breakpoints were cleared.");
}

Observation Session::set_breakpoint(const std::string &echo, int line) {
  const auto collected =
      exec_and_collect(*backend_, translate(SetBreakpoint{line}, spec_.test_file),
                       spec_.io_limit);
  std::vector<Breakpoint> bps;
  for (const auto &bp : collected.frame.breakpoints)
    bps.push_back({bp.id, bp.file, bp.line, bp.hits});

  std::set<int> before;
  for (const auto &[backend_id, tracked] : by_backend_id_)
    before.insert(backend_id);
  sync_breakpoints(bps);

  if (auto m = mode_from_state_word(collected.frame.state_word); m && *m != mode_) {
    anomaly_ = true;
    mode_ = *m;
  } else {
    anomaly_ = false;
  }

  for (const auto &[backend_id, tracked] : by_backend_id_) {
    if (!before.contains(backend_id)) {
      last_event_ = "breakpoint b" + std::to_string(tracked.session_id) + " set";
      return make(echo, "Breakpoint b" + std::to_string(tracked.session_id) + " set at " +
                            base_name(tracked.bp.file) + ":" + std::to_string(tracked.bp.line));
    }
  }
  std::string reason = collected.filtered_text;
  if (reason.empty())
    reason = "the line is not executable";
  return make(echo, "Failed to set breakpoint at " + spec_.test_file + ":" +
                        std::to_string(line) + ": " + reason);
}

Observation Session::control(const std::string &echo, ExecCommand cmd) {
  const auto collected =
      exec_and_collect(*backend_, translate(ControlExecution{cmd}, spec_.test_file),
                       spec_.io_limit);
  const auto reported = mode_from_state_word(collected.frame.state_word);
  if (!reported)
    throw ProtocolError("unknown state word '" + collected.frame.state_word + "'",
                        collected.frame.payload);

  SessionEvent event = SessionEvent::RestartIssued;
  if (cmd == ExecCommand::Continue) {
    switch (*reported) {
    case SessionMode::PostMortem: event = SessionEvent::UncaughtException; break;
    case SessionMode::RuntimeState: event = SessionEvent::BreakpointHit; break;
    case SessionMode::Start: event = SessionEvent::ProgramExitOk; break;
    case SessionMode::Done: event = SessionEvent::BackendFailure; break;
    case SessionMode::RuntimeError:
      mark_runtime_error("debugger reported an error state");
      return make(echo, collected.filtered_text);
    }
  }

  std::vector<Breakpoint> bps;
  for (const auto &bp : collected.frame.breakpoints)
    bps.push_back({bp.id, bp.file, bp.line, bp.hits});
  const auto removed = sync_breakpoints(bps);
  apply_event(event, collected.frame.state_word);

  std::string status_event;
  if (mode_ == SessionMode::RuntimeState || mode_ == SessionMode::PostMortem) {
    const auto status = probe_status(*backend_);
    stack_ = status.stack;
    status_event = status.last_event;
  }

  switch (event) {
  case SessionEvent::BreakpointHit:
    if (!removed.empty()) {
      last_event_ = "breakpoint b" + std::to_string(removed.front()) + " hit";
    } else {
      last_event_ = "paused";
    }
    if (!stack_.empty())
      last_event_ += " at " + base_name(stack_.back().file) + ":" +
                     std::to_string(stack_.back().line);
    break;
  case SessionEvent::UncaughtException:
    last_event_ = "uncaught exception: " +
                  (status_event.empty() ? first_line(collected.filtered_text) : status_event);
    break;
  case SessionEvent::ProgramExitOk:
    last_event_ = "program finished successfully and was restarted";
    break;
  case SessionEvent::RestartIssued:
    last_event_ = "restart issued";
    break;
  default:
    last_event_ = std::string(to_string(event));
    break;
  }

  std::string body = collected.filtered_text;
  if (body.empty())
    body = cmd == ExecCommand::Restart ? "Program restarted." : "Program resumed.";
  return make(echo, std::move(body));
}

Observation Session::interact(const std::string &echo, const InspectorAction &action) {
  const auto collected =
      exec_and_collect(*backend_, translate(action, spec_.test_file), spec_.io_limit);
  const SessionMode before = mode_;
  apply_event(SessionEvent::InteractOpened, collected.frame.state_word);
  apply_event(SessionEvent::InteractClosed, collected.frame.state_word);
  if (mode_ == SessionMode::PostMortem && before != SessionMode::PostMortem)
    last_event_ = "uncaught exception raised from interactive code";
  else if (mode_ != SessionMode::PostMortem)
    last_event_ = "interactive code executed";
  return make(echo, collected.filtered_text);
}

void Session::apply_event(SessionEvent event, std::string_view backend_word) {
  const auto result = transition(mode_, event);
  mode_ = result.next;
  anomaly_ = result.anomaly;
  if (auto reported = mode_from_state_word(backend_word); reported && *reported != mode_) {
    anomaly_ = true;
    mode_ = *reported;
  }
  if (mode_ == SessionMode::Start || mode_ == SessionMode::Done)
    stack_.clear();
}

std::vector<int> Session::sync_breakpoints(const std::vector<Breakpoint> &backend_bps) {
  std::set<int> present;
  for (const auto &bp : backend_bps)
    present.insert(bp.id);

  std::vector<int> removed;
  for (auto it = by_backend_id_.begin(); it != by_backend_id_.end();) {
    if (!present.contains(it->first)) {
      removed.push_back(it->second.session_id);
      it = by_backend_id_.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto &bp : backend_bps) {
    if (by_backend_id_.contains(bp.id))
      continue;
    const int sid = next_id_++;
    by_backend_id_.emplace(bp.id, Tracked{sid, Breakpoint{sid, bp.file, bp.line, bp.hit_count}});
  }
  std::sort(removed.begin(), removed.end());
  return removed;
}

SessionStatus Session::snapshot() const {
  SessionStatus status;
  status.mode = mode_;
  if (mode_ != SessionMode::Start && mode_ != SessionMode::Done)
    status.stack = stack_;
  for (const auto &[backend_id, tracked] : by_backend_id_)
    status.breakpoints.push_back(tracked.bp);
  std::sort(status.breakpoints.begin(), status.breakpoints.end(),
            [](const Breakpoint &a, const Breakpoint &b) { return a.id < b.id; });
  status.last_event = last_event_;
  return status;
}

void Session::mark_runtime_error(std::string cause) {
  mode_ = SessionMode::RuntimeError;
  stack_.clear();
  last_event_ = std::move(cause);
}

void Session::close() {
  if (mode_ == SessionMode::Done)
    return;
  backend_->kill();
  apply_event(SessionEvent::SessionClosed, "");
  last_event_ = "session closed";
}

Observation Session::make(const std::string &echo, std::string body,
                          ObservationKind kind) const {
  return Observation{echo, truncate_output(body, options_.render_cap), mode_, kind};
}

} // namespace debugrepair
