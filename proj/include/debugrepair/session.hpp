#pragma once

#include "debugrepair/actions.hpp"
#include "debugrepair/backend.hpp"
#include "debugrepair/observation.hpp"
#include "debugrepair/session_status.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>

namespace debugrepair {

struct Violation {
  std::string explanation;
};

// Empty optional means the action is legal in `mode`. Pure.
std::optional<Violation> validate(SessionMode mode, const InspectorAction &action);

struct SessionOptions {
  // Cap on Observation::body, in bytes.
  std::size_t render_cap = 8 * 1024;
};

// One debugging session over a DebuggerBackend. Single consumer: callers
// serialize access.
class Session {
public:
  Session(std::unique_ptr<DebuggerBackend> backend, LaunchSpec spec,
          SessionOptions options = {});
  ~Session();

  Session(const Session &) = delete;
  Session &operator=(const Session &) = delete;

  // Launches the backend. Throws SpawnFailure / HandshakeTimeout /
  // ProtocolError.
  void open();

  // Validates, executes and reports. Never throws for debuggee trouble:
  // timeouts, dead backends and garbled output come back as observations
  // with the session mode updated.
  Observation apply_action(const InspectorAction &action);

  SessionStatus snapshot() const;
  SessionMode mode() const noexcept { return mode_; }

  // Set when the last backend-reported state disagreed with the transition
  // table; the backend's state wins.
  bool last_transition_anomalous() const noexcept { return anomaly_; }

  // Moves to Runtime Error (command timeout, unreadable backend output).
  // Only restart or close are accepted afterwards.
  void mark_runtime_error(std::string cause);

  void close();
  bool closed() const noexcept { return mode_ == SessionMode::Done; }

  const LaunchSpec &launch_spec() const noexcept { return spec_; }

private:
  struct Tracked {
    int session_id;
    Breakpoint bp; // bp.id holds the session id
  };

  Observation respawn(const std::string &echo);
  Observation set_breakpoint(const std::string &echo, int line);
  Observation control(const std::string &echo, ExecCommand cmd);
  Observation interact(const std::string &echo, const InspectorAction &action);
  Observation handle_failure(const std::string &echo, const std::exception &error);

  void apply_event(SessionEvent event, std::string_view backend_word);
  // Mirrors the backend's breakpoint list; returns removed session ids.
  std::vector<int> sync_breakpoints(const std::vector<Breakpoint> &backend_bps);
  Observation make(const std::string &echo, std::string body,
                   ObservationKind kind = ObservationKind::Executed) const;

  std::unique_ptr<DebuggerBackend> backend_;
  LaunchSpec spec_;
  SessionOptions options_;

  SessionMode mode_ = SessionMode::Start;
  bool anomaly_ = false;
  std::vector<StackFrame> stack_;
  std::string last_event_;
  std::map<int, Tracked> by_backend_id_;
  int next_id_ = 1;
};

} // namespace debugrepair
