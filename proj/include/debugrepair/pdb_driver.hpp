#pragma once

#include "debugrepair/actions.hpp"
#include "debugrepair/backend.hpp"
#include "debugrepair/session_status.hpp"
#include "debugrepair/subprocess.hpp"
#include "debugrepair/wire.hpp"

#include <memory>
#include <string>
#include <vector>

namespace debugrepair {

// Debugger commands for one action. Interactive code becomes the
// open / code / close triple; propose_repair produces no traffic.
std::vector<std::string> translate(const InspectorAction &action,
                                   std::string_view test_file);

struct Collected {
  wire::WireFrame frame; // last frame received
  std::string filtered_text;
  bool interactive = false;
};

// Sends the commands (lines inside an interactive channel travel as one
// block) and filters the concatenated payloads. Silent interactive blocks
// render as kNoOutputMessage. Throws CommandTimeout, PipeClosed,
// ProtocolError.
Collected exec_and_collect(DebuggerBackend &backend,
                           const std::vector<std::string> &commands,
                           std::size_t io_limit);

// Queries the status channel. Breakpoint ids are the backend's own.
SessionStatus probe_status(DebuggerBackend &backend);

// Live backend: the debuggee interpreter running the shim, framed over a
// merged stdout/stderr pipe.
class PdbProcess final : public DebuggerBackend {
public:
  PdbProcess() = default;
  ~PdbProcess() override;

  PdbProcess(const PdbProcess &) = delete;
  PdbProcess &operator=(const PdbProcess &) = delete;

  std::string start(const LaunchSpec &spec) override;
  std::string send(std::string_view command) override;
  void kill() override;

  bool alive() const;

private:
  std::string read_frame(std::chrono::milliseconds timeout, bool handshake);

  std::unique_ptr<Subprocess> proc_;
  std::string buffer_;
  std::chrono::milliseconds timeout_{30'000};
};

// Validates the spec and launches a live backend, consuming the initial
// frame. Throws SpawnFailure / HandshakeTimeout.
std::unique_ptr<PdbProcess> spawn(const LaunchSpec &spec, std::string *initial_chunk = nullptr);

} // namespace debugrepair
