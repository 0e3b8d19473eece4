#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace debugrepair {

struct LaunchSpec {
  std::filesystem::path workdir;
  std::string test_file = "__test__.py";
  // Interpreter plus shim, e.g. {"python3", "-u", "shim.py"}; the driver
  // appends --marker and --file.
  std::vector<std::string> interpreter_argv;
  std::chrono::milliseconds command_timeout{30'000};
  std::size_t io_limit = 8 * 1024;
};

// Raw transport to a debuggee. Every call returns one sentinel-terminated
// transcript chunk or throws (CommandTimeout, PipeClosed, SpawnFailure,
// HandshakeTimeout).
class DebuggerBackend {
public:
  virtual ~DebuggerBackend() = default;

  // Launches the debuggee; returns the initial paused-at-first-line chunk.
  virtual std::string start(const LaunchSpec &spec) = 0;

  // Sends one command (possibly multi-line, e.g. an interactive-channel
  // block) and returns the response chunk.
  virtual std::string send(std::string_view command) = 0;

  virtual void kill() = 0;
};

} // namespace debugrepair
