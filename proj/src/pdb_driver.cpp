#include "debugrepair/pdb_driver.hpp"

#include "debugrepair/errors.hpp"
#include "debugrepair/output_filter.hpp"

#include <filesystem>

namespace debugrepair {
namespace {

std::string tail_of(std::string_view s, std::size_t n = 512) {
  return std::string(s.size() > n ? s.substr(s.size() - n) : s);
}

} // namespace

std::vector<std::string> translate(const InspectorAction &action,
                                   std::string_view test_file) {
  return std::visit(
      [&](const auto &a) -> std::vector<std::string> {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SetBreakpoint>) {
          // tbreak: the debugger deletes it on first hit.
          return {"tbreak " + std::string(test_file) + ":" + std::to_string(a.line)};
        } else if constexpr (std::is_same_v<T, ControlExecution>) {
          return {std::string(to_string(a.cmd))};
        } else if constexpr (std::is_same_v<T, InteractCode>) {
          return {std::string(wire::kInteractOpen), wire::escape(a.code),
                  std::string(wire::kInteractClose)};
        } else {
          return {};
        }
      },
      action);
}

Collected exec_and_collect(DebuggerBackend &backend,
                           const std::vector<std::string> &commands,
                           std::size_t io_limit) {
  Collected result;
  std::string payload;
  bool any = false;

  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::string block = commands[i];
    if (commands[i] == wire::kInteractOpen) {
      result.interactive = true;
      while (++i < commands.size()) {
        block += '\n';
        block += commands[i];
        if (commands[i] == wire::kInteractClose)
          break;
      }
    }
    const std::string chunk = backend.send(block);
    auto frame = wire::decode_single(chunk);
    if (!payload.empty() && !frame.payload.empty())
      payload += '\n';
    payload += frame.payload;
    result.frame = std::move(frame);
    any = true;
  }
  if (!any)
    return result;

  result.filtered_text = filter_output(payload, io_limit);
  if (result.interactive && result.filtered_text.empty())
    result.filtered_text = std::string(kNoOutputMessage);
  return result;
}

SessionStatus probe_status(DebuggerBackend &backend) {
  const std::string chunk = backend.send(wire::kStatus);
  const auto frame = wire::decode_single(chunk);
  const auto mode = mode_from_state_word(frame.state_word);
  if (!mode)
    throw ProtocolError("unknown state word '" + frame.state_word + "'", tail_of(chunk));

  const auto payload = wire::parse_status_payload(frame.payload);
  SessionStatus status;
  status.mode = *mode;
  status.stack = payload.frames;
  status.last_event = payload.event;
  for (const auto &bp : frame.breakpoints)
    status.breakpoints.push_back({bp.id, bp.file, bp.line, bp.hits});
  return status;
}

PdbProcess::~PdbProcess() { kill(); }

std::string PdbProcess::start(const LaunchSpec &spec) {
  kill();
  namespace fs = std::filesystem;
  if (!fs::is_directory(spec.workdir))
    throw SpawnFailure("working directory does not exist: " + spec.workdir.string());
  const auto test_path = spec.workdir / spec.test_file;
  if (!fs::is_regular_file(test_path))
    throw SpawnFailure("test file not found: " + test_path.string());
  if (spec.interpreter_argv.empty())
    throw SpawnFailure("no interpreter configured");
  if (spec.command_timeout.count() <= 0)
    throw SpawnFailure("command timeout must be positive");

  std::vector<std::string> argv = spec.interpreter_argv;
  argv.insert(argv.end(), {"--marker", std::string(wire::kMarker), "--file", spec.test_file});
  timeout_ = spec.command_timeout;
  buffer_.clear();
  proc_ = std::make_unique<Subprocess>(argv, spec.workdir);
  return read_frame(timeout_, /*handshake=*/true);
}

std::string PdbProcess::send(std::string_view command) {
  if (!proc_)
    throw PipeClosed("debugger process not started");
  std::string line(command);
  line += '\n';
  if (!proc_->write_all(line))
    throw PipeClosed("debugger stdin closed; output tail: " + tail_of(buffer_));
  return read_frame(timeout_, /*handshake=*/false);
}

std::string PdbProcess::read_frame(std::chrono::milliseconds timeout, bool handshake) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::size_t scan_from = 0;
  while (true) {
    const auto marker = buffer_.find(wire::kMarker, scan_from);
    if (marker != std::string::npos) {
      const auto nl = buffer_.find('\n', marker);
      if (nl != std::string::npos) {
        std::string chunk = buffer_.substr(0, nl + 1);
        buffer_.erase(0, nl + 1);
        return chunk;
      }
      scan_from = marker;
    } else if (buffer_.size() >= wire::kMarker.size()) {
      scan_from = buffer_.size() - wire::kMarker.size() + 1;
    }

    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      if (handshake) {
        kill();
        throw HandshakeTimeout("debuggee produced no sentinel within " +
                               std::to_string(timeout.count()) + " ms");
      }
      throw CommandTimeout("no response within " + std::to_string(timeout.count()) + " ms");
    }
    switch (proc_->read_some(buffer_, left)) {
    case Subprocess::ReadStatus::Eof: {
      const std::string tail = tail_of(buffer_);
      const int code = proc_->wait();
      if (handshake)
        throw SpawnFailure("debuggee exited during startup (code " + std::to_string(code) +
                           "): " + tail);
      throw PipeClosed("debugger exited (code " + std::to_string(code) + "): " + tail);
    }
    case Subprocess::ReadStatus::Timeout:
    case Subprocess::ReadStatus::Data:
      break;
    }
  }
}

void PdbProcess::kill() {
  if (proc_) {
    proc_->kill();
    proc_->wait();
    proc_.reset();
  }
}

bool PdbProcess::alive() const { return proc_ && proc_->running(); }

std::unique_ptr<PdbProcess> spawn(const LaunchSpec &spec, std::string *initial_chunk) {
  auto handle = std::make_unique<PdbProcess>();
  auto chunk = handle->start(spec);
  const auto frame = wire::decode_single(chunk);
  if (frame.state_word != state_word(SessionMode::Start)) {
    handle->kill();
    throw SpawnFailure("debuggee did not start paused (state=" + frame.state_word + ")");
  }
  if (initial_chunk)
    *initial_chunk = std::move(chunk);
  return handle;
}

} // namespace debugrepair
