#pragma once

#include "debugrepair/backend.hpp"

#include <deque>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace debugrepair {

struct TranscriptEntry {
  std::string command;
  std::string response;
};

// Recorded debugger traffic: the launch chunk plus command/response pairs.
struct Transcript {
  std::string initial;
  std::vector<TranscriptEntry> exchanges;
};

// Scriptable DebuggerBackend replaying a transcript. Commands must arrive
// in recorded order; a mismatch is reported as garbled output. The special
// responses "<timeout>" and "<dead>" raise CommandTimeout and PipeClosed.
// Once the script is exhausted the optional responder answers.
class FakeBackend final : public DebuggerBackend {
public:
  using Responder = std::function<std::string(std::string_view command)>;

  explicit FakeBackend(Transcript transcript, Responder responder = {});

  std::string start(const LaunchSpec &spec) override;
  std::string send(std::string_view command) override;
  void kill() override;

  const std::vector<std::string> &sent() const noexcept { return sent_; }
  int starts() const noexcept { return starts_; }
  int kills() const noexcept { return kills_; }
  std::size_t remaining() const noexcept { return queue_.size(); }

private:
  std::string initial_;
  std::deque<TranscriptEntry> queue_;
  Responder responder_;
  std::vector<std::string> sent_;
  int starts_ = 0;
  int kills_ = 0;
};

// Reads {"initial": "...", "exchanges": [{"command": ..., "response": ...}]}.
Transcript load_transcript(const std::filesystem::path &path);

} // namespace debugrepair
