#pragma once

// Wire protocol v1 between the driver and the debuggee shim.
//
// Every response ends with exactly one sentinel line
//
//   @@IW-7f3a@@ state=<word> bp=<id:file:line:hits,...>
//
// A non-empty payload is followed by one '\n' before the sentinel; an empty
// payload is followed by nothing. Payload text is escaped so it never
// contains the marker: every "@@IW-7f3a" becomes "@@IW-7f3a~".

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "debugrepair/session_status.hpp"

namespace debugrepair::wire {

inline constexpr std::string_view kMarker = "@@IW-7f3a@@";
inline constexpr std::string_view kInteractOpen = "@@IW-7f3a@@ interact-open";
inline constexpr std::string_view kInteractClose = "@@IW-7f3a@@ interact-close";
inline constexpr std::string_view kStatus = "@@IW-7f3a@@ status";

struct WireBreakpoint {
  int id = 0;
  std::string file;
  int line = 0;
  int hits = 0;

  friend bool operator==(const WireBreakpoint &, const WireBreakpoint &) = default;
};

struct WireFrame {
  std::string state_word;
  std::vector<WireBreakpoint> breakpoints;
  std::string payload; // unescaped

  friend bool operator==(const WireFrame &, const WireFrame &) = default;
};

std::string escape(std::string_view text);
std::string unescape(std::string_view text);

std::string format_sentinel(std::string_view state_word,
                            const std::vector<WireBreakpoint> &breakpoints);

struct Sentinel {
  std::string state_word;
  std::vector<WireBreakpoint> breakpoints;
};

// Parses one sentinel line (without the trailing newline).
std::optional<Sentinel> parse_sentinel(std::string_view line);

// Shim-side encoding of a whole frame, including the final newline.
std::string encode_frame(const WireFrame &frame);

// Incremental decoder for a byte stream of frames.
class FrameDecoder {
public:
  void feed(std::string_view bytes);

  // Next complete frame, if any. Throws ProtocolError on a malformed
  // sentinel line.
  std::optional<WireFrame> next();

  // Bytes received but not yet part of a complete frame.
  const std::string &pending() const noexcept { return buffer_; }

private:
  std::string buffer_;
  std::size_t scan_from_ = 0;
};

// Decodes a chunk that must hold exactly one frame. Throws ProtocolError.
WireFrame decode_single(std::string_view chunk);

// Status channel payload, one record per line:
//   frame\t<function>\t<file>\t<line>\t<source text>
//   event\t<text>
struct StatusPayload {
  std::vector<StackFrame> frames; // outermost first, 1-based index
  std::string event;
};

StatusPayload parse_status_payload(std::string_view payload);
std::string format_status_payload(const StatusPayload &status);

} // namespace debugrepair::wire
