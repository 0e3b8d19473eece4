#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace debugrepair {

inline constexpr std::string_view kNoOutputMessage = "(Successfully run. No output)";

// Rewrites raw debugger output into the terse text shown to the agent:
// prompts and banners are dropped, location lines become
// "Paused before line N at <name>", blank-line runs collapse, and the result
// is capped at max_bytes (suffix included). Idempotent.
std::string filter_output(std::string_view raw, std::size_t max_bytes);

// Line rewriting only, no truncation.
std::string filter_lines(std::string_view raw);

// Caps text at max_bytes including an "... output truncated after N bytes"
// line. Never splits a UTF-8 sequence. Text within the cap is returned as is.
std::string truncate_output(std::string_view text, std::size_t max_bytes);

// "/tmp/run/__test__.py" -> "test.py"; dunder decoration is dropped.
std::string display_file_name(std::string_view path);

// "/tmp/run/__test__.py" -> "__test__.py".
std::string base_name(std::string_view path);

} // namespace debugrepair
