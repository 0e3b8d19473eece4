#pragma once

#include "debugrepair/actions.hpp"
#include "debugrepair/observation.hpp"
#include "debugrepair/session_status.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace debugrepair {

struct AgentTurn {
  std::string thought;
  std::vector<InspectorAction> actions; // source order
  std::string raw;
  // Calls after propose_repair were dropped.
  bool truncated = false;
};

struct ParseError {
  std::string fragment; // offending text, possibly empty
  std::string message;  // what went wrong plus how to fix it
};

// Reads a "### THOUGHT / ### ACTION" completion. The first fenced block
// after the ACTION header (tag debugger, toolcalls or none) holds calls
// separated by newlines or semicolons. Never throws.
std::variant<AgentTurn, ParseError> parse_turn(std::string_view completion);

// Inverse helper: a completion whose ACTION block holds render_echo of
// every action, one per line.
std::string format_turn(std::string_view thought, const std::vector<InspectorAction> &actions);

std::string render_status(const SessionStatus &status);

// "> <echo>\n← <body>"
std::string render_observation(const Observation &obs);
std::string render_observations(const std::vector<Observation> &observations);

// Observation text shown when a completion does not parse.
std::string render_parse_error(const ParseError &error);

} // namespace debugrepair
