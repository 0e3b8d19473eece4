#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace debugrepair {

struct SetBreakpoint {
  int line = 1;
  friend bool operator==(const SetBreakpoint &, const SetBreakpoint &) = default;
};

enum class ExecCommand { Continue, Restart };

struct ControlExecution {
  ExecCommand cmd = ExecCommand::Continue;
  friend bool operator==(const ControlExecution &, const ControlExecution &) = default;
};

struct InteractCode {
  std::string code;
  friend bool operator==(const InteractCode &, const InteractCode &) = default;
};

struct ProposeRepair {
  std::string plan;
  friend bool operator==(const ProposeRepair &, const ProposeRepair &) = default;
};

// The four verbs the Inspector may call.
using InspectorAction =
    std::variant<SetBreakpoint, ControlExecution, InteractCode, ProposeRepair>;

std::string_view verb_name(const InspectorAction &action);
std::string_view to_string(ExecCommand cmd);

// Python-style string literal: single quotes unless the text contains a
// single quote and no double quote. Control characters are escaped, so the
// result never spans lines.
std::string quote_literal(std::string_view text);

// Canonical call rendering, e.g. control_execution('continue').
// Parsing the echo back yields the same action.
std::string render_echo(const InspectorAction &action);

} // namespace debugrepair
