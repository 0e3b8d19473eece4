#include "debugrepair/actions.hpp"
#include "debugrepair/observation.hpp"

#include <cstdio>

namespace debugrepair {

std::string_view verb_name(const InspectorAction &action) {
  switch (action.index()) {
  case 0: return "set_breakpoint";
  case 1: return "control_execution";
  case 2: return "interact_code";
  default: return "propose_repair";
  }
}

std::string_view to_string(ExecCommand cmd) {
  return cmd == ExecCommand::Continue ? "continue" : "restart";
}

std::string_view to_string(ObservationKind kind) {
  switch (kind) {
  case ObservationKind::Executed: return "executed";
  case ObservationKind::Violation: return "violation";
  case ObservationKind::Timeout: return "timeout";
  case ObservationKind::BackendDead: return "backend_dead";
  case ObservationKind::BackendError: return "backend_error";
  case ObservationKind::ParseError: return "parse_error";
  case ObservationKind::Skipped: return "skipped";
  }
  return "?";
}

std::string quote_literal(std::string_view text) {
  const bool has_single = text.find('\'') != std::string_view::npos;
  const bool has_double = text.find('"') != std::string_view::npos;
  const char quote = (has_single && !has_double) ? '"' : '\'';

  std::string out;
  out.reserve(text.size() + 2);
  out += quote;
  for (char ch : text) {
    const auto byte = static_cast<unsigned char>(ch);
    if (ch == '\\') {
      out += "\\\\";
    } else if (ch == quote) {
      out += '\\';
      out += ch;
    } else if (ch == '\n') {
      out += "\\n";
    } else if (ch == '\r') {
      out += "\\r";
    } else if (ch == '\t') {
      out += "\\t";
    } else if (byte < 0x20 || byte == 0x7f) {
      char buf[5];
      std::snprintf(buf, sizeof buf, "\\x%02x", byte);
      out += buf;
    } else {
      out += ch;
    }
  }
  out += quote;
  return out;
}

std::string render_echo(const InspectorAction &action) {
  std::string out(verb_name(action));
  out += '(';
  std::visit(
      [&](const auto &a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, SetBreakpoint>)
          out += std::to_string(a.line);
        else if constexpr (std::is_same_v<T, ControlExecution>)
          out += quote_literal(to_string(a.cmd));
        else if constexpr (std::is_same_v<T, InteractCode>)
          out += quote_literal(a.code);
        else
          out += quote_literal(a.plan);
      },
      action);
  out += ')';
  return out;
}

} // namespace debugrepair
