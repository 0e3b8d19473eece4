#include "debugrepair/protocol.hpp"

#include <cctype>
#include <optional>

namespace debugrepair {
namespace {

constexpr std::string_view kLegalVerbs =
    "set_breakpoint(line: int), control_execution(cmd: str) with 'continue' or 'restart', "
    "interact_code(code: str), propose_repair(plan: str)";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }
bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (is_space(s[b]) || s[b] == '\n'))
    ++b;
  while (e > b && (is_space(s[e - 1]) || s[e - 1] == '\n'))
    --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto &c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct Line {
  std::size_t begin;
  std::size_t end; // exclusive, before '\n'
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back({pos, text.size()});
      break;
    }
    lines.push_back({pos, nl});
    pos = nl + 1;
  }
  return lines;
}

// "### THOUGHT", "###Action:" and similar.
std::optional<std::string> header_word(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && is_space(line[i]))
    ++i;
  if (line.substr(i, 3) != "###")
    return std::nullopt;
  i += 3;
  while (i < line.size() && line[i] == '#')
    ++i;
  while (i < line.size() && is_space(line[i]))
    ++i;
  std::size_t j = i;
  while (j < line.size() && std::isalpha(static_cast<unsigned char>(line[j])))
    ++j;
  return lower(line.substr(i, j - i));
}

void append_utf8(std::string &out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

struct Arg {
  std::string keyword;
  bool is_int = false;
  long long int_value = 0;
  std::string str_value;
};

struct Failure {
  std::string fragment;
  std::string message;
};

// Recursive-descent reader over the body of the action block.
class CallReader {
public:
  explicit CallReader(std::string_view text) : s_(text) {}

  // Skips separators; true when another call starts here.
  bool next_statement() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (is_space(c) || c == '\n' || c == ';') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n')
          ++pos_;
      } else if (s_.substr(pos_, 3) == "```") {
        return false;
      } else {
        return true;
      }
    }
    return false;
  }

  std::optional<Failure> read_call(std::string &verb, std::vector<Arg> &args) {
    const std::size_t start = pos_;
    if (!is_ident_start(s_[pos_]))
      return fail(start, "expected an action call such as set_breakpoint(10)");
    while (pos_ < s_.size() && is_ident_char(s_[pos_]))
      ++pos_;
    verb = std::string(s_.substr(start, pos_ - start));
    skip_inline_space();
    if (pos_ >= s_.size() || s_[pos_] != '(')
      return fail(start, "expected '(' after '" + verb + "'; actions are written as name(argument)");
    ++pos_;
    skip_space();
    while (pos_ < s_.size() && s_[pos_] != ')') {
      Arg arg;
      if (auto f = read_arg(arg))
        return f;
      args.push_back(std::move(arg));
      skip_space();
      if (pos_ < s_.size() && s_[pos_] == ',') {
        ++pos_;
        skip_space();
      } else if (pos_ < s_.size() && s_[pos_] != ')') {
        return fail(start, "expected ',' or ')' in the argument list of '" + verb + "'");
      }
    }
    if (pos_ >= s_.size())
      return fail(start, "missing ')' to close '" + verb + "('");
    ++pos_;
    skip_inline_space();
    if (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != ';' && s_[pos_] != '#' &&
        s_.substr(pos_, 3) != "```")
      return fail(start, "separate actions with a newline or ';'");
    last_call_ = std::string(s_.substr(start, pos_ - start));
    return std::nullopt;
  }

  const std::string &last_call() const { return last_call_; }

private:
  void skip_inline_space() {
    while (pos_ < s_.size() && is_space(s_[pos_]))
      ++pos_;
  }
  void skip_space() {
    while (pos_ < s_.size() && (is_space(s_[pos_]) || s_[pos_] == '\n'))
      ++pos_;
  }

  Failure fail(std::size_t from, std::string message) const {
    auto end = s_.find('\n', std::max(from, pos_));
    if (end == std::string_view::npos)
      end = s_.size();
    auto fragment = s_.substr(from, std::min<std::size_t>(end - from, 200));
    return Failure{std::string(fragment), std::move(message)};
  }

  std::optional<Failure> read_arg(Arg &arg) {
    const std::size_t start = pos_;
    if (is_ident_start(s_[pos_])) {
      std::size_t p = pos_;
      while (p < s_.size() && is_ident_char(s_[p]))
        ++p;
      std::size_t q = p;
      while (q < s_.size() && is_space(s_[q]))
        ++q;
      if (q < s_.size() && s_[q] == '=' && (q + 1 >= s_.size() || s_[q + 1] != '=')) {
        arg.keyword = std::string(s_.substr(pos_, p - pos_));
        pos_ = q + 1;
        skip_space();
      } else if (s_.substr(pos_, 1) != "r" && s_.substr(pos_, 1) != "R") {
        return fail(start, "arguments must be string or integer literals");
      }
    }
    if (pos_ >= s_.size())
      return fail(start, "missing argument value");
    const char c = s_[pos_];
    if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c)))
      return read_int(arg, start);
    bool raw = false;
    if ((c == 'r' || c == 'R') && pos_ + 1 < s_.size() &&
        (s_[pos_ + 1] == '\'' || s_[pos_ + 1] == '"')) {
      raw = true;
      ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == '\'' || s_[pos_] == '"'))
      return read_string(arg, start, raw);
    return fail(start, "arguments must be string or integer literals");
  }

  std::optional<Failure> read_int(Arg &arg, std::size_t start) {
    bool negative = false;
    if (s_[pos_] == '-' || s_[pos_] == '+') {
      negative = s_[pos_] == '-';
      ++pos_;
    }
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_])))
      return fail(start, "malformed integer literal");
    long long value = 0;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      if (s_[pos_] != '_') {
        if (value > 1'000'000'000)
          return fail(start, "integer literal is too large");
        value = value * 10 + (s_[pos_] - '0');
      }
      ++pos_;
    }
    if (pos_ < s_.size() && is_ident_char(s_[pos_]))
      return fail(start, "malformed integer literal");
    arg.is_int = true;
    arg.int_value = negative ? -value : value;
    return std::nullopt;
  }

  std::optional<Failure> read_string(Arg &arg, std::size_t start, bool raw) {
    const char quote = s_[pos_];
    const bool triple = s_.substr(pos_, 3) == std::string(3, quote);
    pos_ += triple ? 3 : 1;
    std::string out;
    while (true) {
      if (pos_ >= s_.size())
        return fail(start, "unterminated string literal; close it with the same quote "
                           "(use triple quotes for multi-line code)");
      const char c = s_[pos_];
      if (triple) {
        if (s_.substr(pos_, 3) == std::string(3, quote)) {
          pos_ += 3;
          break;
        }
      } else if (c == quote) {
        ++pos_;
        break;
      } else if (c == '\n') {
        return fail(start, "string literal runs past the end of the line; use \\n or "
                           "triple quotes for multi-line code");
      }
      if (c == '\\' && pos_ + 1 < s_.size()) {
        if (raw) {
          out += c;
          out += s_[pos_ + 1];
          pos_ += 2;
          continue;
        }
        if (auto f = read_escape(out, start))
          return f;
        continue;
      }
      out += c;
      ++pos_;
    }
    arg.str_value = std::move(out);
    return std::nullopt;
  }

  std::optional<Failure> read_escape(std::string &out, std::size_t start) {
    const char e = s_[pos_ + 1];
    pos_ += 2;
    switch (e) {
    case '\n': return std::nullopt;
    case '\\': out += '\\'; return std::nullopt;
    case '\'': out += '\''; return std::nullopt;
    case '"': out += '"'; return std::nullopt;
    case 'n': out += '\n'; return std::nullopt;
    case 'r': out += '\r'; return std::nullopt;
    case 't': out += '\t'; return std::nullopt;
    case 'a': out += '\a'; return std::nullopt;
    case 'b': out += '\b'; return std::nullopt;
    case 'f': out += '\f'; return std::nullopt;
    case 'v': out += '\v'; return std::nullopt;
    case '0': out += '\0'; return std::nullopt;
    case 'x':
    case 'u':
    case 'U': {
      const std::size_t digits = e == 'x' ? 2 : e == 'u' ? 4 : 8;
      if (pos_ + digits > s_.size())
        return fail(start, "truncated \\" + std::string(1, e) + " escape");
      unsigned long cp = 0;
      for (std::size_t k = 0; k < digits; ++k) {
        const int h = hex_value(s_[pos_ + k]);
        if (h < 0)
          return fail(start, "invalid \\" + std::string(1, e) + " escape");
        cp = cp * 16 + static_cast<unsigned long>(h);
      }
      pos_ += digits;
      if (e == 'x')
        out += static_cast<char>(cp);
      else if (cp > 0x10FFFF)
        return fail(start, "escape is outside the Unicode range");
      else
        append_utf8(out, cp);
      return std::nullopt;
    }
    default:
      out += '\\';
      out += e;
      return std::nullopt;
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::string last_call_;
};

std::optional<std::string> single_arg(const std::vector<Arg> &args, std::string_view keyword,
                                      const std::string &verb, Failure &failure,
                                      const std::string &call, const Arg **out) {
  if (args.size() != 1) {
    failure = {call, verb + " takes exactly one argument (" + std::string(keyword) + ")"};
    return std::nullopt;
  }
  if (!args[0].keyword.empty() && args[0].keyword != keyword) {
    failure = {call, "unknown keyword '" + args[0].keyword + "' for " + verb + "; use " +
                         std::string(keyword) + "="};
    return std::nullopt;
  }
  *out = &args[0];
  return std::string(keyword);
}

std::optional<InspectorAction> build_action(const std::string &verb, const std::vector<Arg> &args,
                                            const std::string &call, Failure &failure) {
  const Arg *arg = nullptr;
  if (verb == "set_breakpoint") {
    if (!single_arg(args, "line", verb, failure, call, &arg))
      return std::nullopt;
    long long line = arg->int_value;
    if (!arg->is_int) {
      const auto t = trim(arg->str_value);
      if (t.empty() || t.size() > 9 ||
          t.find_first_not_of("0123456789") != std::string::npos) {
        failure = {call, "set_breakpoint expects an integer line number, e.g. set_breakpoint(12)"};
        return std::nullopt;
      }
      line = std::stoll(t);
    }
    if (line < 1) {
      failure = {call, "line numbers start at 1"};
      return std::nullopt;
    }
    return SetBreakpoint{static_cast<int>(line)};
  }
  if (verb == "control_execution") {
    if (!single_arg(args, "cmd", verb, failure, call, &arg))
      return std::nullopt;
    const auto cmd = arg->is_int ? std::string() : lower(trim(arg->str_value));
    if (cmd == "continue")
      return ControlExecution{ExecCommand::Continue};
    if (cmd == "restart")
      return ControlExecution{ExecCommand::Restart};
    failure = {call, "control_execution accepts only 'continue' or 'restart'"};
    return std::nullopt;
  }
  if (verb == "interact_code") {
    if (!single_arg(args, "code", verb, failure, call, &arg))
      return std::nullopt;
    if (arg->is_int || trim(arg->str_value).empty()) {
      failure = {call, "interact_code expects a non-empty string of Python code"};
      return std::nullopt;
    }
    return InteractCode{arg->str_value};
  }
  if (verb == "propose_repair") {
    if (!single_arg(args, "plan", verb, failure, call, &arg))
      return std::nullopt;
    if (arg->is_int || trim(arg->str_value).empty()) {
      failure = {call, "propose_repair expects a non-empty string describing the root cause "
                       "and the fix"};
      return std::nullopt;
    }
    return ProposeRepair{arg->str_value};
  }
  failure = {call, "unknown action '" + verb + "'. Legal actions: " + std::string(kLegalVerbs)};
  return std::nullopt;
}

std::variant<AgentTurn, ParseError> parse_impl(std::string_view text) {
  AgentTurn turn;
  turn.raw = std::string(text);

  const auto lines = split_lines(text);
  std::optional<std::size_t> thought_line, action_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto word = header_word(text.substr(lines[i].begin, lines[i].end - lines[i].begin));
    if (!word)
      continue;
    if (*word == "thought" && !thought_line && !action_line)
      thought_line = i;
    else if (*word == "action" && !action_line)
      action_line = i;
  }

  std::size_t search_from = 0;
  if (action_line) {
    search_from = *action_line + 1;
    const std::size_t tb = thought_line ? lines[*thought_line].end + 1 : 0;
    const std::size_t te = lines[*action_line].begin;
    if (tb < te)
      turn.thought = trim(text.substr(tb, te - tb));
  }

  std::optional<std::size_t> fence;
  for (std::size_t i = search_from; i < lines.size(); ++i) {
    const auto line = trim(text.substr(lines[i].begin, lines[i].end - lines[i].begin));
    if (line.rfind("```", 0) == 0) {
      fence = i;
      break;
    }
  }
  if (!fence)
    return ParseError{"", "no action block found; reply with one \"### THOUGHT\" section and "
                          "one \"### ACTION\" section holding a ```debugger ... ``` block"};

  if (!action_line) {
    const std::size_t te = lines[*fence].begin;
    const std::size_t tb = thought_line ? lines[*thought_line].end + 1 : 0;
    if (tb < te)
      turn.thought = trim(text.substr(tb, te - tb));
  }

  const auto open = trim(text.substr(lines[*fence].begin, lines[*fence].end - lines[*fence].begin));
  const auto tag = lower(trim(std::string_view(open).substr(3)));
  if (!tag.empty() && tag != "debugger" && tag != "toolcalls")
    return ParseError{open, "unsupported block tag '" + tag +
                                "'; open the action block with ```debugger"};

  const std::size_t body_begin = std::min(lines[*fence].end + 1, text.size());
  CallReader reader(text.substr(body_begin));
  while (reader.next_statement()) {
    std::string verb;
    std::vector<Arg> args;
    if (auto f = reader.read_call(verb, args))
      return ParseError{f->fragment, f->message};
    Failure failure;
    auto action = build_action(verb, args, reader.last_call(), failure);
    if (!action)
      return ParseError{failure.fragment, failure.message};
    const bool terminal = std::holds_alternative<ProposeRepair>(*action);
    turn.actions.push_back(std::move(*action));
    if (terminal) {
      turn.truncated = reader.next_statement();
      break;
    }
  }
  if (turn.actions.empty())
    return ParseError{"", "the action block is empty; call at least one of: " +
                              std::string(kLegalVerbs)};
  return turn;
}

} // namespace

std::variant<AgentTurn, ParseError> parse_turn(std::string_view completion) {
  try {
    return parse_impl(completion);
  } catch (const std::exception &e) {
    return ParseError{"", std::string("could not parse the reply: ") + e.what()};
  }
}

std::string format_turn(std::string_view thought, const std::vector<InspectorAction> &actions) {
  std::string out = "### THOUGHT\n";
  out += thought;
  out += "\n### ACTION\n```debugger\n";
  for (const auto &a : actions) {
    out += render_echo(a);
    out += '\n';
  }
  out += "```";
  return out;
}

std::string render_status(const SessionStatus &status) {
  std::string out = "## PDB Execution Status\n";
  switch (status.mode) {
  case SessionMode::Start:
    out += "Program not started.\n";
    break;
  case SessionMode::RuntimeError:
    out += "Runtime error: " + (status.last_event.empty() ? std::string("command failed")
                                                           : status.last_event) +
           ". Only control_execution('restart') can recover the session.\n";
    break;
  case SessionMode::Done:
    out += "Session closed. No program is running.\n";
    break;
  case SessionMode::PostMortem:
    out += "Post mortem mode after " +
           (status.last_event.empty() ? std::string("an uncaught exception") : status.last_event) +
           ". Breakpoints cannot be set until control_execution('restart').\n";
    [[fallthrough]];
  case SessionMode::RuntimeState:
    out += "Current Stack Trace:\n";
    for (std::size_t i = 0; i < status.stack.size(); ++i) {
      const auto &f = status.stack[i];
      out += "[" + std::to_string(f.index) + "] " + f.function_name + " at " + f.file + ":" +
             std::to_string(f.line) + "| " + f.source_text;
      if (i + 1 == status.stack.size())
        out += " (paused here)";
      out += '\n';
    }
    break;
  }
  if (status.mode == SessionMode::Done)
    return out.substr(0, out.size() - 1);

  out += "Active Breakpoints:";
  if (status.breakpoints.empty())
    out += "\nNo active breakpoints.";
  for (const auto &bp : status.breakpoints)
    out += "\nb" + std::to_string(bp.id) + " " + bp.file + ":" + std::to_string(bp.line) +
           ", hit " + std::to_string(bp.hit_count) + " times.";
  return out;
}

std::string render_observation(const Observation &obs) {
  return "> " + obs.action_echo + "\n← " + obs.body;
}

std::string render_observations(const std::vector<Observation> &observations) {
  std::string out;
  for (const auto &o : observations) {
    if (!out.empty())
      out += '\n';
    out += render_observation(o);
  }
  return out;
}

std::string render_parse_error(const ParseError &error) {
  std::string out = "Parse error: " + error.message;
  if (!error.fragment.empty())
    out += "\nOffending text: " + error.fragment;
  return out;
}

} // namespace debugrepair
