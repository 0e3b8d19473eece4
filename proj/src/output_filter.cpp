#include "debugrepair/output_filter.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <vector>

namespace debugrepair {
namespace {

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
           return std::isdigit(c);
         });
}

std::string_view rtrim(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' ||
                        s.back() == '\n' || s.back() == '\f' || s.back() == '\v'))
    s.remove_suffix(1);
  return s;
}

struct Location {
  std::string path;
  std::string line;
};

// "> /path/file.py(26)func()" optionally followed by "->value".
std::optional<Location> parse_location(std::string_view s) {
  if (!s.starts_with("> "))
    return std::nullopt;
  s.remove_prefix(2);
  std::size_t from = 0;
  while (true) {
    const auto call = s.find("()", from);
    if (call == std::string_view::npos)
      return std::nullopt;
    const auto rest = s.substr(call + 2);
    from = call + 1;
    if (!rest.empty() && !rest.starts_with("->"))
      continue;
    const auto head = s.substr(0, call); // path(N)func
    const auto close = head.rfind(')');
    if (close == std::string_view::npos)
      continue;
    const auto open = head.rfind('(', close);
    if (open == std::string_view::npos || open == 0)
      continue;
    const auto number = head.substr(open + 1, close - open - 1);
    const auto func = head.substr(close + 1);
    if (!is_digits(number) || func.empty() ||
        !std::all_of(func.begin(), func.end(), [](unsigned char c) {
          return std::isalnum(c) || c == '_' || c == '<' || c == '>';
        }))
      continue;
    return Location{std::string(head.substr(0, open)), std::string(number)};
  }
}

// "Breakpoint 3 at /path/file.py:26"
std::optional<std::string> rewrite_breakpoint(std::string_view s) {
  constexpr std::string_view kPrefix = "Breakpoint ";
  if (!s.starts_with(kPrefix))
    return std::nullopt;
  s.remove_prefix(kPrefix.size());
  const auto at = s.find(" at ");
  if (at == std::string_view::npos || !is_digits(s.substr(0, at)))
    return std::nullopt;
  const auto id = s.substr(0, at);
  const auto where = s.substr(at + 4);
  const auto colon = where.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || !is_digits(where.substr(colon + 1)))
    return std::nullopt;
  return "Breakpoint b" + std::string(id) + " set at " +
         base_name(where.substr(0, colon)) + ":" + std::string(where.substr(colon + 1));
}

bool is_dropped_banner(std::string_view s) {
  static constexpr std::string_view kExact[] = {
      "(Pdb)",
      "--Return--",
      "--Call--",
      "Uncaught exception. Entering post mortem debugging",
      "Running 'cont' or 'step' will restart the program",
      "The program finished and will be restarted",
  };
  for (auto e : kExact)
    if (s == e)
      return true;
  return s.starts_with("Post mortem debugger finished.") ||
         s.starts_with("Deleted breakpoint ");
}

std::string_view strip_prefixes(std::string_view s) {
  bool changed = true;
  while (changed) {
    changed = false;
    if (s.starts_with("(Pdb) ")) {
      s.remove_prefix(6);
      changed = true;
    }
    if (s.starts_with("*** ")) {
      s.remove_prefix(4);
      changed = true;
    }
  }
  return s;
}

std::size_t utf8_floor(std::string_view s, std::size_t n) {
  if (n >= s.size())
    return s.size();
  while (n > 0 && (static_cast<unsigned char>(s[n]) & 0xC0) == 0x80)
    --n;
  return n;
}

std::string truncation_suffix(std::size_t kept) {
  return "... output truncated after " + std::to_string(kept) + " bytes";
}

} // namespace

std::string base_name(std::string_view path) {
  const auto slash = path.find_last_of("/\\");
  return std::string(slash == std::string_view::npos ? path : path.substr(slash + 1));
}

std::string display_file_name(std::string_view path) {
  std::string name = base_name(path);
  const auto dot = name.rfind('.');
  std::string stem = dot == std::string::npos ? name : name.substr(0, dot);
  const std::string ext = dot == std::string::npos ? "" : name.substr(dot);
  if (stem.size() > 4 && stem.starts_with("__") && stem.ends_with("__"))
    stem = stem.substr(2, stem.size() - 4);
  return stem + ext;
}

std::string filter_lines(std::string_view raw) {
  std::vector<std::string> out;
  bool prev_location = false;
  bool prev_restarting = false;

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos)
      nl = raw.size();
    const std::string_view original = raw.substr(pos, nl - pos);
    pos = nl + 1;

    const bool after_location = prev_location;
    const bool after_restarting = prev_restarting;
    prev_location = prev_restarting = false;

    if (after_restarting && original.starts_with('\t'))
      continue;

    auto line = rtrim(strip_prefixes(original));
    if (after_location && line.starts_with("-> "))
      continue;
    if (is_dropped_banner(line))
      continue;
    if (line.starts_with("Restarting ") && line.ends_with(" with arguments:")) {
      prev_restarting = true;
      continue;
    }
    if (auto loc = parse_location(line)) {
      out.push_back("Paused before line " + loc->line + " at " + display_file_name(loc->path));
      prev_location = true;
      continue;
    }
    if (auto bp = rewrite_breakpoint(line)) {
      out.push_back(std::move(*bp));
      continue;
    }
    if (line == "Blank or comment") {
      out.emplace_back("line is blank or a comment");
      continue;
    }
    out.emplace_back(line);
  }

  std::string result;
  bool pending_blank = false;
  for (const auto &line : out) {
    if (line.empty()) {
      pending_blank = !result.empty();
      continue;
    }
    if (pending_blank)
      result += '\n';
    pending_blank = false;
    if (!result.empty())
      result += '\n';
    result += line;
  }
  return result;
}

std::string truncate_output(std::string_view text, std::size_t max_bytes) {
  if (text.size() <= max_bytes)
    return std::string(text);
  const auto worst_suffix = truncation_suffix(text.size()).size() + 1;
  if (max_bytes <= worst_suffix)
    return std::string(text.substr(0, utf8_floor(text, max_bytes)));
  const auto kept = rtrim(text.substr(0, utf8_floor(text, max_bytes - worst_suffix)));
  if (kept.empty())
    return truncation_suffix(0);
  return std::string(kept) + '\n' + truncation_suffix(kept.size());
}

std::string filter_output(std::string_view raw, std::size_t max_bytes) {
  std::string filtered = filter_lines(raw);
  if (filtered.size() <= max_bytes)
    return filtered;
  const auto worst_suffix = truncation_suffix(filtered.size()).size() + 1;
  if (max_bytes <= worst_suffix)
    return truncate_output(filtered, max_bytes);

  // A cut line may newly match a rewrite rule; back off until the kept
  // prefix is a fixed point of filter_lines, so filtering stays idempotent.
  std::size_t budget = max_bytes - worst_suffix;
  while (true) {
    const std::string_view kept =
        rtrim(std::string_view(filtered).substr(0, utf8_floor(filtered, budget)));
    if (kept.empty())
      return truncation_suffix(0);
    if (filter_lines(kept) == kept)
      return std::string(kept) + '\n' + truncation_suffix(kept.size());
    budget = kept.size() - 1;
  }
}

} // namespace debugrepair
