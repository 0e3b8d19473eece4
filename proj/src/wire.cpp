#include "debugrepair/wire.hpp"

#include "debugrepair/errors.hpp"

#include <charconv>

namespace debugrepair::wire {
namespace {

constexpr std::string_view kEscapeTarget = "@@IW-7f3a";
constexpr std::string_view kEscaped = "@@IW-7f3a~";

std::string replace_all(std::string_view text, std::string_view from,
                        std::string_view to) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (true) {
    const auto hit = text.find(from, pos);
    if (hit == std::string_view::npos) {
      out.append(text.substr(pos));
      return out;
    }
    out.append(text.substr(pos, hit - pos));
    out.append(to);
    pos = hit + from.size();
  }
}

std::optional<int> to_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    return std::nullopt;
  return value;
}

std::string tail_of(std::string_view s, std::size_t n = 512) {
  return std::string(s.size() > n ? s.substr(s.size() - n) : s);
}

} // namespace

std::string escape(std::string_view text) {
  return replace_all(text, kEscapeTarget, kEscaped);
}

std::string unescape(std::string_view text) {
  return replace_all(text, kEscaped, kEscapeTarget);
}

std::string format_sentinel(std::string_view state_word,
                            const std::vector<WireBreakpoint> &breakpoints) {
  std::string out(kMarker);
  out += " state=";
  out += state_word;
  out += " bp=";
  bool first = true;
  for (const auto &bp : breakpoints) {
    if (!first)
      out += ',';
    first = false;
    out += std::to_string(bp.id) + ':' + bp.file + ':' + std::to_string(bp.line) +
           ':' + std::to_string(bp.hits);
  }
  return out;
}

std::optional<Sentinel> parse_sentinel(std::string_view line) {
  if (!line.empty() && line.back() == '\r')
    line.remove_suffix(1);
  if (!line.starts_with(kMarker))
    return std::nullopt;
  line.remove_prefix(kMarker.size());
  constexpr std::string_view kState = " state=";
  if (!line.starts_with(kState))
    return std::nullopt;
  line.remove_prefix(kState.size());
  const auto bp_at = line.find(" bp=");
  if (bp_at == std::string_view::npos || bp_at == 0)
    return std::nullopt;

  Sentinel s;
  s.state_word = std::string(line.substr(0, bp_at));
  if (s.state_word.find(' ') != std::string::npos)
    return std::nullopt;
  std::string_view list = line.substr(bp_at + 4);
  while (!list.empty()) {
    const auto comma = list.find(',');
    const auto item = list.substr(0, comma);
    list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);

    // id:file:line:hits, file may itself contain ':'.
    const auto c1 = item.find(':');
    const auto c3 = item.rfind(':');
    if (c1 == std::string_view::npos || c3 == c1)
      return std::nullopt;
    const auto c2 = item.rfind(':', c3 - 1);
    if (c2 == c1 || c2 == std::string_view::npos)
      return std::nullopt;
    auto id = to_int(item.substr(0, c1));
    auto ln = to_int(item.substr(c2 + 1, c3 - c2 - 1));
    auto hits = to_int(item.substr(c3 + 1));
    if (!id || !ln || !hits)
      return std::nullopt;
    s.breakpoints.push_back(
        {*id, std::string(item.substr(c1 + 1, c2 - c1 - 1)), *ln, *hits});
  }
  return s;
}

std::string encode_frame(const WireFrame &frame) {
  std::string out;
  if (!frame.payload.empty()) {
    out = escape(frame.payload);
    out += '\n';
  }
  out += format_sentinel(frame.state_word, frame.breakpoints);
  out += '\n';
  return out;
}

void FrameDecoder::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<WireFrame> FrameDecoder::next() {
  const auto marker_at = buffer_.find(kMarker, scan_from_);
  if (marker_at == std::string::npos) {
    scan_from_ = buffer_.size() >= kMarker.size() ? buffer_.size() - kMarker.size() + 1 : 0;
    return std::nullopt;
  }
  const auto newline = buffer_.find('\n', marker_at);
  if (newline == std::string::npos) {
    scan_from_ = marker_at;
    return std::nullopt;
  }

  std::string_view before(buffer_.data(), marker_at);
  if (!before.empty()) {
    if (before.back() != '\n')
      throw ProtocolError("sentinel not at start of line", tail_of(buffer_.substr(0, newline)));
    before.remove_suffix(1);
  }
  const auto line = std::string_view(buffer_).substr(marker_at, newline - marker_at);
  auto sentinel = parse_sentinel(line);
  if (!sentinel)
    throw ProtocolError("malformed sentinel line", tail_of(buffer_.substr(0, newline)));

  WireFrame frame{std::move(sentinel->state_word), std::move(sentinel->breakpoints),
                  unescape(before)};
  buffer_.erase(0, newline + 1);
  scan_from_ = 0;
  return frame;
}

WireFrame decode_single(std::string_view chunk) {
  FrameDecoder decoder;
  decoder.feed(chunk);
  auto frame = decoder.next();
  if (!frame)
    throw ProtocolError("no sentinel in backend output", tail_of(chunk));
  if (!decoder.pending().empty())
    throw ProtocolError("trailing bytes after sentinel", tail_of(chunk));
  return std::move(*frame);
}

StatusPayload parse_status_payload(std::string_view payload) {
  StatusPayload status;
  while (!payload.empty()) {
    const auto nl = payload.find('\n');
    auto line = payload.substr(0, nl);
    payload = nl == std::string_view::npos ? std::string_view{} : payload.substr(nl + 1);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);

    if (line.starts_with("event\t")) {
      status.event = std::string(line.substr(6));
      continue;
    }
    if (!line.starts_with("frame\t"))
      continue; // tolerate stray output
    line.remove_prefix(6);
    std::string_view fields[4];
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
      const auto tab = line.find('\t');
      if (tab == std::string_view::npos) {
        ok = false;
        break;
      }
      fields[i] = line.substr(0, tab);
      line.remove_prefix(tab + 1);
    }
    fields[3] = line; // source text keeps any further tabs
    if (!ok)
      continue;
    auto lineno = to_int(fields[2]);
    if (!lineno)
      continue;
    StackFrame f;
    f.index = static_cast<int>(status.frames.size()) + 1;
    f.function_name = std::string(fields[0]);
    f.file = std::string(fields[1]);
    f.line = *lineno;
    f.source_text = std::string(fields[3]);
    status.frames.push_back(std::move(f));
  }
  return status;
}

std::string format_status_payload(const StatusPayload &status) {
  std::string out;
  for (const auto &f : status.frames) {
    out += "frame\t" + f.function_name + '\t' + f.file + '\t' + std::to_string(f.line) +
           '\t' + f.source_text + '\n';
  }
  if (!status.event.empty())
    out += "event\t" + status.event + '\n';
  if (!out.empty())
    out.pop_back();
  return out;
}

} // namespace debugrepair::wire
