#include "debugrepair/fake_backend.hpp"

#include "debugrepair/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace debugrepair {

FakeBackend::FakeBackend(Transcript transcript, Responder responder)
    : initial_(std::move(transcript.initial)),
      queue_(transcript.exchanges.begin(), transcript.exchanges.end()),
      responder_(std::move(responder)) {}

std::string FakeBackend::start(const LaunchSpec &) {
  ++starts_;
  return initial_;
}

std::string FakeBackend::send(std::string_view command) {
  sent_.emplace_back(command);
  if (queue_.empty()) {
    if (responder_)
      return responder_(command);
    throw PipeClosed("transcript exhausted");
  }
  auto entry = std::move(queue_.front());
  queue_.pop_front();
  if (entry.command != command)
    throw ProtocolError("fake backend expected '" + entry.command + "'",
                        "unexpected command: " + std::string(command));
  if (entry.response == "<timeout>")
    throw CommandTimeout("scripted timeout");
  if (entry.response == "<dead>")
    throw PipeClosed("scripted backend death");
  return entry.response;
}

void FakeBackend::kill() { ++kills_; }

Transcript load_transcript(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw StorageFailure("cannot read transcript " + path.string());
  const auto doc = nlohmann::json::parse(in);
  Transcript t;
  t.initial = doc.at("initial").get<std::string>();
  for (const auto &e : doc.at("exchanges"))
    t.exchanges.push_back({e.at("command").get<std::string>(), e.at("response").get<std::string>()});
  return t;
}

} // namespace debugrepair
