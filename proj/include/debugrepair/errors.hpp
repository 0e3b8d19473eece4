#pragma once

#include <stdexcept>
#include <string>

namespace debugrepair {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Debugger process could not be launched (missing interpreter, shim or file).
class SpawnFailure : public Error {
public:
  using Error::Error;
};

// The debuggee never produced its first sentinel frame.
class HandshakeTimeout : public Error {
public:
  using Error::Error;
};

class CommandTimeout : public Error {
public:
  using Error::Error;
};

// Backend output ended (process died) before a sentinel arrived.
class PipeClosed : public Error {
public:
  using Error::Error;
};

// Backend output that cannot be framed or decoded. `tail` holds the last
// bytes received, for the observation.
class ProtocolError : public Error {
public:
  ProtocolError(const std::string &what, std::string tail)
      : Error(what), tail_(std::move(tail)) {}
  const std::string &tail() const noexcept { return tail_; }

private:
  std::string tail_;
};

// The test environment itself is broken (as opposed to a failing test).
class HarnessFailure : public Error {
public:
  using Error::Error;
};

class LlmUnavailable : public Error {
public:
  using Error::Error;
};

class ContextOverflow : public Error {
public:
  using Error::Error;
};

class StorageFailure : public Error {
public:
  using Error::Error;
};

class ExtractionError : public Error {
public:
  using Error::Error;
};

class SchemaError : public Error {
public:
  SchemaError(const std::string &what, std::size_t line)
      : Error(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace debugrepair
