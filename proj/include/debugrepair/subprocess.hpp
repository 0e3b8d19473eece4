#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <sys/types.h>

namespace debugrepair {

// Child process with a stdin pipe and one merged stdout/stderr pipe. The
// child leads its own process group so kill() also reaches grandchildren.
class Subprocess {
public:
  // Throws SpawnFailure when the executable cannot be started.
  Subprocess(const std::vector<std::string> &argv, const std::filesystem::path &cwd);
  ~Subprocess();

  Subprocess(const Subprocess &) = delete;
  Subprocess &operator=(const Subprocess &) = delete;

  // Returns false if the pipe is closed.
  bool write_all(std::string_view data);
  void close_stdin();

  enum class ReadStatus { Data, Timeout, Eof };

  // Waits up to `timeout` for output and appends whatever is available.
  ReadStatus read_some(std::string &out, std::chrono::milliseconds timeout);

  void kill();
  // Reaps the child; returns the exit code (128 + signal when signalled).
  int wait();
  bool running();

  pid_t pid() const noexcept { return pid_; }

private:
  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int out_fd_ = -1;
  std::optional<int> exit_code_;
};

struct CaptureResult {
  int exit_code = 0;
  std::string output;
  bool timed_out = false;
  bool truncated = false;
};

// Runs to completion with a wall-clock limit; output beyond output_cap is
// discarded (truncated=true).
CaptureResult run_capture(const std::vector<std::string> &argv,
                          const std::filesystem::path &cwd,
                          std::chrono::milliseconds timeout, std::size_t output_cap,
                          std::string_view stdin_data = {});

} // namespace debugrepair
