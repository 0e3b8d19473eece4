#include "debugrepair/subprocess.hpp"

#include "debugrepair/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace debugrepair {
namespace {

void close_fd(int &fd) {
  if (fd >= 0)
    ::close(fd);
  fd = -1;
}

int decode_status(int status) {
  if (WIFEXITED(status))
    return WEXITSTATUS(status);
  if (WIFSIGNALED(status))
    return 128 + WTERMSIG(status);
  return -1;
}

} // namespace

Subprocess::Subprocess(const std::vector<std::string> &argv,
                       const std::filesystem::path &cwd) {
  if (argv.empty())
    throw SpawnFailure("empty command line");

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0)
    throw SpawnFailure(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw SpawnFailure(std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]})
      ::close(fd);
    throw SpawnFailure(std::string("pipe: ") + std::strerror(errno));
  }

  std::vector<char *> cargv;
  for (const auto &a : argv)
    cargv.push_back(const_cast<char *>(a.c_str()));
  cargv.push_back(nullptr);
  const std::string dir = cwd.string();

  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
      ::close(fd);
    throw SpawnFailure(std::string("fork: ") + std::strerror(errno));
  }
  if (pid_ == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(out_pipe[1], STDERR_FILENO);
    if (!dir.empty() && ::chdir(dir.c_str()) != 0) {
      int err = errno;
      (void)!::write(err_pipe[1], &err, sizeof err);
      ::_exit(127);
    }
    ::execvp(cargv[0], cargv.data());
    int err = errno;
    (void)!::write(err_pipe[1], &err, sizeof err);
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  stdin_fd_ = in_pipe[1];
  out_fd_ = out_pipe[0];

  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(err_pipe[0], &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  ::close(err_pipe[0]);
  if (n == sizeof child_errno) {
    wait();
    close_fd(stdin_fd_);
    close_fd(out_fd_);
    throw SpawnFailure("cannot execute '" + argv[0] + "' in " + dir + ": " +
                       std::strerror(child_errno));
  }
}

Subprocess::~Subprocess() {
  kill();
  wait();
  close_fd(stdin_fd_);
  close_fd(out_fd_);
}

bool Subprocess::write_all(std::string_view data) {
  if (stdin_fd_ < 0)
    return false;
  // A dead reader must not take the driver down with SIGPIPE.
  static std::once_flag sigpipe_once;
  std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });
  bool ok = true;
  while (!data.empty()) {
    const ssize_t n = ::write(stdin_fd_, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR)
        continue;
      ok = false;
      break;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return ok;
}

void Subprocess::close_stdin() { close_fd(stdin_fd_); }

Subprocess::ReadStatus Subprocess::read_some(std::string &out,
                                             std::chrono::milliseconds timeout) {
  if (out_fd_ < 0)
    return ReadStatus::Eof;
  pollfd pfd{out_fd_, POLLIN, 0};
  int rc;
  do {
    rc = ::poll(&pfd, 1, static_cast<int>(std::max<long long>(0, timeout.count())));
  } while (rc < 0 && errno == EINTR);
  if (rc == 0)
    return ReadStatus::Timeout;
  if (rc < 0)
    return ReadStatus::Eof;

  char buf[8192];
  ssize_t n;
  do {
    n = ::read(out_fd_, buf, sizeof buf);
  } while (n < 0 && errno == EINTR);
  if (n <= 0) {
    close_fd(out_fd_);
    return ReadStatus::Eof;
  }
  out.append(buf, static_cast<std::size_t>(n));
  return ReadStatus::Data;
}

void Subprocess::kill() {
  if (pid_ > 0 && !exit_code_) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
  }
}

int Subprocess::wait() {
  if (exit_code_)
    return *exit_code_;
  if (pid_ <= 0)
    return -1;
  int status = 0;
  pid_t r;
  do {
    r = ::waitpid(pid_, &status, 0);
  } while (r < 0 && errno == EINTR);
  exit_code_ = r == pid_ ? decode_status(status) : -1;
  return *exit_code_;
}

bool Subprocess::running() {
  if (exit_code_ || pid_ <= 0)
    return false;
  int status = 0;
  const pid_t r = ::waitpid(pid_, &status, WNOHANG);
  if (r == pid_) {
    exit_code_ = decode_status(status);
    return false;
  }
  return r == 0;
}

CaptureResult run_capture(const std::vector<std::string> &argv,
                          const std::filesystem::path &cwd,
                          std::chrono::milliseconds timeout, std::size_t output_cap,
                          std::string_view stdin_data) {
  Subprocess proc(argv, cwd);
  if (!stdin_data.empty())
    proc.write_all(stdin_data);
  proc.close_stdin();

  CaptureResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string chunk;
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      proc.kill();
      break;
    }
    chunk.clear();
    const auto st = proc.read_some(chunk, left);
    if (st == Subprocess::ReadStatus::Eof)
      break;
    if (st == Subprocess::ReadStatus::Timeout)
      continue;
    const auto room = output_cap > result.output.size() ? output_cap - result.output.size() : 0;
    if (chunk.size() > room)
      result.truncated = true;
    result.output.append(chunk, 0, std::min(room, chunk.size()));
  }
  result.exit_code = proc.wait();
  return result;
}

} // namespace debugrepair
