#include "coldfaas/process_driver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <optional>
#include <utility>

#include "coldfaas/clock.hpp"

extern char** environ;

namespace coldfaas {

namespace {

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) return {};
  return {Fd(fds[0]), Fd(fds[1])};
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

int open_pidfd(pid_t pid) {
#ifdef SYS_pidfd_open
  return static_cast<int>(::syscall(SYS_pidfd_open, pid, 0));
#else
  (void)pid;
  return -1;
#endif
}

std::string errno_text(const char* what, int err) { return std::string(what) + ": " + std::strerror(err); }

class SpawnAttributes {
 public:
  SpawnAttributes() {
    ::posix_spawnattr_init(&attr_);
    ::posix_spawn_file_actions_init(&actions_);
  }
  ~SpawnAttributes() {
    ::posix_spawn_file_actions_destroy(&actions_);
    ::posix_spawnattr_destroy(&attr_);
  }
  SpawnAttributes(const SpawnAttributes&) = delete;
  SpawnAttributes& operator=(const SpawnAttributes&) = delete;

  posix_spawnattr_t* attr() { return &attr_; }
  posix_spawn_file_actions_t* actions() { return &actions_; }

 private:
  posix_spawnattr_t attr_;
  posix_spawn_file_actions_t actions_;
};

}  // namespace

ExecutionResult ProcessDriver::execute(const ExecutionRequest& request) {
  if (request.image == nullptr) {
    ExecutionResult result;
    result.outcome = Outcome::image_missing;
    result.detail = "no image for '" + request.spec.image_ref + "'";
    return result;
  }
  return run(*request.image, request.payload, std::chrono::nanoseconds(std::max<std::int64_t>(0, request.remaining_ns())));
}

ExecutionResult ProcessDriver::run(const ProcessImage& image, std::string_view payload,
                                   std::chrono::nanoseconds timeout) {
  ignore_sigpipe_once();
  ExecutionResult result;

  Pipe stdin_pipe = make_pipe();
  Pipe stdout_pipe = make_pipe();
  if (!stdin_pipe.read.valid() || !stdout_pipe.read.valid()) {
    result.outcome = Outcome::spawn_failure;
    result.detail = errno_text("pipe2", errno);
    return result;
  }

  SpawnAttributes spawn;
  sigset_t empty_mask, default_signals;
  sigemptyset(&empty_mask);
  sigemptyset(&default_signals);
  sigaddset(&default_signals, SIGPIPE);
  sigaddset(&default_signals, SIGTERM);
  sigaddset(&default_signals, SIGINT);
  ::posix_spawnattr_setsigmask(spawn.attr(), &empty_mask);
  ::posix_spawnattr_setsigdefault(spawn.attr(), &default_signals);
  ::posix_spawnattr_setpgroup(spawn.attr(), 0);
  ::posix_spawnattr_setflags(spawn.attr(),
                             POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF);
  ::posix_spawn_file_actions_adddup2(spawn.actions(), stdin_pipe.read.get(), STDIN_FILENO);
  ::posix_spawn_file_actions_adddup2(spawn.actions(), stdout_pipe.write.get(), STDOUT_FILENO);

  std::string path = image.executable_path.string();
  char* argv[] = {path.data(), nullptr};

  const ClockReading spawned_at = SteadyClock::read();
  const ClockReading deadline = spawned_at + timeout.count();
  pid_t pid = -1;
  int rc = ::posix_spawn(&pid, path.c_str(), spawn.actions(), spawn.attr(), argv, environ);
  if (rc != 0) {
    result.outcome = Outcome::spawn_failure;
    result.detail = errno_text(("spawn " + path).c_str(), rc);
    return result;
  }
  live_.fetch_add(1, std::memory_order_acq_rel);

  stdin_pipe.read.reset();
  stdout_pipe.write.reset();
  Fd to_child = std::move(stdin_pipe.write);
  Fd from_child = std::move(stdout_pipe.read);
  set_nonblocking(to_child.get());
  set_nonblocking(from_child.get());
  Fd pidfd(open_pidfd(pid));

  std::size_t written = 0;
  if (payload.empty()) to_child.reset();

  std::optional<ClockReading> first_byte_at;
  std::optional<ClockReading> exited_at;
  int status = 0;
  bool timed_out = false;
  char buffer[65536];

  auto drain = [&] {
    while (from_child.valid()) {
      ssize_t n = ::read(from_child.get(), buffer, sizeof(buffer));
      if (n > 0) {
        if (!first_byte_at) first_byte_at = SteadyClock::read();
        result.output.append(buffer, static_cast<std::size_t>(n));
      } else if (n == 0) {
        from_child.reset();
      } else if (errno == EINTR) {
        continue;
      } else {
        break;
      }
    }
  };

  // The group is killed while the leader is still an unreaped zombie, so
  // its pid (and therefore the group id) cannot have been recycled.
  auto try_reap = [&]() -> bool {
    siginfo_t info{};
    info.si_pid = 0;
    if (::waitid(P_PID, static_cast<id_t>(pid), &info, WEXITED | WNOHANG | WNOWAIT) != 0 || info.si_pid == 0) {
      return false;
    }
    exited_at = SteadyClock::read();
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    return true;
  };

  while (!exited_at) {
    ClockReading now = SteadyClock::read();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    pollfd fds[3];
    int nfds = 0;
    int out_idx = -1, in_idx = -1, pid_idx = -1;
    if (from_child.valid()) {
      out_idx = nfds;
      fds[nfds++] = {from_child.get(), POLLIN, 0};
    }
    if (to_child.valid()) {
      in_idx = nfds;
      fds[nfds++] = {to_child.get(), POLLOUT, 0};
    }
    if (pidfd.valid()) {
      pid_idx = nfds;
      fds[nfds++] = {pidfd.get(), POLLIN, 0};
    }
    std::int64_t wait_ms = std::max<std::int64_t>(1, (deadline - now + 999'999) / 1'000'000);
    if (!pidfd.valid()) wait_ms = std::min<std::int64_t>(wait_ms, 1);
    int ready = ::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(std::min<std::int64_t>(wait_ms, 1000)));
    if (ready < 0 && errno != EINTR) break;

    if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
      while (written < payload.size()) {
        ssize_t n = ::write(to_child.get(), payload.data() + written, payload.size() - written);
        if (n > 0) {
          written += static_cast<std::size_t>(n);
        } else if (n < 0 && errno == EINTR) {
          continue;
        } else {
          if (n < 0 && errno != EAGAIN) written = payload.size();  // EPIPE: child stopped reading
          break;
        }
      }
      if (written >= payload.size()) to_child.reset();
    }
    if (out_idx >= 0 && (fds[out_idx].revents & (POLLIN | POLLHUP | POLLERR))) drain();
    if (pid_idx >= 0 && (fds[pid_idx].revents & POLLIN)) {
      drain();
      try_reap();
    } else if (!pidfd.valid() || !from_child.valid()) {
      try_reap();
    }
  }

  if (!timed_out) drain();

  if (timed_out) {
    ::kill(-pid, SIGTERM);
    ClockReading grace_end = SteadyClock::read() + std::chrono::nanoseconds(config_.kill_grace).count();
    while (!try_reap()) {
      ClockReading now = SteadyClock::read();
      if (now >= grace_end) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        exited_at = SteadyClock::read();
        break;
      }
      if (pidfd.valid()) {
        pollfd pfd{pidfd.get(), POLLIN, 0};
        ::poll(&pfd, 1, static_cast<int>(std::max<std::int64_t>(1, (grace_end - now) / 1'000'000)));
      } else {
        ::usleep(1000);
      }
    }
  }
  live_.fetch_sub(1, std::memory_order_acq_rel);

  const ClockReading end = *exited_at;
  if (first_byte_at && *first_byte_at <= end) {
    result.startup_ns = *first_byte_at - spawned_at;
    result.execution_ns = end - *first_byte_at;
  } else {
    result.startup_ns = end - spawned_at;
    result.execution_ns = 0;
  }

  if (timed_out) {
    result.outcome = Outcome::timeout;
    result.detail = "deadline exceeded; executor killed";
  } else if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
    result.outcome = Outcome::ok;
  } else {
    result.outcome = Outcome::function_error;
    result.detail = WIFEXITED(status) ? "exit code " + std::to_string(WEXITSTATUS(status))
                                      : "killed by signal " + std::to_string(WTERMSIG(status));
  }
  return result;
}

}  // namespace coldfaas
