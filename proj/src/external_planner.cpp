#include "ocs/external_planner.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>

#include "json.hpp"

namespace ocs::plan {

using nlohmann::json;

ExternalPlanner::ExternalPlanner(const std::string& command, double timeout_s)
    : timeout_s_(timeout_s) {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw BridgeError("pipe() failed: " + std::string(strerror(errno)));
  pid_t pid = fork();
  if (pid < 0) throw BridgeError("fork() failed");
  if (pid == 0) {
    setpgid(0, 0);   // own process group so teardown reaches grandchildren
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);   // mirror of the child's call; first writer wins
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  close(in_pipe[0]);
  close(out_pipe[1]);
}

void ExternalPlanner::close_pipes() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
}

ExternalPlanner::~ExternalPlanner() {
  close_pipes();
  if (pid_ > 0) {
    kill(-pid_, SIGTERM);   // whole group: shells may leave grandchildren behind
    kill(pid_, SIGTERM);
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

ExternalPlanner::Result ExternalPlanner::query(int64_t tick,
                                               const sim::Observation& obs,
                                               const std::string& tasks_json,
                                               const std::string& history_json) {
  Result result;
  std::string request = proto::make_request(tick, obs, tasks_json, history_json) + "\n";
  ssize_t written = write(to_child_, request.data(), request.size());
  if (written != static_cast<ssize_t>(request.size())) {
    result.response.action = sim::Wait{};
    result.failure = "planner timeout";
    return result;
  }

  // read one line, honoring the deadline
  auto deadline_ms = static_cast<int>(timeout_s_ * 1000.0);
  while (true) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      try {
        result.response = proto::parse_response(line);
      } catch (const std::exception&) {
        result.response.action = sim::Wait{};
        result.failure = "bad plan";
      }
      return result;
    }
    struct pollfd pfd = {from_child_, POLLIN, 0};
    int rc = poll(&pfd, 1, deadline_ms);
    if (rc <= 0) {
      result.response.action = sim::Wait{};
      result.failure = "planner timeout";
      return result;
    }
    char buf[4096];
    ssize_t n = read(from_child_, buf, sizeof(buf));
    if (n <= 0) {
      result.response.action = sim::Wait{};
      result.failure = "bad plan";
      return result;
    }
    buffer_.append(buf, static_cast<size_t>(n));
  }
}

}  // namespace ocs::plan
