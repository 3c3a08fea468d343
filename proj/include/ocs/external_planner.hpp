#pragma once

#include <string>
#include <vector>

#include "ocs/protocol.hpp"

namespace ocs::plan {

struct BridgeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Synchronous request/response bridge to a child process speaking the
// line-delimited JSON protocol on stdin/stdout. One child per agent.
class ExternalPlanner {
 public:
  explicit ExternalPlanner(const std::string& command, double timeout_s = 30.0);
  ~ExternalPlanner();

  ExternalPlanner(const ExternalPlanner&) = delete;
  ExternalPlanner& operator=(const ExternalPlanner&) = delete;

  struct Result {
    proto::Response response;
    // On timeout/schema failure the caller gets a wait action plus the
    // failure detail for the agent's action status.
    std::string failure;   // empty, "planner timeout", or "bad plan"
  };

  Result query(int64_t tick, const sim::Observation& obs,
               const std::string& tasks_json = "[]",
               const std::string& history_json = "[]");

  bool running() const { return pid_ > 0; }

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  double timeout_s_;
  std::string buffer_;

  void close_pipes();
};

}  // namespace ocs::plan
