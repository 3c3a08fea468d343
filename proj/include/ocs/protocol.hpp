#pragma once

#include <optional>
#include <string>

#include "ocs/planners.hpp"
#include "ocs/simcore.hpp"

namespace ocs::proto {

// Line-delimited JSON exchanged with external planner processes.
// Request:  {"tick": N, "observation": {...}, "tasks": [...], "history": [...]}
// Response: {"action": {...}} or {"plan": [...]}, optional "reason".

std::string observation_to_json(const sim::Observation& obs);

std::string action_to_json(const sim::Action& a);

// Throws std::runtime_error on schema violations.
sim::Action action_from_json(const std::string& text);

std::optional<sim::Action> try_action_from_json(const std::string& text);

plan::CommutePlan plan_from_json(const std::string& text);

std::string make_request(int64_t tick, const sim::Observation& obs,
                         const std::string& tasks_json,
                         const std::string& history_json);

struct Response {
  std::optional<sim::Action> action;
  std::optional<plan::CommutePlan> plan;
  std::string reason;
};

// Throws std::runtime_error when neither a valid action nor plan is present.
Response parse_response(const std::string& line);

}  // namespace ocs::proto
