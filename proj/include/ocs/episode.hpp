#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ocs/simcore.hpp"
#include "ocs/tasks.hpp"

namespace ocs::tasks {

// How a controlled agent picks actions each tick.
struct PlannerBinding {
  // "random" | "fsm" | "mcts" | "walk" | "wait" | "external" | "callback"
  std::string name = "wait";
  std::string external_command;   // for "external"
  std::function<sim::Action(const sim::Observation&)> callback;   // for "callback"
  uint64_t seed = 0;
  int mcts_budget = 2000;
};

struct EpisodeOutcome {
  EpisodeResult result;
  std::string trace_jsonl;
  std::vector<uint64_t> digest_chain;
  // Failure statuses surfaced by the external-planner bridge, in tick order.
  std::vector<std::string> planner_failures;
};

// Loops sense -> plan -> step until all subtasks resolve or step_limit.
// A planner exception makes that agent wait for the tick; the episode
// continues. The controlled agent is "agent0".
EpisodeOutcome run_episode(const WorldMap& map, const TaskSpec& task,
                           const PlannerBinding& planner, int step_limit = 1500,
                           sim::SimConfig config = {});

}  // namespace ocs::tasks
