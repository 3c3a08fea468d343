#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ocs/simcore.hpp"
#include "ocs/worldmodel.hpp"

namespace ocs::plan {

// ----------------------------------------------------------------- commute

enum class TransitType { walk, bus, bike };

struct CommuteLeg {
  std::optional<std::string> place;   // stop/station/destination place id
  Vec2 point;                         // goal position
  TransitType type = TransitType::walk;
};

struct CommutePlan {
  std::vector<CommuteLeg> legs;
};

CommutePlan direct_walk_plan(const Vec2& start, const Vec2& destination,
                             const std::string& dest_place = "");

// ------------------------------------------------------------------- random

sim::Action random_planner(const sim::Observation& obs, uint64_t seed);

// Names of the action variants the random planner chooses between, given
// the current observation. Exposed for distribution tests.
std::vector<std::string> legal_variants(const sim::Observation& obs);

// --------------------------------------------------------------------- MCTS

struct MctsParams {
  double alpha = 1.0;
  double c = 1.41;
  double walk_step = 25.0;   // meters per walk child
  double v_walk = 2.0;
  double v_bike = 5.0;
  double v_bus = 10.0;
  double goal_tolerance = 1.0;
};

struct MctsNode {
  Vec2 location;
  TransitType arrived_by = TransitType::walk;
  std::optional<std::string> arrived_place;
  double d_walk = 0.0, d_bike = 0.0, d_bus = 0.0;
  int parent = -1;
  std::vector<int> children;
  int visits = 0;       // N
  double total = 0.0;   // W
  bool expanded = false;
};

class MctsTree {
 public:
  MctsTree(const WorldMap& map, const Vec2& start, const Vec2& goal, MctsParams params);

  // up to 1 + N_bus + N_bike children
  void expand(int node_index);

  // unvisited child first (in child order), else UCB1 argmax
  int ucb1_select(int node_index) const;

  double simulate_reward(int node_index) const;

  void backpropagate(int node_index, double reward);

  void run(int iterations);

  CommutePlan best_plan() const;

  const MctsNode& node(int i) const { return nodes_[i]; }
  const std::vector<MctsNode>& nodes() const { return nodes_; }
  bool is_terminal(const MctsNode& n) const;

 private:
  const WorldMap& map_;
  Vec2 goal_;
  MctsParams params_;
  std::vector<MctsNode> nodes_;
};

// R = -(d_walk/v_walk + d_bike/v_bike + d_bus/v_bus) - alpha * d_target
double simulate_reward(double d_walk, double d_bike, double d_bus, double d_target,
                       const MctsParams& params);

CommutePlan mcts_plan(const WorldMap& map, const Vec2& start, const Vec2& goal,
                      int budget, MctsParams params = {}, uint64_t seed = 0);

// ---------------------------------------------------------------- RL reward

struct Transition {
  bool goal_reached = false;
  double d0 = 0.0;   // distance to goal before the step
  double dt = 0.0;   // distance to goal after the step
  bool walked = false;
  double cash_spent = 0.0;
  bool action_taken = false;
};

double rl_reward(const Transition& t);

// ------------------------------------------------------- heuristic automata

struct DeliveryTask {
  std::vector<std::string> object_ids;
  Vec2 source;
  Vec2 destination;
  std::string destination_place;
};

// Delivery automaton states: 0 goto(source), 1 search near source,
// 2 navigate to object, 3 pick, 4 goto(destination), 5 drop, 6 send
// complete, 7 finished.
struct DeliveryFsm {
  int state = 0;
  DeliveryTask task;
  std::vector<std::string> delivered;
  std::optional<std::string> current_target;
  double sweep_angle = 0.0;
  std::vector<int> visited_states = {0};
};

sim::Action fsm_delivery_step(DeliveryFsm& fsm, const sim::Observation& obs);

struct CarryTask {
  std::string human_id;
  std::vector<std::string> object_ids;
  Vec2 destination;
  std::string destination_place;
};

// Carry automaton: 0 locate human, 1 collect objects, 2 follow within the
// [band_min, band_max] distance band, 3 finished.
struct CarryFsm {
  int state = 0;
  CarryTask task;
  double band_min = 1.0;
  double band_max = 5.0;
  std::optional<Vec2> last_seen;
  double sweep_angle = 0.0;
  std::vector<std::string> delivered;
  std::optional<std::string> current_target;
};

sim::Action fsm_carry_step(CarryFsm& fsm, const sim::Observation& obs);

struct SearchTask {
  std::string object_id;
  Vec2 region_min;
  Vec2 region_max;
};

// Search automaton: 0 sweep the region, 1 navigate to object,
// 2 finished (success), 3 finished (failure: region swept, nothing found).
struct SearchFsm {
  int state = 0;
  SearchTask task;
  std::vector<Vec2> waypoints;
  size_t next_waypoint = 0;
  double sweep_angle = 0.0;
  std::optional<Vec2> object_pos;
};

SearchFsm make_search_fsm(const SearchTask& task, double sense_range = 30.0);

sim::Action fsm_search_step(SearchFsm& fsm, const sim::Observation& obs);

// Direct steering toward a point: turn to face (5 deg tolerance), then
// step at most speed_cap. Shared by the automata.
sim::Action steer_toward(const sim::Observation& obs, const Vec2& target,
                         double speed_cap = 2.0, double arrive_radius = 2.0);

}  // namespace ocs::plan
