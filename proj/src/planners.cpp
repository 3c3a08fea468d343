#include "ocs/planners.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ocs::plan {

// ----------------------------------------------------------------- commute

CommutePlan direct_walk_plan(const Vec2& /*start*/, const Vec2& destination,
                             const std::string& dest_place) {
  CommutePlan plan;
  CommuteLeg leg;
  if (!dest_place.empty()) leg.place = dest_place;
  leg.point = destination;
  leg.type = TransitType::walk;
  plan.legs.push_back(std::move(leg));
  return plan;
}

// ------------------------------------------------------------------- random

std::vector<std::string> legal_variants(const sim::Observation& obs) {
  std::vector<std::string> v;
  switch (obs.mode) {
    case sim::AgentMode::walking: {
      v = {"move_forward", "turn", "communicate", "wait"};
      bool bus_near = false, station_near = false;
      for (const auto& e : obs.visible_entities) {
        if (e.kind == sim::EntityKind::bus && e.dist <= 5.0) bus_near = true;
        if (e.kind == sim::EntityKind::station && e.dist <= 5.0) station_near = true;
      }
      if (bus_near) v.push_back("enter_bus");
      if (station_near) v.push_back("enter_bike");
      if (!obs.accessible_places.empty()) v.push_back("enter_place");
      break;
    }
    case sim::AgentMode::riding_bike: {
      v = {"move_forward", "turn", "wait"};
      for (const auto& e : obs.visible_entities)
        if (e.kind == sim::EntityKind::station && e.dist <= 5.0) {
          v.push_back("exit_bike");
          break;
        }
      break;
    }
    case sim::AgentMode::on_bus:
      v = {"exit_bus", "wait"};
      break;
    case sim::AgentMode::inside_place:
      v = {"exit_place", "wait"};
      break;
  }
  return v;
}

sim::Action random_planner(const sim::Observation& obs, uint64_t seed) {
  auto variants = legal_variants(obs);
  if (variants.empty()) return sim::Wait{};
  // deterministic in (seed, tick)
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(obs.sim_time + 1)));
  auto unit = [&] { return std::ldexp(static_cast<double>(rng() >> 11), -53); };
  const std::string& name = variants[rng() % variants.size()];

  if (name == "move_forward") return sim::MoveForward{unit() * 2.0};
  if (name == "turn") return sim::Turn{(unit() * 2.0 - 1.0) * M_PI};
  if (name == "communicate") return sim::Communicate{"hello"};
  if (name == "enter_bus") {
    for (const auto& e : obs.visible_entities)
      if (e.kind == sim::EntityKind::bus && e.dist <= 5.0) return sim::EnterBus{e.id};
  }
  if (name == "enter_bike") {
    for (const auto& e : obs.visible_entities)
      if (e.kind == sim::EntityKind::station && e.dist <= 5.0)
        return sim::EnterBike{e.id};
  }
  if (name == "exit_bike") {
    for (const auto& e : obs.visible_entities)
      if (e.kind == sim::EntityKind::station && e.dist <= 5.0)
        return sim::ExitBike{e.id};
  }
  if (name == "enter_place")
    return sim::EnterPlace{obs.accessible_places[rng() % obs.accessible_places.size()]};
  if (name == "exit_bus") return sim::ExitBus{};
  if (name == "exit_place") return sim::ExitPlace{};
  return sim::Wait{};
}

// --------------------------------------------------------------------- MCTS

double simulate_reward(double d_walk, double d_bike, double d_bus, double d_target,
                       const MctsParams& p) {
  return -(d_walk / p.v_walk + d_bike / p.v_bike + d_bus / p.v_bus) -
         p.alpha * d_target;
}

MctsTree::MctsTree(const WorldMap& map, const Vec2& start, const Vec2& goal,
                   MctsParams params)
    : map_(map), goal_(goal), params_(params) {
  MctsNode root;
  root.location = start;
  nodes_.push_back(std::move(root));
}

bool MctsTree::is_terminal(const MctsNode& n) const {
  return distance(n.location, goal_) <= params_.goal_tolerance;
}

void MctsTree::expand(int idx) {
  MctsNode& n = nodes_[idx];
  if (n.expanded || is_terminal(n)) {
    n.expanded = true;
    return;
  }
  const Vec2 loc = n.location;
  const double dw = n.d_walk, db = n.d_bike, dbus = n.d_bus;
  n.expanded = true;

  auto add_child = [&](MctsNode child) {
    child.parent = idx;
    nodes_.push_back(std::move(child));
    nodes_[idx].children.push_back(static_cast<int>(nodes_.size()) - 1);
  };

  // walk child: step toward the goal
  {
    MctsNode child;
    double d = distance(loc, goal_);
    if (d <= params_.walk_step) {
      child.location = goal_;
    } else {
      Vec2 dir = (goal_ - loc) * (1.0 / d);
      child.location = loc + dir * params_.walk_step;
    }
    child.arrived_by = TransitType::walk;
    child.d_walk = dw + distance(loc, child.location);
    child.d_bike = db;
    child.d_bus = dbus;
    add_child(std::move(child));
  }

  // bus children: ride from the nearest stop to every other stop
  const auto& bundle = map_.bundle();
  if (!bundle.bus_lines.empty()) {
    auto [near_stop, walk_d] = map_.nearest_stop(loc);
    const Place* near_place = map_.place(near_stop);
    for (const auto& stop_id : map_.stop_place_ids()) {
      if (stop_id == near_stop) continue;
      const Place* p = map_.place(stop_id);
      MctsNode child;
      child.location = p->door;
      child.arrived_by = TransitType::bus;
      child.arrived_place = stop_id;
      child.d_walk = dw + walk_d;
      child.d_bike = db;
      child.d_bus = dbus + distance(near_place->door, p->door);
      add_child(std::move(child));
    }
  }

  // bike children: ride from the nearest station to every other station
  if (!bundle.bike_stations.empty()) {
    auto [near_station, walk_d] = map_.nearest_station(loc);
    const BikeStation* ns = map_.station(near_station);
    for (const auto& st : bundle.bike_stations) {
      if (st.id == near_station) continue;
      MctsNode child;
      child.location = st.location;
      child.arrived_by = TransitType::bike;
      child.arrived_place = st.id;
      child.d_walk = dw + walk_d;
      child.d_bike = db + distance(ns->location, st.location);
      child.d_bus = dbus;
      add_child(std::move(child));
    }
  }
}

int MctsTree::ucb1_select(int idx) const {
  const MctsNode& n = nodes_[idx];
  for (int c : n.children)
    if (nodes_[c].visits == 0) return c;
  int best = n.children.front();
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c : n.children) {
    const MctsNode& child = nodes_[c];
    double score = child.total / child.visits +
                   params_.c * std::sqrt(std::log(static_cast<double>(n.visits)) /
                                         child.visits);
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

double MctsTree::simulate_reward(int idx) const {
  const MctsNode& n = nodes_[idx];
  return plan::simulate_reward(n.d_walk, n.d_bike, n.d_bus,
                               distance(n.location, goal_), params_);
}

void MctsTree::backpropagate(int idx, double reward) {
  for (int i = idx; i != -1; i = nodes_[i].parent) {
    nodes_[i].visits += 1;
    nodes_[i].total += reward;
  }
}

void MctsTree::run(int iterations) {
  for (int it = 0; it < iterations; ++it) {
    int cur = 0;
    // selection down to an unexpanded or terminal node
    while (nodes_[cur].expanded && !nodes_[cur].children.empty() &&
           !is_terminal(nodes_[cur]))
      cur = ucb1_select(cur);
    if (!nodes_[cur].expanded) {
      expand(cur);
      if (!nodes_[cur].children.empty()) cur = nodes_[cur].children.front();
    }
    backpropagate(cur, simulate_reward(cur));
  }
}

CommutePlan MctsTree::best_plan() const {
  CommutePlan plan;
  int cur = 0;
  while (!is_terminal(nodes_[cur]) && !nodes_[cur].children.empty()) {
    int best = -1;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (int c : nodes_[cur].children) {
      if (nodes_[c].visits == 0) continue;
      double mean = nodes_[c].total / nodes_[c].visits;
      if (mean > best_mean) {
        best_mean = mean;
        best = c;
      }
    }
    if (best < 0) break;
    const MctsNode& n = nodes_[best];
    CommuteLeg leg;
    leg.place = n.arrived_place;
    leg.point = n.location;
    leg.type = n.arrived_by;
    plan.legs.push_back(std::move(leg));
    cur = best;
  }
  // merge consecutive walk legs into the final one
  std::vector<CommuteLeg> merged;
  for (auto& leg : plan.legs) {
    if (!merged.empty() && merged.back().type == TransitType::walk &&
        leg.type == TransitType::walk && !merged.back().place) {
      merged.back() = leg;
    } else {
      merged.push_back(leg);
    }
  }
  plan.legs = std::move(merged);
  if (plan.legs.empty()) {
    CommuteLeg leg;
    leg.point = goal_;
    plan.legs.push_back(leg);
  }
  return plan;
}

CommutePlan mcts_plan(const WorldMap& map, const Vec2& start, const Vec2& goal,
                      int budget, MctsParams params, uint64_t /*seed*/) {
  if (budget < 1) budget = 1;
  MctsTree tree(map, start, goal, params);
  tree.run(budget);
  return tree.best_plan();
}

// ---------------------------------------------------------------- RL reward

double rl_reward(const Transition& t) {
  double r = 0.0;
  if (t.goal_reached) r += 1000.0;
  r += t.d0 - t.dt;
  if (t.walked) r -= 1.0;
  r -= t.cash_spent;
  if (t.action_taken) r -= 0.1;
  return r;
}

// ------------------------------------------------------- heuristic automata

sim::Action steer_toward(const sim::Observation& obs, const Vec2& target,
                         double speed_cap, double arrive_radius) {
  double d = distance(obs.pos, target);
  if (d <= arrive_radius) return sim::Wait{};
  double bearing = std::atan2(target.y - obs.pos.y, target.x - obs.pos.x);
  double delta = normalize_angle(bearing - obs.heading);
  if (std::abs(delta) > 5.0 * M_PI / 180.0) return sim::Turn{delta};
  return sim::MoveForward{std::min(speed_cap, d)};
}

namespace {

const sim::VisibleEntity* find_visible(const sim::Observation& obs,
                                       const std::string& id) {
  for (const auto& e : obs.visible_entities)
    if (e.id == id) return &e;
  return nullptr;
}

bool arrived_at(const sim::Observation& obs, const Vec2& p, double radius) {
  return distance(obs.pos, p) <= radius;
}

}  // namespace

sim::Action fsm_delivery_step(DeliveryFsm& fsm, const sim::Observation& obs) {
  auto go = [&](int next) {
    if (next != fsm.state) {
      fsm.state = next;
      fsm.visited_states.push_back(next);
    }
  };
  auto remaining = [&] {
    std::vector<std::string> out;
    for (const auto& id : fsm.task.object_ids) {
      bool done = std::find(fsm.delivered.begin(), fsm.delivered.end(), id) !=
                  fsm.delivered.end();
      bool held = std::find(obs.held.begin(), obs.held.end(), id) != obs.held.end();
      if (!done && !held) out.push_back(id);
    }
    return out;
  };

  switch (fsm.state) {
    case 0: {   // goto(source)
      if (arrived_at(obs, fsm.task.source, 3.0)) {
        go(1);
        return sim::Wait{};
      }
      return steer_toward(obs, fsm.task.source);
    }
    case 1: {   // search near source
      for (const auto& id : remaining()) {
        if (find_visible(obs, id)) {
          fsm.current_target = id;
          go(2);
          return sim::Wait{};
        }
      }
      fsm.sweep_angle += M_PI / 6.0;
      return sim::Turn{M_PI / 6.0};
    }
    case 2: {   // navigate to object
      const auto* e = fsm.current_target ? find_visible(obs, *fsm.current_target)
                                         : nullptr;
      if (!e) {
        fsm.current_target.reset();
        go(obs.held.empty() ? 1 : 4);
        return sim::Wait{};
      }
      if (e->dist <= 1.4) {
        go(3);
        return sim::Wait{};
      }
      return steer_toward(obs, e->position, 2.0, 1.2);
    }
    case 3: {   // pick object(s)
      if (obs.held.size() >= 2) {
        fsm.current_target.reset();
        go(4);   // hands full
        return sim::Wait{};
      }
      if (fsm.current_target) {
        const auto* e = find_visible(obs, *fsm.current_target);
        bool already_held = std::find(obs.held.begin(), obs.held.end(),
                                      *fsm.current_target) != obs.held.end();
        if (!already_held && e && e->dist <= 1.5) {
          std::string id = *fsm.current_target;
          fsm.current_target.reset();
          return sim::Pick{id, obs.held.empty() ? 0 : 1};
        }
        fsm.current_target.reset();
        return sim::Wait{};
      }
      // pick another nearby remaining object if a hand is free
      for (const auto& id : remaining()) {
        const auto* e = find_visible(obs, id);
        if (e && e->dist <= 1.5) return sim::Pick{id, obs.held.empty() ? 0 : 1};
        if (e) {
          fsm.current_target = id;
          go(2);
          return sim::Wait{};
        }
      }
      // no target: where next depends on whether we carry anything
      go(obs.held.empty() ? 1 : 4);
      return sim::Wait{};
    }
    case 4: {   // goto(destination)
      if (arrived_at(obs, fsm.task.destination, 3.0)) {
        go(5);
        return sim::Wait{};
      }
      return steer_toward(obs, fsm.task.destination);
    }
    case 5: {   // drop at destination
      if (!obs.held.empty()) {
        std::string id = obs.held.front();
        fsm.delivered.push_back(id);
        return sim::Put{id, obs.pos, std::nullopt};
      }
      bool all_done = fsm.delivered.size() >= fsm.task.object_ids.size();
      go(all_done ? 6 : 0);
      return sim::Wait{};
    }
    case 6: {   // send complete
      go(7);
      return sim::TaskComplete{0};
    }
    default:
      return sim::Wait{};
  }
}

sim::Action fsm_carry_step(CarryFsm& fsm, const sim::Observation& obs) {
  const auto* human = find_visible(obs, fsm.task.human_id);
  if (human) fsm.last_seen = human->position;

  switch (fsm.state) {
    case 0: {   // locate the human
      if (human) {
        fsm.state = fsm.task.object_ids.empty() ? 2 : 1;
        return sim::Wait{};
      }
      if (fsm.last_seen && !arrived_at(obs, *fsm.last_seen, 3.0))
        return steer_toward(obs, *fsm.last_seen);
      fsm.sweep_angle += M_PI / 6.0;
      return sim::Turn{M_PI / 6.0};
    }
    case 1: {   // collect task objects
      for (const auto& id : fsm.task.object_ids) {
        bool held = std::find(obs.held.begin(), obs.held.end(), id) != obs.held.end();
        bool done = std::find(fsm.delivered.begin(), fsm.delivered.end(), id) !=
                    fsm.delivered.end();
        if (held || done) continue;
        const auto* e = find_visible(obs, id);
        if (e && e->dist <= 1.5) return sim::Pick{id, obs.held.empty() ? 0 : 1};
        if (e) return steer_toward(obs, e->position, 2.0, 1.2);
      }
      fsm.state = 2;
      return sim::Wait{};
    }
    case 2: {   // follow within the distance band
      if (!human) {
        fsm.state = 0;
        return sim::Wait{};
      }
      if (human->dist > fsm.band_max)
        return steer_toward(obs, human->position, 2.0, fsm.band_max - 0.5);
      if (human->dist < fsm.band_min) return sim::Wait{};   // let them pull ahead
      // in band: drop held objects once we are at the destination
      if (arrived_at(obs, fsm.task.destination, 5.0) && !obs.held.empty()) {
        std::string id = obs.held.front();
        fsm.delivered.push_back(id);
        return sim::Put{id, obs.pos, std::nullopt};
      }
      if (arrived_at(obs, fsm.task.destination, 5.0) && obs.held.empty() &&
          fsm.delivered.size() >= fsm.task.object_ids.size()) {
        fsm.state = 3;
        return sim::TaskComplete{0};
      }
      return sim::Wait{};
    }
    default:
      return sim::Wait{};
  }
}

SearchFsm make_search_fsm(const SearchTask& task, double sense_range) {
  SearchFsm fsm;
  fsm.task = task;
  double spacing = std::max(5.0, sense_range);
  // serpentine sweep over the region box
  bool flip = false;
  for (double y = task.region_min.y + spacing / 2; y <= task.region_max.y;
       y += spacing) {
    std::vector<double> xs;
    for (double x = task.region_min.x + spacing / 2; x <= task.region_max.x;
         x += spacing)
      xs.push_back(x);
    if (xs.empty()) xs.push_back((task.region_min.x + task.region_max.x) / 2);
    if (flip) std::reverse(xs.begin(), xs.end());
    for (double x : xs) fsm.waypoints.push_back({x, y});
    flip = !flip;
  }
  if (fsm.waypoints.empty())
    fsm.waypoints.push_back({(task.region_min.x + task.region_max.x) / 2,
                             (task.region_min.y + task.region_max.y) / 2});
  return fsm;
}

sim::Action fsm_search_step(SearchFsm& fsm, const sim::Observation& obs) {
  const auto* target = find_visible(obs, fsm.task.object_id);
  if (target) fsm.object_pos = target->position;

  switch (fsm.state) {
    case 0: {   // sweep
      if (fsm.object_pos) {
        fsm.state = 1;
        return sim::Wait{};
      }
      if (fsm.next_waypoint >= fsm.waypoints.size()) {
        fsm.state = 3;   // region swept, nothing found
        return sim::Wait{};
      }
      const Vec2& wp = fsm.waypoints[fsm.next_waypoint];
      if (arrived_at(obs, wp, 2.5)) {
        // full spin at the waypoint before moving on
        if (fsm.sweep_angle < 2.0 * M_PI) {
          fsm.sweep_angle += M_PI / 3.0;
          return sim::Turn{M_PI / 3.0};
        }
        fsm.sweep_angle = 0.0;
        fsm.next_waypoint += 1;
        return sim::Wait{};
      }
      return steer_toward(obs, wp);
    }
    case 1: {   // navigate to the object
      if (target) fsm.object_pos = target->position;
      if (arrived_at(obs, *fsm.object_pos, 10.0) && target) {
        fsm.state = 2;
        return sim::TaskComplete{0};
      }
      return steer_toward(obs, *fsm.object_pos, 2.0, 8.0);
    }
    default:
      return sim::Wait{};
  }
}

}  // namespace ocs::plan
