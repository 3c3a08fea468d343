#include "ocs/episode.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "ocs/external_planner.hpp"
#include "ocs/planners.hpp"

namespace ocs::tasks {

namespace {

double unit(std::mt19937_64& rng) { return std::ldexp(double(rng() >> 11), -53); }

Vec2 spawn_outdoor(const WorldMap& map, uint64_t seed) {
  Vec2 lo{1e18, 1e18}, hi{-1e18, -1e18};
  auto add = [&](const Vec2& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  };
  for (const auto& r : map.bundle().roads)
    for (const auto& p : r.centerline) add(p);
  if (lo.x > hi.x) return {0, 0};
  std::mt19937_64 rng(seed ^ 0x737061776e303030ULL);
  for (int i = 0; i < 10000; ++i) {
    Vec2 p{lo.x + unit(rng) * (hi.x - lo.x), lo.y + unit(rng) * (hi.y - lo.y)};
    if (!map.point_in_any_building(p)) return p;
  }
  return lo;
}

Vec2 nearest_road_point(const WorldMap& map, const Vec2& p) {
  Vec2 best = p;
  double best_d = 1e18;
  for (const auto& r : map.bundle().roads) {
    for (size_t i = 0; i + 1 < r.centerline.size(); ++i) {
      Vec2 q = project_to_segment(p, r.centerline[i], r.centerline[i + 1]);
      double d = distance(p, q);
      if (d < best_d) {
        best_d = d;
        best = q;
      }
    }
  }
  return best;
}

// Waypoint follower along the road graph; falls back to a straight line.
// Doors sit on footprint boundaries, so when the hop to the first road
// vertex would cut through a building, detour via the nearest point on a
// road centerline (perpendicular to the facade).
class WalkRoute {
 public:
  WalkRoute() = default;
  WalkRoute(const WorldMap& map, const Vec2& from, const Vec2& to) {
    if (map.line_of_sight(from, to)) {
      waypoints_ = {to};
      return;
    }
    Vec2 rp_from = nearest_road_point(map, from);
    Vec2 rp_to = nearest_road_point(map, to);
    std::vector<Vec2> body;
    body.push_back(rp_from);
    auto pts = map.road_graph().shortest_path_points(rp_from, rp_to, 1e9);
    for (const auto& p : pts) body.push_back(p);
    body.push_back(rp_to);
    // drop consecutive near-duplicates and removable detours
    waypoints_.clear();
    for (const auto& p : body)
      if (waypoints_.empty() || distance(waypoints_.back(), p) > 0.5)
        waypoints_.push_back(p);
    waypoints_.push_back(to);
  }

  bool done() const { return done_; }

  sim::Action step(const sim::Observation& obs, double speed_cap,
                   double arrive_radius = 2.0) {
    while (next_ < waypoints_.size()) {
      double skip = next_ + 1 == waypoints_.size() ? arrive_radius : 3.0;
      if (distance(obs.pos, waypoints_[next_]) > skip) break;
      ++next_;
    }
    if (next_ >= waypoints_.size()) {
      done_ = true;
      return sim::Wait{};
    }
    // Sidestep after a blocked move so the follower cannot wedge forever.
    if (obs.status.kind == sim::StatusKind::failed && obs.status.detail == "blocked" &&
        !last_was_sidestep_) {
      last_was_sidestep_ = true;
      return sim::Turn{M_PI / 3.0};
    }
    last_was_sidestep_ = false;
    return plan::steer_toward(obs, waypoints_[next_], speed_cap, 1.0);
  }

 private:
  std::vector<Vec2> waypoints_;
  size_t next_ = 0;
  bool done_ = false;
  bool last_was_sidestep_ = false;
};

// Executes a CommutePlan leg by leg: walk legs follow the road graph, bus
// legs board the dwelling bus at the nearest stop of the serving line, bike
// legs rent at the nearest station and return at the leg's station.
class CommuteExecutor {
 public:
  CommuteExecutor(const WorldMap& map, plan::CommutePlan plan)
      : map_(map), plan_(std::move(plan)) {}

  bool done() const { return leg_ >= plan_.legs.size(); }

  sim::Action step(const sim::Observation& obs) {
    if (done()) return sim::Wait{};
    const plan::CommuteLeg& leg = plan_.legs[leg_];
    switch (leg.type) {
      case plan::TransitType::walk: return walk_step(obs, leg);
      case plan::TransitType::bus: return bus_step(obs, leg);
      case plan::TransitType::bike: return bike_step(obs, leg);
    }
    return sim::Wait{};
  }

  void attach(const sim::Simulator* simulator) { sim_ = simulator; }

 private:
  const WorldMap& map_;
  plan::CommutePlan plan_;
  const sim::Simulator* sim_ = nullptr;
  size_t leg_ = 0;
  int phase_ = 0;   // per-leg sub-state
  WalkRoute route_;
  bool route_ready_ = false;

  void next_leg() {
    ++leg_;
    phase_ = 0;
    route_ready_ = false;
  }

  sim::Action walk_step(const sim::Observation& obs, const plan::CommuteLeg& leg) {
    if (!route_ready_) {
      route_ = WalkRoute(map_, obs.pos, leg.point);
      route_ready_ = true;
    }
    sim::Action a = route_.step(obs, 2.0);
    if (route_.done()) {
      next_leg();
      return sim::Wait{};
    }
    return a;
  }

  sim::Action bus_step(const sim::Observation& obs, const plan::CommuteLeg& leg) {
    if (!leg.place || !sim_) return fallback_walk(obs, leg);
    const BusLine* line = nullptr;
    for (const auto& l : map_.bundle().bus_lines)
      if (std::find(l.stops.begin(), l.stops.end(), *leg.place) != l.stops.end())
        line = &l;
    if (!line) return fallback_walk(obs, leg);

    // boarding stop: nearest stop of this line to the current position
    const Place* board = nullptr;
    double best = 1e18;
    for (const auto& sid : line->stops) {
      const Place* p = map_.place(sid);
      if (!p || sid == *leg.place) continue;
      double d = distance(obs.pos, p->door);
      if (d < best) {
        best = d;
        board = p;
      }
    }
    if (!board) return fallback_walk(obs, leg);

    if (phase_ == 0) {   // walk to the boarding stop
      if (!route_ready_) {
        route_ = WalkRoute(map_, obs.pos, board->door);
        route_ready_ = true;
      }
      sim::Action a = route_.step(obs, 2.0);
      if (!route_.done()) return a;
      phase_ = 1;
    }
    if (phase_ == 1) {   // wait for a dwelling bus within boarding range
      for (const auto& bus : sim_->transit().buses) {
        if (bus.line == line->id && bus.dwell_remaining > 0.0 &&
            distance(obs.pos, bus.pos) <= 5.0) {
          phase_ = 2;
          return sim::EnterBus{line->id};
        }
      }
      return sim::Wait{};
    }
    if (phase_ == 2) {   // ride until the bus dwells at the target stop
      if (obs.mode != sim::AgentMode::on_bus) {
        // boarding failed; retry from the kerb
        phase_ = 1;
        return sim::Wait{};
      }
      for (const auto& bus : sim_->transit().buses) {
        if (bus.line != line->id) continue;
        int n = static_cast<int>(line->stops.size());
        int at = (bus.next_stop + n - 1) % n;
        if (bus.dwell_remaining > 0.0 && line->stops[at] == *leg.place) {
          phase_ = 3;
          return sim::ExitBus{};
        }
      }
      return sim::Wait{};
    }
    // phase 3: confirm we are off the bus
    if (obs.mode == sim::AgentMode::walking) next_leg();
    return sim::Wait{};
  }

  sim::Action bike_step(const sim::Observation& obs, const plan::CommuteLeg& leg) {
    if (!leg.place) return fallback_walk(obs, leg);
    const BikeStation* target = map_.station(*leg.place);
    if (!target) return fallback_walk(obs, leg);
    auto [near_id, near_d] = map_.nearest_station(obs.pos);
    if (near_id == target->id && obs.mode == sim::AgentMode::walking && phase_ == 0)
      return fallback_walk(obs, leg);
    const BikeStation* origin = map_.station(near_id);

    if (phase_ == 0) {   // walk to the origin station
      if (!route_ready_) {
        route_ = WalkRoute(map_, obs.pos, origin->location);
        route_ready_ = true;
      }
      sim::Action a = route_.step(obs, 2.0);
      if (!route_.done()) return a;
      phase_ = 1;
      return sim::EnterBike{origin->id};
    }
    if (phase_ == 1) {
      if (obs.mode != sim::AgentMode::riding_bike) {
        // no bike available: give up on the leg and walk
        return fallback_walk(obs, leg);
      }
      phase_ = 2;
      route_ = WalkRoute(map_, obs.pos, target->location);
      route_ready_ = true;
    }
    if (phase_ == 2) {   // ride to the target station
      sim::Action a = route_.step(obs, 5.0);
      if (!route_.done()) return a;
      phase_ = 3;
      return sim::ExitBike{target->id};
    }
    // phase 3: confirm the bike is returned
    if (obs.mode == sim::AgentMode::walking) {
      next_leg();
      return sim::Wait{};
    }
    return sim::ExitBike{target->id};
  }

  sim::Action fallback_walk(const sim::Observation& obs, const plan::CommuteLeg& leg) {
    if (!route_ready_ || phase_ != 99) {
      route_ = WalkRoute(map_, obs.pos, leg.point);
      route_ready_ = true;
      phase_ = 99;
    }
    sim::Action a = route_.step(obs, 2.0);
    if (route_.done()) {
      next_leg();
      return sim::Wait{};
    }
    return a;
  }
};

// Per-agent decision function assembled from a PlannerBinding.
struct BoundPlanner {
  PlannerBinding binding;
  std::unique_ptr<plan::ExternalPlanner> external;
  std::unique_ptr<CommuteExecutor> executor;

  // FSM state (one of these, by task kind)
  std::optional<plan::DeliveryFsm> delivery;
  std::optional<plan::CarryFsm> carry;
  std::optional<plan::SearchFsm> search;

  std::string tasks_json = "[]";

  sim::Action act(const sim::Observation& obs, std::vector<std::string>* failures) {
    if (binding.name == "wait") return sim::Wait{};
    if (binding.name == "random") return plan::random_planner(obs, binding.seed);
    if (binding.name == "callback" && binding.callback) return binding.callback(obs);
    if (binding.name == "fsm") {
      if (delivery) return plan::fsm_delivery_step(*delivery, obs);
      if (carry) return plan::fsm_carry_step(*carry, obs);
      if (search) return plan::fsm_search_step(*search, obs);
      return sim::Wait{};
    }
    if ((binding.name == "walk" || binding.name == "mcts") && executor)
      return executor->step(obs);
    if (binding.name == "external" && external) {
      auto r = external->query(obs.sim_time, obs, tasks_json, "[]");
      if (!r.failure.empty() && failures) failures->push_back(r.failure);
      if (r.response.action) return *r.response.action;
      return sim::Wait{};
    }
    return sim::Wait{};
  }
};

Vec2 object_anchor(const WorldMap& map, const ObjectSpawn& o) {
  if (o.outdoor_pos) return *o.outdoor_pos;
  if (o.place) {
    const Place* p = map.place(*o.place);
    if (p) return p->door;
  }
  return {0, 0};
}

void add_task_objects(sim::Simulator& sim, const TaskSpec& task) {
  for (const auto& o : task.objects) {
    if (o.outdoor_pos)
      sim.add_object(o.id, *o.outdoor_pos);
    else if (o.place)
      sim.add_object_in_place(o.id, *o.place, o.container.value_or("floor"));
  }
}

bool object_delivered(const sim::Simulator& sim, const WorldMap& map,
                      const std::string& object_id, const std::string& dest_place) {
  const sim::ObjectState& o = sim.object(object_id);
  if (o.held_by) return false;
  if (o.place) return *o.place == dest_place;
  const Place* dest = map.place(dest_place);
  if (!dest || !o.pos) return false;
  return distance(*o.pos, dest->door) <= 5.0;
}

EpisodeOutcome run_assistant(const WorldMap& map, const TaskSpec& task,
                             const PlannerBinding& binding, int step_limit,
                             sim::SimConfig config) {
  sim::Simulator sim(map, config, task.seed);
  const Place* dest = task.destination_place.empty() ? nullptr
                                                     : map.place(task.destination_place);

  bool has_human = task.kind == TaskKind::carry && !task.human_id.empty();
  Vec2 hstart = has_human ? (task.objects.empty()
                                 ? spawn_outdoor(map, task.seed + 1)
                                 : object_anchor(map, task.objects.front()))
                          : Vec2{0, 0};

  // The assistant starts beside the human on carry tasks; otherwise at the
  // destination door (or an outdoor spawn when the task has none).
  Vec2 start = dest ? dest->door : spawn_outdoor(map, task.seed);
  if (has_human) {
    start = hstart;
    for (Vec2 off : {Vec2{3, 0}, Vec2{-3, 0}, Vec2{0, 3}, Vec2{0, -3}}) {
      if (!map.point_in_any_building(hstart + off)) {
        start = hstart + off;
        break;
      }
    }
  }
  sim.add_agent("agent0", start, 0.0);
  add_task_objects(sim, task);

  BoundPlanner planner;
  planner.binding = binding;
  planner.tasks_json = "[" + task.to_json() + "]";
  if (binding.name == "external")
    planner.external =
        std::make_unique<plan::ExternalPlanner>(binding.external_command);

  WalkRoute human_route;
  if (has_human) {
    sim.add_agent(task.human_id, hstart, 0.0);
    human_route = WalkRoute(map, hstart, dest ? dest->door : hstart);
  }

  if (binding.name == "fsm") {
    switch (task.kind) {
      case TaskKind::delivery: {
        plan::DeliveryFsm fsm;
        for (const auto& o : task.objects) fsm.task.object_ids.push_back(o.id);
        fsm.task.source = task.objects.empty() ? start
                                               : object_anchor(map, task.objects.front());
        fsm.task.destination = dest ? dest->door : start;
        fsm.task.destination_place = task.destination_place;
        planner.delivery = std::move(fsm);
        break;
      }
      case TaskKind::carry: {
        plan::CarryFsm fsm;
        fsm.task.human_id = task.human_id;
        for (const auto& o : task.objects) fsm.task.object_ids.push_back(o.id);
        fsm.task.destination = dest ? dest->door : start;
        fsm.task.destination_place = task.destination_place;
        planner.carry = std::move(fsm);
        break;
      }
      case TaskKind::search: {
        plan::SearchTask st;
        st.object_id = task.search_object;
        if (task.search_region) {
          st.region_min = task.search_region->min;
          st.region_max = task.search_region->max;
        }
        planner.search = plan::make_search_fsm(st, config.sense_range);
        break;
      }
      default: break;
    }
  } else if (binding.name == "walk" || binding.name == "mcts") {
    Vec2 goal = dest ? dest->door : start;
    plan::CommutePlan p =
        binding.name == "mcts"
            ? plan::mcts_plan(map, start, goal, binding.mcts_budget, {}, binding.seed)
            : plan::direct_walk_plan(start, goal, task.destination_place);
    planner.executor = std::make_unique<CommuteExecutor>(map, std::move(p));
    planner.executor->attach(&sim);
  }

  EpisodeOutcome out;
  out.result.kind = task.kind;

  bool target_seen = false;
  bool completed = false;
  int64_t end_tick = step_limit;

  for (int tick = 0; tick < step_limit; ++tick) {
    sim::Observation obs = sim.sense("agent0");
    std::map<std::string, sim::Action> actions;
    try {
      actions["agent0"] = planner.act(obs, &out.planner_failures);
    } catch (const std::exception&) {
      actions["agent0"] = sim::Wait{};
    }
    if (has_human) actions[task.human_id] = human_route.step(sim.sense(task.human_id), 1.2);

    if (task.kind == TaskKind::search)
      for (const auto& e : obs.visible_entities)
        if (e.id == task.search_object) target_seen = true;

    sim.step(actions);

    if (has_human) {
      ++out.result.total_frames;
      double d = distance(sim.agent("agent0").pos, sim.agent(task.human_id).pos);
      if (d >= 1.0 && d <= 5.0) ++out.result.follow_frames;
    }

    if (!sim.completions().empty()) {
      completed = true;
      end_tick = sim.sim_time();
      break;
    }
  }
  out.result.ticks = completed ? end_tick : step_limit;

  // subtask evaluation
  switch (task.kind) {
    case TaskKind::delivery:
      for (const auto& o : task.objects)
        out.result.subtask_success.push_back(
            object_delivered(sim, map, o.id, task.destination_place));
      break;
    case TaskKind::carry: {
      bool follow_ok = out.result.total_frames > 0 &&
                       2 * out.result.follow_frames >= out.result.total_frames;
      out.result.subtask_success.push_back(follow_ok);
      for (const auto& o : task.objects)
        out.result.subtask_success.push_back(
            object_delivered(sim, map, o.id, task.destination_place));
      break;
    }
    case TaskKind::search: {
      bool near = false;
      if (!task.search_object.empty()) {
        const sim::ObjectState& o = sim.object(task.search_object);
        if (o.pos)
          near = distance(sim.agent("agent0").pos, *o.pos) <= 10.0;
      }
      out.result.subtask_success.push_back(target_seen && completed && near);
      break;
    }
    default:
      for (size_t i = 0; i < task.subtasks.size(); ++i)
        out.result.subtask_success.push_back(false);
      break;
  }

  out.result.cash_spent = sim.total_fares_paid() + sim.total_bike_charges();
  out.result.trace_digest = sim.current_digest();
  out.trace_jsonl = sim.trace_jsonl();
  out.digest_chain = sim.digest_chain();
  return out;
}

EpisodeOutcome run_commute(const WorldMap& map, const TaskSpec& task,
                           const PlannerBinding& binding, int step_limit,
                           sim::SimConfig config) {
  EpisodeOutcome out;
  out.result.kind = TaskKind::commute;

  // legs: consecutive scheduled places, with the commute window length as
  // the on-time budget
  struct Leg {
    std::string place;
    int window_s = 0;
  };
  std::vector<Leg> legs;
  std::string first_place;
  const Activity* pending_commute = nullptr;
  for (const auto& a : task.schedule.activities) {
    if (a.type == "commute") {
      pending_commute = &a;
      continue;
    }
    if (!a.place) continue;
    if (first_place.empty()) first_place = *a.place;
    if (pending_commute) {
      legs.push_back({*a.place, pending_commute->end_s - pending_commute->start_s});
      pending_commute = nullptr;
    }
  }
  const Place* origin = map.place(first_place);
  if (!origin) throw TaskError("commute schedule has no grounded start place");

  sim::Simulator sim(map, config, task.seed);
  sim.add_agent("agent0", origin->door, 100.0);

  int64_t budget = step_limit;
  for (const auto& leg : legs) {
    const Place* dest = map.place(leg.place);
    if (!dest || budget <= 0) {
      out.result.commutes.push_back({leg.place, 0.0, 0.0, 0.0, true});
      out.result.subtask_success.push_back(false);
      continue;
    }
    Vec2 from = sim.agent("agent0").pos;
    plan::CommutePlan plan =
        binding.name == "mcts"
            ? plan::mcts_plan(map, from, dest->door, binding.mcts_budget, {},
                              binding.seed)
            : plan::direct_walk_plan(from, dest->door, leg.place);
    CommuteExecutor exec(map, std::move(plan));
    exec.attach(&sim);

    double cash0 = sim.agent("agent0").cash;
    int64_t t0 = sim.sim_time();
    double walked = 0.0;
    bool arrived = false;
    while (budget > 0) {
      sim::Observation obs = sim.sense("agent0");
      Vec2 before = obs.pos;
      bool was_walking = obs.mode == sim::AgentMode::walking;
      sim::Action a;
      try {
        a = exec.step(obs);
      } catch (const std::exception&) {
        a = sim::Wait{};
      }
      sim.step({{"agent0", a}});
      --budget;
      ++out.result.ticks;
      if (was_walking && sim.agent("agent0").mode == sim::AgentMode::walking)
        walked += distance(before, sim.agent("agent0").pos);
      if (exec.done() || distance(sim.agent("agent0").pos, dest->door) <= 2.5) {
        arrived = true;
        break;
      }
    }
    double duration = static_cast<double>(sim.sim_time() - t0);
    CommuteRecord rec;
    rec.destination = leg.place;
    rec.duration_s = duration;
    rec.price = cash0 - sim.agent("agent0").cash;
    rec.walk_m = walked;
    rec.late = !arrived || duration > static_cast<double>(leg.window_s);
    out.result.commutes.push_back(rec);
    out.result.subtask_success.push_back(arrived);
  }

  out.result.cash_spent = sim.total_fares_paid() + sim.total_bike_charges();
  out.result.trace_digest = sim.current_digest();
  out.trace_jsonl = sim.trace_jsonl();
  out.digest_chain = sim.digest_chain();
  return out;
}

}  // namespace

EpisodeOutcome run_episode(const WorldMap& map, const TaskSpec& task,
                           const PlannerBinding& planner, int step_limit,
                           sim::SimConfig config) {
  switch (task.kind) {
    case TaskKind::commute:
      return run_commute(map, task, planner, step_limit, config);
    case TaskKind::influence:
      throw TaskError(
          "influence rankings are collected via the external-planner bridge; "
          "use eval_influence");
    default:
      return run_assistant(map, task, planner, step_limit, config);
  }
}

}  // namespace ocs::tasks
