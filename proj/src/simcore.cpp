#include "ocs/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace ocs::sim {

using nlohmann::json;

std::string action_name(const Action& a) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, MoveForward>) return "move_forward";
        else if constexpr (std::is_same_v<T, Turn>) return "turn";
        else if constexpr (std::is_same_v<T, EnterBus>) return "enter_bus";
        else if constexpr (std::is_same_v<T, ExitBus>) return "exit_bus";
        else if constexpr (std::is_same_v<T, EnterBike>) return "enter_bike";
        else if constexpr (std::is_same_v<T, ExitBike>) return "exit_bike";
        else if constexpr (std::is_same_v<T, EnterPlace>) return "enter_place";
        else if constexpr (std::is_same_v<T, ExitPlace>) return "exit_place";
        else if constexpr (std::is_same_v<T, Pick>) return "pick";
        else if constexpr (std::is_same_v<T, Put>) return "put";
        else if constexpr (std::is_same_v<T, Communicate>) return "communicate";
        else if constexpr (std::is_same_v<T, TaskComplete>) return "task_complete";
        else return "wait";
      },
      a);
}

namespace {
constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

uint64_t fnv1a(uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}
}  // namespace

Simulator::Simulator(const WorldMap& map, SimConfig config, uint64_t seed)
    : map_(map), config_(config) {
  (void)seed;   // reserved for stochastic extensions; the core loop is seed-free
  // bus loop polylines follow road shortest paths between consecutive stops
  for (const auto& line : map_.bundle().bus_lines) {
    Polyline loop;
    std::vector<double> arcs;
    const auto& stops = line.stops;
    for (size_t i = 0; i < stops.size(); ++i) {
      const Place* a = map_.place(stops[i]);
      const Place* b = map_.place(stops[(i + 1) % stops.size()]);
      arcs.push_back(polyline_length(loop));
      auto leg = map_.road_graph().shortest_path_points(a->door, b->door);
      if (leg.size() < 2) leg = {a->door, b->door};
      leg.front() = a->door;
      leg.back() = b->door;
      if (!loop.empty()) loop.pop_back();   // avoid duplicating the shared stop point
      loop.insert(loop.end(), leg.begin(), leg.end());
    }
    bus_paths_[line.id] = std::move(loop);
    stop_arcs_[line.id] = std::move(arcs);

    BusState bus;
    bus.line = line.id;
    bus.arc = stop_arcs_[line.id].front();
    bus.dwell_remaining = config_.bus_dwell;
    bus.next_stop = 1 % static_cast<int>(stops.size());
    bus.pos = point_along(bus_paths_[line.id], bus.arc);
    transit_.buses.push_back(std::move(bus));
  }
  for (const auto& s : map_.bundle().bike_stations)
    transit_.station_count[s.id] = s.initial_count;
}

void Simulator::add_agent(const std::string& id, const Vec2& pos, double cash,
                          double heading) {
  AgentState a;
  a.id = id;
  a.pos = pos;
  a.cash = cash;
  a.heading = heading;
  if (!agents_.emplace(id, std::move(a)).second)
    throw SimError("duplicate agent id " + id);
}

void Simulator::add_object(const std::string& id, const Vec2& pos) {
  ObjectState o;
  o.id = id;
  o.pos = pos;
  objects_[id] = std::move(o);
}

void Simulator::add_object_in_place(const std::string& id, const std::string& place,
                                    const std::string& container) {
  if (!map_.place(place)) throw SimError("unknown place " + place);
  ObjectState o;
  o.id = id;
  o.place = place;
  o.container = container;
  objects_[id] = std::move(o);
}

const AgentState& Simulator::agent(const std::string& id) const {
  auto it = agents_.find(id);
  if (it == agents_.end()) throw SimError("unknown agent " + id);
  return it->second;
}

AgentState& Simulator::agent_mut(const std::string& id) {
  auto it = agents_.find(id);
  if (it == agents_.end()) throw SimError("unknown agent " + id);
  return it->second;
}

const ObjectState& Simulator::object(const std::string& id) const {
  auto it = objects_.find(id);
  if (it == objects_.end()) throw SimError("unknown object " + id);
  return it->second;
}

int Simulator::total_bikes() const {
  int n = 0;
  for (const auto& [id, c] : transit_.station_count) n += c;
  n += static_cast<int>(transit_.rentals.size());
  return n;
}

void Simulator::fail(AgentState& a, const std::string& reason) {
  a.status = {StatusKind::failed, reason};
}

void Simulator::record(int64_t tick, const std::string& payload) {
  trace_.push_back({tick, payload});
}

void Simulator::apply_action(AgentState& a, const Action& action) {
  a.status = {StatusKind::idle, ""};

  if (auto* mv = std::get_if<MoveForward>(&action)) {
    if (mv->distance < 0.0 || !std::isfinite(mv->distance)) {
      fail(a, "bad distance");
      return;
    }
    if (a.mode == AgentMode::on_bus || a.mode == AgentMode::inside_place) {
      fail(a, "cannot move in this mode");
      return;
    }
    a.pending_move = mv->distance;
    a.status = {StatusKind::ongoing, "move_forward"};
  } else if (auto* t = std::get_if<Turn>(&action)) {
    if (!std::isfinite(t->angle)) {
      fail(a, "bad angle");
      return;
    }
    a.pending_move = 0.0;
    a.heading = normalize_angle(a.heading + t->angle);
  } else if (auto* eb = std::get_if<EnterBus>(&action)) {
    if (a.mode != AgentMode::walking) {
      fail(a, "not walking");
      return;
    }
    BusState* found = nullptr;
    for (auto& bus : transit_.buses) {
      if (bus.line == eb->line && bus.dwell_remaining > 0.0 &&
          distance(a.pos, bus.pos) <= config_.interact_radius) {
        found = &bus;
        break;
      }
    }
    if (!found) {
      fail(a, "no bus");
      return;
    }
    if (a.cash < config_.bus_fare) {
      fail(a, "insufficient cash");
      return;
    }
    a.cash -= config_.bus_fare;
    fares_paid_ += config_.bus_fare;
    a.mode = AgentMode::on_bus;
    a.mode_ref = found->line;
    a.pos = found->pos;
    a.pending_move = 0.0;
    found->passengers.push_back(a.id);
  } else if (std::get_if<ExitBus>(&action)) {
    if (a.mode != AgentMode::on_bus) {
      fail(a, "not on bus");
      return;
    }
    BusState* bus = nullptr;
    for (auto& b : transit_.buses)
      if (b.line == a.mode_ref) bus = &b;
    if (!bus || bus->dwell_remaining <= 0.0) {
      fail(a, "bus moving");
      return;
    }
    std::erase(bus->passengers, a.id);
    a.mode = AgentMode::walking;
    a.mode_ref.clear();
    a.pos = bus->pos;
  } else if (auto* ek = std::get_if<EnterBike>(&action)) {
    if (a.mode != AgentMode::walking) {
      fail(a, "not walking");
      return;
    }
    const BikeStation* st = map_.station(ek->station);
    if (!st || distance(a.pos, st->location) > config_.interact_radius) {
      fail(a, "no station");
      return;
    }
    if (transit_.station_count[st->id] < 1) {
      fail(a, "no bikes");
      return;
    }
    transit_.station_count[st->id] -= 1;
    transit_.rentals[a.id] = {a.id, sim_time_};
    a.mode = AgentMode::riding_bike;
  } else if (auto* xk = std::get_if<ExitBike>(&action)) {
    if (a.mode != AgentMode::riding_bike) {
      fail(a, "not riding");
      return;
    }
    const BikeStation* st = map_.station(xk->station);
    if (!st || distance(a.pos, st->location) > config_.interact_radius) {
      fail(a, "no station");
      return;
    }
    auto rental = transit_.rentals.find(a.id);
    int64_t ticks = rental == transit_.rentals.end()
                        ? 0
                        : sim_time_ - rental->second.start_tick;
    // per started minute, zero-length rides billed as one minute
    int64_t minutes = std::max<int64_t>(1, (ticks + 59) / 60);
    double price = config_.bike_rate * static_cast<double>(minutes);
    if (a.cash < price) {
      fail(a, "insufficient cash");
      return;
    }
    a.cash -= price;
    bike_charges_ += price;
    transit_.rentals.erase(a.id);
    transit_.station_count[st->id] += 1;
    a.mode = AgentMode::walking;
  } else if (auto* ep = std::get_if<EnterPlace>(&action)) {
    if (a.mode != AgentMode::walking) {
      fail(a, "not walking");
      return;
    }
    const Place* p = map_.place(ep->place);
    if (!p || distance(a.pos, p->door) > config_.interact_radius) {
      fail(a, "door out of range");
      return;
    }
    a.mode = AgentMode::inside_place;
    a.mode_ref = p->id;
    a.pos = p->door;
    a.pending_move = 0.0;
  } else if (std::get_if<ExitPlace>(&action)) {
    if (a.mode != AgentMode::inside_place) {
      fail(a, "not inside");
      return;
    }
    const Place* p = map_.place(a.mode_ref);
    a.mode = AgentMode::walking;
    a.pos = p ? p->door : a.pos;
    a.mode_ref.clear();
  } else if (auto* pk = std::get_if<Pick>(&action)) {
    auto it = objects_.find(pk->object);
    if (it == objects_.end()) {
      fail(a, "unknown object");
      return;
    }
    ObjectState& o = it->second;
    if (o.held_by) {
      fail(a, "object held");
      return;
    }
    bool reachable = false;
    if (a.mode == AgentMode::inside_place) {
      reachable = o.place && *o.place == a.mode_ref;
    } else {
      reachable = o.pos && distance(a.pos, *o.pos) <= config_.reach;
    }
    if (!reachable) {
      fail(a, "out of reach");
      return;
    }
    int arm = pk->arm == 1 ? 1 : 0;
    if (a.held[arm]) arm = 1 - arm;
    if (a.held[arm]) {
      fail(a, "hands full");
      return;
    }
    a.held[arm] = o.id;
    o.held_by = a.id;
    o.pos.reset();
    o.place.reset();
    o.container.reset();
  } else if (auto* pt = std::get_if<Put>(&action)) {
    int arm = -1;
    for (int i = 0; i < 2; ++i)
      if (a.held[i] && *a.held[i] == pt->object) arm = i;
    if (arm < 0) {
      fail(a, "not holding");
      return;
    }
    ObjectState& o = objects_[pt->object];
    if (pt->container) {
      if (a.mode != AgentMode::inside_place) {
        fail(a, "no container here");
        return;
      }
      o.place = a.mode_ref;
      o.container = pt->container;
      o.pos.reset();
    } else {
      Vec2 target = pt->target.value_or(a.pos);
      if (distance(a.pos, target) > config_.reach) {
        fail(a, "out of reach");
        return;
      }
      if (a.mode == AgentMode::inside_place) {
        o.place = a.mode_ref;
        o.container = "floor";
        o.pos.reset();
      } else {
        o.pos = target;
        o.place.reset();
        o.container.reset();
      }
    }
    o.held_by.reset();
    a.held[arm].reset();
  } else if (auto* cm = std::get_if<Communicate>(&action)) {
    if (cm->text.size() > 4096) {
      fail(a, "message too long");
      return;
    }
    outbox_.push_back({a.id, cm->text, a.pos});
  } else if (auto* tc = std::get_if<TaskComplete>(&action)) {
    completions_.push_back({sim_time_, a.id, tc->subtask});
  }
  // Wait: nothing
}

bool Simulator::blocked_at(const AgentState& a, const Vec2& next) const {
  if (map_.point_in_any_building(next)) return true;
  for (const auto& [id, other] : agents_) {
    if (id == a.id) continue;
    if (other.mode == AgentMode::on_bus || other.mode == AgentMode::inside_place)
      continue;
    if (distance(next, other.pos) < 2.0 * config_.agent_radius) return true;
  }
  return false;
}

void Simulator::motion_phase() {
  // per-tick allocation decided up front; integrated over substeps
  std::map<std::string, double> alloc;
  for (auto& [id, a] : agents_) {
    if (a.pending_move <= 0.0) continue;
    if (a.mode != AgentMode::walking && a.mode != AgentMode::riding_bike) continue;
    double cap = a.mode == AgentMode::walking ? config_.walk_speed : config_.bike_speed;
    alloc[id] = std::min(a.pending_move, cap);
  }
  std::map<std::string, double> moved;
  for (int s = 0; s < config_.substeps; ++s) {
    for (auto& [id, budget] : alloc) {
      AgentState& a = agents_.at(id);
      if (a.status.kind == StatusKind::failed) continue;
      double step_len = budget / config_.substeps;
      if (step_len <= 0.0) continue;
      Vec2 next{a.pos.x + std::cos(a.heading) * step_len,
                a.pos.y + std::sin(a.heading) * step_len};
      if (blocked_at(a, next)) {
        fail(a, "blocked");
        a.pending_move = 0.0;
        continue;
      }
      a.pos = next;
      moved[id] += step_len;
    }
  }
  for (auto& [id, dist] : moved) {
    AgentState& a = agents_.at(id);
    if (a.status.kind == StatusKind::failed) continue;
    a.pending_move = std::max(0.0, a.pending_move - alloc[id]);
    a.status = a.pending_move > 1e-9 ? ActionStatus{StatusKind::ongoing, "move_forward"}
                                     : ActionStatus{StatusKind::idle, ""};
  }
}

void Simulator::advance_buses(double dt) {
  for (auto& bus : transit_.buses) {
    const Polyline& loop = bus_paths_.at(bus.line);
    const auto& arcs = stop_arcs_.at(bus.line);
    double loop_len = polyline_length(loop);
    if (loop_len <= 0.0) continue;
    if (bus.dwell_remaining > 0.0) {
      bus.dwell_remaining = std::max(0.0, bus.dwell_remaining - dt);
    } else {
      double target = arcs[bus.next_stop];
      double ahead = target - bus.arc;
      if (ahead <= 0.0) ahead += loop_len;
      double advance = config_.bus_speed * dt;
      if (advance + 10.0 >= ahead) {
        // within snap range of the stop: dock and dwell
        bus.arc = target;
        bus.dwell_remaining = config_.bus_dwell;
        bus.next_stop = (bus.next_stop + 1) % static_cast<int>(arcs.size());
        record(sim_time_, json({{"type", "bus_arrive"},
                                {"line", bus.line},
                                {"stop", bus.next_stop}})
                              .dump());
      } else {
        bus.arc += advance;
        if (bus.arc >= loop_len) bus.arc -= loop_len;
      }
    }
    bus.pos = point_along(loop, bus.arc);
    for (const auto& pid : bus.passengers) {
      auto it = agents_.find(pid);
      if (it != agents_.end()) it->second.pos = bus.pos;
    }
  }
}

std::map<std::string, Observation> Simulator::step(
    const std::map<std::string, Action>& actions) {
  for (const auto& [id, act] : actions)
    if (!agents_.count(id)) throw SimError("unknown agent " + id);

  sim_time_ += 1;
  outbox_.clear();
  size_t trace_start = trace_.size();

  // action phase, deterministic id order (std::map)
  for (auto& [id, a] : agents_) {
    auto it = actions.find(id);
    if (it != actions.end()) {
      apply_action(a, it->second);
      record(sim_time_, json({{"type", "action"},
                              {"agent", id},
                              {"name", action_name(it->second)},
                              {"status", a.status.kind == StatusKind::failed
                                             ? "failed:" + a.status.detail
                                             : "ok"}})
                            .dump());
    } else if (a.pending_move > 0.0) {
      a.status = {StatusKind::ongoing, "move_forward"};
    }
  }

  motion_phase();
  advance_buses(1.0);

  for (auto& [id, a] : agents_) {
    record(sim_time_, json({{"type", "pose"},
                            {"agent", id},
                            {"x", a.pos.x},
                            {"y", a.pos.y},
                            {"heading", a.heading},
                            {"cash", a.cash}})
                          .dump());
  }

  last_messages_.clear();
  for (const auto& m : outbox_) last_messages_.push_back({m.sender, m.text});

  // digest chain over this tick's events
  uint64_t h = digests_.empty() ? kFnvOffset : digests_.back();
  for (size_t i = trace_start; i < trace_.size(); ++i) h = fnv1a(h, trace_[i].json);
  digests_.push_back(h);

  std::map<std::string, Observation> obs;
  for (const auto& [id, a] : agents_) {
    Observation o = sense(id);
    // deliver messages from senders within comm radius at send tick
    for (const auto& m : outbox_) {
      if (m.sender == id) continue;
      if (distance(m.sent_from, a.pos) <= config_.comm_radius)
        o.events.push_back({m.sender, m.text});
    }
    obs[id] = std::move(o);
  }
  return obs;
}

Observation Simulator::sense(const std::string& agent_id) const {
  const AgentState& a = agent(agent_id);
  Observation o;
  o.sim_time = sim_time_;
  o.pos = a.pos;
  o.heading = a.heading;
  o.mode = a.mode;
  o.mode_ref = a.mode_ref;
  o.cash = a.cash;
  o.status = a.status;
  for (const auto& h : a.held)
    if (h) o.held.push_back(*h);
  if (a.mode == AgentMode::inside_place) o.current_place = a.mode_ref;

  auto in_fov = [&](const Vec2& p) {
    double d = distance(a.pos, p);
    if (d > config_.sense_range) return false;
    if (d < 1e-9) return true;
    double bearing = std::atan2(p.y - a.pos.y, p.x - a.pos.x);
    return std::abs(normalize_angle(bearing - a.heading)) <= config_.fov / 2.0;
  };
  auto visible = [&](const Vec2& p) { return in_fov(p) && map_.line_of_sight(a.pos, p); };

  if (a.mode == AgentMode::inside_place) {
    // abstract room: everything hosted by the place is at hand
    for (const auto& [oid, obj] : objects_)
      if (obj.place && *obj.place == a.mode_ref)
        o.visible_entities.push_back({oid, EntityKind::object, a.pos, 0.0});
    for (const auto& [aid, other] : agents_)
      if (aid != a.id && other.mode == AgentMode::inside_place &&
          other.mode_ref == a.mode_ref)
        o.visible_entities.push_back({aid, EntityKind::agent, other.pos, 0.0});
  } else {
    for (const auto& [aid, other] : agents_) {
      if (aid == a.id || other.mode == AgentMode::inside_place) continue;
      if (visible(other.pos))
        o.visible_entities.push_back(
            {aid, EntityKind::agent, other.pos, distance(a.pos, other.pos)});
    }
    for (const auto& [oid, obj] : objects_) {
      if (!obj.pos) continue;
      if (visible(*obj.pos))
        o.visible_entities.push_back(
            {oid, EntityKind::object, *obj.pos, distance(a.pos, *obj.pos)});
    }
    for (const auto& bus : transit_.buses) {
      if (visible(bus.pos))
        o.visible_entities.push_back(
            {bus.line, EntityKind::bus, bus.pos, distance(a.pos, bus.pos)});
    }
    for (const auto& st : map_.bundle().bike_stations) {
      if (visible(st.location))
        o.visible_entities.push_back(
            {st.id, EntityKind::station, st.location, distance(a.pos, st.location)});
    }
    auto stops = map_.stop_place_ids();
    for (const auto& p : map_.bundle().places) {
      bool is_stop = std::find(stops.begin(), stops.end(), p.id) != stops.end();
      if (visible(p.door))
        o.visible_entities.push_back({p.id,
                                      is_stop ? EntityKind::stop : EntityKind::building_door,
                                      p.door, distance(a.pos, p.door)});
    }
  }
  for (const auto& p : map_.bundle().places)
    if (distance(a.pos, p.door) <= config_.interact_radius)
      o.accessible_places.push_back(p.id);
  return o;
}

std::string Simulator::state_json() const {
  json j;
  j["schema_version"] = 1;
  j["sim_time"] = sim_time_;
  j["fares_paid"] = fares_paid_;
  j["bike_charges"] = bike_charges_;
  j["agents"] = json::array();
  for (const auto& [id, a] : agents_) {
    json e = {{"id", a.id},         {"x", a.pos.x},
              {"y", a.pos.y},       {"heading", a.heading},
              {"mode", static_cast<int>(a.mode)},
              {"mode_ref", a.mode_ref},
              {"cash", a.cash},     {"pending_move", a.pending_move}};
    json held = json::array();
    for (const auto& h : a.held) held.push_back(h ? json(*h) : json(nullptr));
    e["held"] = held;
    j["agents"].push_back(e);
  }
  j["objects"] = json::array();
  for (const auto& [id, o] : objects_) {
    json e = {{"id", o.id}};
    if (o.pos) e["pos"] = {o.pos->x, o.pos->y};
    if (o.place) e["place"] = *o.place;
    if (o.container) e["container"] = *o.container;
    if (o.held_by) e["held_by"] = *o.held_by;
    j["objects"].push_back(e);
  }
  j["buses"] = json::array();
  for (const auto& b : transit_.buses)
    j["buses"].push_back({{"line", b.line},
                          {"arc", b.arc},
                          {"dwell", b.dwell_remaining},
                          {"next_stop", b.next_stop},
                          {"passengers", b.passengers}});
  j["stations"] = transit_.station_count;
  j["rentals"] = json::array();
  for (const auto& [id, r] : transit_.rentals)
    j["rentals"].push_back({{"agent", r.agent}, {"start_tick", r.start_tick}});
  return j.dump(2);
}

void Simulator::load_state(const std::string& text) {
  json j = json::parse(text);
  sim_time_ = j.at("sim_time");
  fares_paid_ = j.at("fares_paid");
  bike_charges_ = j.at("bike_charges");
  agents_.clear();
  for (const auto& e : j.at("agents")) {
    AgentState a;
    a.id = e.at("id");
    a.pos = {e.at("x"), e.at("y")};
    a.heading = e.at("heading");
    a.mode = static_cast<AgentMode>(e.at("mode").get<int>());
    a.mode_ref = e.at("mode_ref");
    a.cash = e.at("cash");
    a.pending_move = e.at("pending_move");
    for (int i = 0; i < 2; ++i)
      if (!e.at("held")[i].is_null()) a.held[i] = e.at("held")[i].get<std::string>();
    agents_[a.id] = std::move(a);
  }
  objects_.clear();
  for (const auto& e : j.at("objects")) {
    ObjectState o;
    o.id = e.at("id");
    if (e.contains("pos")) o.pos = Vec2{e["pos"][0], e["pos"][1]};
    if (e.contains("place")) o.place = e["place"].get<std::string>();
    if (e.contains("container")) o.container = e["container"].get<std::string>();
    if (e.contains("held_by")) o.held_by = e["held_by"].get<std::string>();
    objects_[o.id] = std::move(o);
  }
  for (size_t i = 0; i < transit_.buses.size() && i < j.at("buses").size(); ++i) {
    const auto& e = j["buses"][i];
    BusState& b = transit_.buses[i];
    b.arc = e.at("arc");
    b.dwell_remaining = e.at("dwell");
    b.next_stop = e.at("next_stop");
    b.passengers = e.at("passengers").get<std::vector<std::string>>();
    b.pos = point_along(bus_paths_.at(b.line), b.arc);
  }
  transit_.station_count = j.at("stations").get<std::map<std::string, int>>();
  transit_.rentals.clear();
  for (const auto& e : j.at("rentals"))
    transit_.rentals[e.at("agent")] = {e.at("agent"), e.at("start_tick")};
}

std::string Simulator::trace_jsonl() const {
  std::ostringstream out;
  size_t di = 0;
  int64_t last_tick = -1;
  for (const auto& rec : trace_) {
    json j = json::parse(rec.json);
    j["tick"] = rec.tick;
    if (rec.tick != last_tick && last_tick >= 0 && di < digests_.size()) ++di;
    last_tick = rec.tick;
    if (di < digests_.size()) j["digest"] = digests_[rec.tick > 0 ? rec.tick - 1 : 0];
    out << j.dump() << "\n";
  }
  return out.str();
}

}  // namespace ocs::sim
