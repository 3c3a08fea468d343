#include "ocs/protocol.hpp"

#include "json.hpp"

namespace ocs::proto {

using nlohmann::json;

namespace {

const char* mode_name(sim::AgentMode m) {
  switch (m) {
    case sim::AgentMode::walking: return "walking";
    case sim::AgentMode::riding_bike: return "riding_bike";
    case sim::AgentMode::on_bus: return "on_bus";
    case sim::AgentMode::inside_place: return "inside_place";
  }
  return "walking";
}

const char* kind_name(sim::EntityKind k) {
  switch (k) {
    case sim::EntityKind::agent: return "agent";
    case sim::EntityKind::object: return "object";
    case sim::EntityKind::bus: return "bus";
    case sim::EntityKind::station: return "station";
    case sim::EntityKind::stop: return "stop";
    case sim::EntityKind::building_door: return "building_door";
  }
  return "object";
}

json obs_json(const sim::Observation& obs) {
  json j;
  j["sim_time"] = obs.sim_time;
  j["pose"] = {{"x", obs.pos.x}, {"y", obs.pos.y}, {"heading", obs.heading}};
  j["mode"] = mode_name(obs.mode);
  if (!obs.mode_ref.empty()) j["mode_ref"] = obs.mode_ref;
  j["cash"] = obs.cash;
  j["held"] = obs.held;
  j["accessible_places"] = obs.accessible_places;
  if (obs.current_place) j["current_place"] = *obs.current_place;
  j["action_status"] = obs.status.kind == sim::StatusKind::failed
                           ? "failed:" + obs.status.detail
                           : (obs.status.kind == sim::StatusKind::ongoing ? "ongoing"
                                                                          : "idle");
  j["visible_entities"] = json::array();
  for (const auto& e : obs.visible_entities)
    j["visible_entities"].push_back({{"id", e.id},
                                     {"kind", kind_name(e.kind)},
                                     {"x", e.position.x},
                                     {"y", e.position.y},
                                     {"distance", e.dist}});
  j["events"] = json::array();
  for (const auto& e : obs.events)
    j["events"].push_back({{"sender", e.sender}, {"text", e.text}});
  return j;
}

}  // namespace

std::string observation_to_json(const sim::Observation& obs) {
  return obs_json(obs).dump();
}

std::string action_to_json(const sim::Action& a) {
  json j;
  j["type"] = sim::action_name(a);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, sim::MoveForward>) j["distance"] = v.distance;
        else if constexpr (std::is_same_v<T, sim::Turn>) j["angle"] = v.angle;
        else if constexpr (std::is_same_v<T, sim::EnterBus>) j["line"] = v.line;
        else if constexpr (std::is_same_v<T, sim::EnterBike>) j["station"] = v.station;
        else if constexpr (std::is_same_v<T, sim::ExitBike>) j["station"] = v.station;
        else if constexpr (std::is_same_v<T, sim::EnterPlace>) j["place"] = v.place;
        else if constexpr (std::is_same_v<T, sim::Pick>) {
          j["object"] = v.object;
          j["arm"] = v.arm;
        } else if constexpr (std::is_same_v<T, sim::Put>) {
          j["object"] = v.object;
          if (v.target) j["target"] = {v.target->x, v.target->y};
          if (v.container) j["container"] = *v.container;
        } else if constexpr (std::is_same_v<T, sim::Communicate>) j["text"] = v.text;
        else if constexpr (std::is_same_v<T, sim::TaskComplete>) j["subtask"] = v.subtask;
      },
      a);
  return j.dump();
}

static sim::Action action_from(const json& j) {
  std::string type = j.at("type");
  if (type == "wait") return sim::Wait{};
  if (type == "move_forward") return sim::MoveForward{j.at("distance").get<double>()};
  if (type == "turn") return sim::Turn{j.at("angle").get<double>()};
  if (type == "enter_bus") return sim::EnterBus{j.at("line").get<std::string>()};
  if (type == "exit_bus") return sim::ExitBus{};
  if (type == "enter_bike") return sim::EnterBike{j.at("station").get<std::string>()};
  if (type == "exit_bike") return sim::ExitBike{j.at("station").get<std::string>()};
  if (type == "enter_place") return sim::EnterPlace{j.at("place").get<std::string>()};
  if (type == "exit_place") return sim::ExitPlace{};
  if (type == "pick")
    return sim::Pick{j.at("object").get<std::string>(), j.value("arm", 0)};
  if (type == "put") {
    sim::Put p;
    p.object = j.at("object").get<std::string>();
    if (j.contains("target"))
      p.target = Vec2{j["target"][0].get<double>(), j["target"][1].get<double>()};
    if (j.contains("container")) p.container = j["container"].get<std::string>();
    return p;
  }
  if (type == "communicate") return sim::Communicate{j.at("text").get<std::string>()};
  if (type == "task_complete") return sim::TaskComplete{j.value("subtask", 0)};
  throw std::runtime_error("unknown action type: " + type);
}

sim::Action action_from_json(const std::string& text) {
  return action_from(json::parse(text));
}

std::optional<sim::Action> try_action_from_json(const std::string& text) {
  try {
    return action_from_json(text);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

plan::CommutePlan plan_from_json(const std::string& text) {
  json j = json::parse(text);
  plan::CommutePlan p;
  for (const auto& e : j) {
    plan::CommuteLeg leg;
    if (e.contains("goal_place") && !e["goal_place"].is_null())
      leg.place = e["goal_place"].get<std::string>();
    if (e.contains("point"))
      leg.point = {e["point"][0].get<double>(), e["point"][1].get<double>()};
    std::string t = e.at("transit_type");
    if (t == "bus") leg.type = plan::TransitType::bus;
    else if (t == "bike") leg.type = plan::TransitType::bike;
    else if (t == "walk") leg.type = plan::TransitType::walk;
    else throw std::runtime_error("unknown transit_type: " + t);
    p.legs.push_back(std::move(leg));
  }
  if (p.legs.empty()) throw std::runtime_error("empty plan");
  return p;
}

std::string make_request(int64_t tick, const sim::Observation& obs,
                         const std::string& tasks_json,
                         const std::string& history_json) {
  json j;
  j["tick"] = tick;
  j["observation"] = obs_json(obs);
  j["tasks"] = json::parse(tasks_json);
  j["history"] = json::parse(history_json);
  return j.dump();
}

Response parse_response(const std::string& line) {
  json j = json::parse(line);
  Response r;
  r.reason = j.value("reason", "");
  if (j.contains("action")) {
    r.action = action_from(j.at("action"));
  } else if (j.contains("plan")) {
    r.plan = plan_from_json(j.at("plan").dump());
  } else {
    throw std::runtime_error("response has neither action nor plan");
  }
  return r;
}

}  // namespace ocs::proto
