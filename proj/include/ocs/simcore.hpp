#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ocs/worldmodel.hpp"

namespace ocs::sim {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  double walk_speed = 2.0;    // m/s
  double bike_speed = 5.0;
  double bus_speed = 10.0;
  double bus_fare = 2.0;             // per boarding
  double bike_rate = 0.5;            // per started minute
  double bus_dwell = 5.0;            // seconds at each stop
  double sense_range = 30.0;
  double fov = 120.0 * M_PI / 180.0;
  double agent_radius = 0.3;
  double reach = 1.5;
  double interact_radius = 5.0;      // doors, boarding, stations
  double comm_radius = 50.0;
  int substeps = 10;                 // motion substeps per 1 s tick
};

// ------------------------------------------------------------------ actions

struct MoveForward { double distance = 0.0; };
struct Turn { double angle = 0.0; };
struct EnterBus { std::string line; };
struct ExitBus {};
struct EnterBike { std::string station; };
struct ExitBike { std::string station; };
struct EnterPlace { std::string place; };
struct ExitPlace {};
struct Pick { std::string object; int arm = 0; };
struct Put {
  std::string object;
  std::optional<Vec2> target;
  std::optional<std::string> container;
};
struct Communicate { std::string text; };
struct TaskComplete { int subtask = 0; };
struct Wait {};

using Action = std::variant<MoveForward, Turn, EnterBus, ExitBus, EnterBike, ExitBike,
                            EnterPlace, ExitPlace, Pick, Put, Communicate, TaskComplete,
                            Wait>;

std::string action_name(const Action& a);

// ------------------------------------------------------------------- agents

enum class AgentMode { walking, riding_bike, on_bus, inside_place };

enum class StatusKind { idle, ongoing, failed };

struct ActionStatus {
  StatusKind kind = StatusKind::idle;
  std::string detail;   // failure reason or ongoing action name
};

struct AgentState {
  std::string id;
  Vec2 pos;
  double heading = 0.0;
  AgentMode mode = AgentMode::walking;
  std::string mode_ref;                       // bus line or place id
  std::array<std::optional<std::string>, 2> held;
  double cash = 0.0;
  ActionStatus status;
  double pending_move = 0.0;                  // meters still owed to an ongoing move

  int held_count() const {
    return static_cast<int>(held[0].has_value()) + static_cast<int>(held[1].has_value());
  }
};

// ------------------------------------------------------------------ transit

struct BusState {
  std::string line;
  double arc = 0.0;          // meters along the loop polyline
  double dwell_remaining = 0.0;
  int next_stop = 0;         // index into line.stops
  std::vector<std::string> passengers;
  Vec2 pos;
};

struct BikeRental {
  std::string agent;
  int64_t start_tick = 0;
};

struct TransitState {
  std::vector<BusState> buses;
  std::map<std::string, int> station_count;
  std::map<std::string, BikeRental> rentals;   // keyed by agent id
};

// ------------------------------------------------------------------ objects

struct ObjectState {
  std::string id;
  std::optional<Vec2> pos;                     // outdoor position
  std::optional<std::string> place;            // indoor host place
  std::optional<std::string> container;
  std::optional<std::string> held_by;
};

// -------------------------------------------------------------- observation

enum class EntityKind { agent, object, bus, station, stop, building_door };

struct VisibleEntity {
  std::string id;
  EntityKind kind;
  Vec2 position;
  double dist = 0.0;
};

struct Event {
  std::string sender;
  std::string text;
};

struct Observation {
  int64_t sim_time = 0;
  Vec2 pos;
  double heading = 0.0;
  AgentMode mode = AgentMode::walking;
  std::string mode_ref;
  std::vector<VisibleEntity> visible_entities;
  std::vector<Event> events;
  double cash = 0.0;
  std::vector<std::string> accessible_places;
  ActionStatus status;
  std::optional<std::string> current_place;
  std::vector<std::string> held;
};

// -------------------------------------------------------------------- trace

struct TraceRecord {
  int64_t tick = 0;
  std::string json;   // canonical event payload
};

class Simulator {
 public:
  Simulator(const WorldMap& map, SimConfig config = {}, uint64_t seed = 0);

  void add_agent(const std::string& id, const Vec2& pos, double cash = 0.0,
                 double heading = 0.0);
  void add_object(const std::string& id, const Vec2& pos);
  void add_object_in_place(const std::string& id, const std::string& place,
                           const std::string& container);

  std::map<std::string, Observation> step(const std::map<std::string, Action>& actions);

  Observation sense(const std::string& agent) const;

  const AgentState& agent(const std::string& id) const;
  AgentState& agent_mut(const std::string& id);
  const ObjectState& object(const std::string& id) const;
  const TransitState& transit() const { return transit_; }
  const SimConfig& config() const { return config_; }
  const WorldMap& map() const { return map_; }
  int64_t sim_time() const { return sim_time_; }

  int total_bikes() const;
  double total_fares_paid() const { return fares_paid_; }
  double total_bike_charges() const { return bike_charges_; }

  const std::vector<TraceRecord>& trace() const { return trace_; }
  const std::vector<uint64_t>& digest_chain() const { return digests_; }
  uint64_t current_digest() const { return digests_.empty() ? 0 : digests_.back(); }
  std::string trace_jsonl() const;

  // Completion events recorded via TaskComplete, as (tick, agent, subtask).
  const std::vector<std::tuple<int64_t, std::string, int>>& completions() const {
    return completions_;
  }
  const std::vector<Event>& messages_this_tick() const { return last_messages_; }

  // Versioned snapshot of the mutable world state; round-trips exactly.
  std::string state_json() const;
  void load_state(const std::string& text);

 private:
  const WorldMap& map_;
  SimConfig config_;
  int64_t sim_time_ = 0;
  std::map<std::string, AgentState> agents_;
  std::map<std::string, ObjectState> objects_;
  TransitState transit_;
  std::map<std::string, Polyline> bus_paths_;        // line id -> loop polyline
  std::map<std::string, std::vector<double>> stop_arcs_;
  double fares_paid_ = 0.0;
  double bike_charges_ = 0.0;

  std::vector<TraceRecord> trace_;
  std::vector<uint64_t> digests_;
  std::vector<std::tuple<int64_t, std::string, int>> completions_;

  struct PendingMessage {
    std::string sender;
    std::string text;
    Vec2 sent_from;
  };
  std::vector<PendingMessage> outbox_;
  std::vector<Event> last_messages_;

  void apply_action(AgentState& a, const Action& action);
  void motion_phase();
  void advance_buses(double dt);
  bool blocked_at(const AgentState& a, const Vec2& next) const;
  void record(int64_t tick, const std::string& payload);
  void fail(AgentState& a, const std::string& reason);
};

}  // namespace ocs::sim
