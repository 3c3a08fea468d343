#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocs/planners.hpp"
#include "ocs/worldmodel.hpp"

namespace ocs::tasks {

struct TaskError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- schedule

struct Activity {
  std::string type;       // commute | meal | sleep | main
  std::string activity;   // free text
  std::optional<std::string> place;
  std::optional<std::string> building;
  int start_s = 0;        // seconds since midnight
  int end_s = 0;
};

struct Schedule {
  std::vector<Activity> activities;

  std::string to_json() const;
  static Schedule from_json(const std::string& text);
};

int parse_hms(const std::string& hms);        // "HH:MM:SS" -> seconds
std::string format_hms(int seconds);

struct Violation {
  std::string code;      // gap | overlap | missing_commute | unknown_place |
                         // unknown_building | bad_bounds | bad_type
  std::string detail;
};

std::vector<Violation> validate_schedule(const Schedule& schedule, const WorldMap& map);

// ------------------------------------------------------------------- tasks

enum class TaskKind { carry, delivery, search, commute, influence };

std::string to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

inline const std::vector<std::string>& object_types() {
  static const std::vector<std::string> kTypes = {
      "backpack", "box",         "umbrella",    "bottle",  "book",
      "laptop bag", "grocery bag", "package",   "toolkit"};
  return kTypes;
}

inline const std::vector<std::string>& container_types() {
  static const std::vector<std::string> kContainers = {"floor", "sofa",  "table",
                                                       "chair", "desk", "bed"};
  return kContainers;
}

struct ObjectSpawn {
  std::string id;
  std::string type;
  std::optional<Vec2> outdoor_pos;
  std::optional<std::string> place;
  std::optional<std::string> container;
};

struct RegionBox {
  Vec2 min;
  Vec2 max;
};

struct TaskSpec {
  TaskKind kind = TaskKind::delivery;
  uint64_t seed = 0;

  // delivery / carry / search payload
  std::vector<ObjectSpawn> objects;
  std::string source_place;        // delivery source anchor (may be empty)
  std::string destination_place;
  std::string human_id;            // carry
  std::string search_object;       // search target object id
  std::optional<RegionBox> search_region;

  // commute payload
  Schedule schedule;

  // influence payload
  std::vector<std::string> main_agents;
  std::vector<std::string> members;

  // evaluation metadata
  std::vector<RegionBox> target_regions;
  std::vector<std::string> subtasks;
  int deadline_ticks = 1500;

  std::string to_json() const;
  static TaskSpec from_json(const std::string& text);
};

using PlaceSelector = std::function<const Place*(const WorldMap&, TaskKind, uint64_t)>;

TaskSpec generate_assistant_task(const WorldMap& map, uint64_t seed, TaskKind kind,
                                 const PlaceSelector& selector = nullptr);

struct CommuteGenResult {
  TaskSpec task;
  double route_length_m = 0.0;
  std::vector<std::string> warnings;
};

// 4-8 distinct places, walk-feasible times, route length near 2.5 km
CommuteGenResult generate_commute_episode(const WorldMap& map, uint64_t seed);

// ----------------------------------------------------------------- results

struct CommuteRecord {
  std::string destination;
  double duration_s = 0.0;
  double price = 0.0;
  double walk_m = 0.0;
  bool late = false;
};

struct EpisodeResult {
  TaskKind kind = TaskKind::delivery;
  std::vector<bool> subtask_success;
  int64_t ticks = 0;
  int64_t follow_frames = 0;
  int64_t total_frames = 0;
  std::vector<CommuteRecord> commutes;
  uint64_t trace_digest = 0;
  double cash_spent = 0.0;

  std::string to_json() const;
  static EpisodeResult from_json(const std::string& text);
};

struct AssistantMetrics {
  double sr = 0.0;     // percent
  double ts = 0.0;     // ticks
  double hr = 0.0;     // percent
};

AssistantMetrics eval_assistant(const EpisodeResult& result);

struct CommuteMetrics {
  double travel_time_min = 0.0;
  double travel_price = 0.0;
  double walk_km = 0.0;
  double late_rate = 0.0;   // percent
};

CommuteMetrics eval_commute(const EpisodeResult& result);

struct InfluenceMetrics {
  double win = 0.0;                    // percent
  std::optional<double> conv;          // percent; nullopt when undefined
};

// rankings: member id -> main agent ids ordered best-first
// initial_support: member id -> main agent id supported at the start
InfluenceMetrics eval_influence(const std::string& agent,
                                const std::map<std::string, std::vector<std::string>>& rankings,
                                const std::map<std::string, std::string>& initial_support);

}  // namespace ocs::tasks
