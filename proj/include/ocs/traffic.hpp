#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocs/worldmodel.hpp"

namespace ocs::traffic {

struct TrafficConfig {
  double vehicle_speed = 8.0;       // m/s
  double pedestrian_speed = 1.4;
  double safety_gap = 4.0;          // m, car following
  double congestion_density = 0.1;  // vehicles per meter
  double pedestrian_proximity = 1.0;
  double pedestrian_offset = 0.3;
  double junction_radius = 8.0;
};

enum class EntityKind { vehicle, pedestrian };

struct TrafficEntity {
  int id = 0;
  EntityKind kind = EntityKind::vehicle;
  std::string segment;
  int lane = 0;
  int direction = 1;       // +1 forward along the centerline, -1 reverse
  double arc = 0.0;        // meters from the direction's start
  double speed = 0.0;
  Vec2 pos;
};

struct JunctionGate {
  std::string junction;
  std::optional<int> occupant;
};

// allow iff the gate is empty or already held by this entity
bool request_junction(JunctionGate& gate, int entity_id);

// Lateral avoidance offsets, one per pedestrian, each to the right of its
// own travel direction. Zero offsets beyond the proximity threshold.
std::pair<Vec2, Vec2> pedestrian_adjust(const Vec2& p1, double heading1, const Vec2& p2,
                                        double heading2, const TrafficConfig& cfg = {});

class TrafficSim {
 public:
  TrafficSim(const WorldMap& map, TrafficConfig cfg = {});

  // Random placement, deterministic in seed.
  void spawn(int vehicles, int pedestrians, uint64_t seed);
  void add_entity(EntityKind kind, const std::string& segment, int lane, int direction,
                  double arc);

  void step(double dt);

  const std::vector<TrafficEntity>& entities() const { return entities_; }
  const std::map<std::string, JunctionGate>& gates() const { return gates_; }

  int vehicles_on(const std::string& segment, int lane, int direction) const;
  int vehicles_on_segment(const std::string& segment) const;

  // min-vehicle-count outgoing segment, ties by lowest id; dead end -> incoming
  std::string choose_direction(const Junction& junction, const std::string& incoming) const;

  // lane index after the congestion rule; may equal the current lane
  int maybe_lane_change(const TrafficEntity& vehicle) const;

  std::string census_json() const;   // per-segment counts

 private:
  const WorldMap& map_;
  TrafficConfig cfg_;
  std::vector<TrafficEntity> entities_;
  std::map<std::string, JunctionGate> gates_;
  std::map<std::string, const RoadSegment*> segments_;
  std::map<std::string, std::vector<const Junction*>> seg_junctions_;
  int next_id_ = 0;

  const RoadSegment* segment(const std::string& id) const;
  Vec2 position_of(const TrafficEntity& e) const;
  double heading_of(const TrafficEntity& e) const;
  const Junction* junction_at_end(const TrafficEntity& e) const;
  std::optional<double> gap_ahead(const TrafficEntity& e) const;
  void release_gates();
};

}  // namespace ocs::traffic
