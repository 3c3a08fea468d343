#include "ocs/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

namespace ocs::traffic {

using nlohmann::json;

bool request_junction(JunctionGate& gate, int entity_id) {
  if (gate.occupant && *gate.occupant != entity_id) return false;
  gate.occupant = entity_id;
  return true;
}

std::pair<Vec2, Vec2> pedestrian_adjust(const Vec2& p1, double heading1, const Vec2& p2,
                                        double heading2, const TrafficConfig& cfg) {
  if (distance(p1, p2) >= cfg.pedestrian_proximity) return {{0.0, 0.0}, {0.0, 0.0}};
  auto rightward = [&](double heading) {
    return Vec2{std::sin(heading), -std::cos(heading)} * cfg.pedestrian_offset;
  };
  return {rightward(heading1), rightward(heading2)};
}

TrafficSim::TrafficSim(const WorldMap& map, TrafficConfig cfg) : map_(map), cfg_(cfg) {
  for (const auto& r : map_.bundle().roads) segments_[r.id] = &r;
  for (const auto& j : map_.bundle().junctions) {
    gates_[j.id] = {j.id, std::nullopt};
    for (const auto& s : j.incident_segments) seg_junctions_[s].push_back(&j);
  }
}

const RoadSegment* TrafficSim::segment(const std::string& id) const {
  auto it = segments_.find(id);
  return it == segments_.end() ? nullptr : it->second;
}

Vec2 TrafficSim::position_of(const TrafficEntity& e) const {
  const RoadSegment* seg = segment(e.segment);
  if (!seg) return e.pos;
  double len = seg->length();
  double s = e.direction > 0 ? e.arc : len - e.arc;
  Vec2 p = point_along(seg->centerline, s);
  if (e.kind == EntityKind::pedestrian) {
    // sidewalk: 1 m band to the right of travel
    double h = heading_of(e);
    p = p + Vec2{std::sin(h), -std::cos(h)} * (seg->width / 2.0 + 0.5);
  }
  return p;
}

double TrafficSim::heading_of(const TrafficEntity& e) const {
  const RoadSegment* seg = segment(e.segment);
  if (!seg) return 0.0;
  double len = seg->length();
  double s = e.direction > 0 ? e.arc : len - e.arc;
  Vec2 a = point_along(seg->centerline, std::max(0.0, s - 0.5));
  Vec2 b = point_along(seg->centerline, std::min(len, s + 0.5));
  Vec2 d = e.direction > 0 ? b - a : a - b;
  return std::atan2(d.y, d.x);
}

const Junction* TrafficSim::junction_at_end(const TrafficEntity& e) const {
  const RoadSegment* seg = segment(e.segment);
  if (!seg) return nullptr;
  Vec2 end = e.direction > 0 ? seg->centerline.back() : seg->centerline.front();
  auto it = seg_junctions_.find(e.segment);
  if (it == seg_junctions_.end()) return nullptr;
  for (const Junction* j : it->second)
    if (distance(j->center, end) < 1.0) return j;
  return nullptr;
}

int TrafficSim::vehicles_on(const std::string& seg, int lane, int direction) const {
  int n = 0;
  for (const auto& e : entities_)
    if (e.kind == EntityKind::vehicle && e.segment == seg && e.lane == lane &&
        e.direction == direction)
      ++n;
  return n;
}

int TrafficSim::vehicles_on_segment(const std::string& seg) const {
  int n = 0;
  for (const auto& e : entities_)
    if (e.kind == EntityKind::vehicle && e.segment == seg) ++n;
  return n;
}

std::string TrafficSim::choose_direction(const Junction& junction,
                                         const std::string& incoming) const {
  std::vector<std::string> outgoing;
  for (const auto& s : junction.incident_segments)
    if (s != incoming) outgoing.push_back(s);
  if (outgoing.empty()) return incoming;   // dead end: U-turn
  std::sort(outgoing.begin(), outgoing.end());
  std::string best = outgoing.front();
  int best_count = vehicles_on_segment(best);
  for (const auto& s : outgoing) {
    int c = vehicles_on_segment(s);
    if (c < best_count) {
      best_count = c;
      best = s;
    }
  }
  return best;
}

std::optional<double> TrafficSim::gap_ahead(const TrafficEntity& e) const {
  std::optional<double> best;
  for (const auto& o : entities_) {
    if (o.id == e.id || o.kind != e.kind) continue;
    if (o.segment != e.segment || o.lane != e.lane || o.direction != e.direction) continue;
    if (o.arc > e.arc) {
      double gap = o.arc - e.arc;
      if (!best || gap < *best) best = gap;
    }
  }
  return best;
}

int TrafficSim::maybe_lane_change(const TrafficEntity& v) const {
  const RoadSegment* seg = segment(v.segment);
  if (!seg || seg->lane_count < 2) return v.lane;
  double len = std::max(1.0, seg->length());
  double cur_density = vehicles_on(v.segment, v.lane, v.direction) / len;
  if (cur_density <= cfg_.congestion_density) return v.lane;
  for (int adj : {v.lane - 1, v.lane + 1}) {
    if (adj < 0 || adj >= seg->lane_count) continue;
    double adj_density = vehicles_on(v.segment, adj, v.direction) / len;
    if (adj_density >= cur_density) continue;   // strictly lower only
    bool gap_clear = true;
    for (const auto& o : entities_) {
      if (o.kind != EntityKind::vehicle || o.segment != v.segment || o.lane != adj ||
          o.direction != v.direction)
        continue;
      if (std::abs(o.arc - v.arc) < cfg_.safety_gap) {
        gap_clear = false;
        break;
      }
    }
    if (gap_clear) return adj;
  }
  return v.lane;
}

void TrafficSim::add_entity(EntityKind kind, const std::string& seg, int lane,
                            int direction, double arc) {
  TrafficEntity e;
  e.id = next_id_++;
  e.kind = kind;
  e.segment = seg;
  e.lane = lane;
  e.direction = direction;
  e.arc = arc;
  e.speed = kind == EntityKind::vehicle ? cfg_.vehicle_speed : cfg_.pedestrian_speed;
  e.pos = position_of(e);
  entities_.push_back(std::move(e));
}

void TrafficSim::spawn(int vehicles, int pedestrians, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> ids;
  for (const auto& [id, seg] : segments_) ids.push_back(id);
  if (ids.empty()) return;
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<uint64_t>(n)); };
  auto unit = [&] { return std::ldexp(static_cast<double>(rng() >> 11), -53); };
  // keep spawns clear of junction radii and of each other's safety gap
  auto try_place = [&](EntityKind kind) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const std::string& sid = ids[pick(static_cast<int>(ids.size()))];
      const RoadSegment* seg = segments_.at(sid);
      double len = seg->length();
      double margin = cfg_.junction_radius + 1.0;
      if (len <= 2.0 * margin) continue;
      int lane = kind == EntityKind::vehicle ? pick(seg->lane_count) : 0;
      int dir = (kind == EntityKind::vehicle && seg->one_way) ? 1 : (pick(2) ? 1 : -1);
      double arc = margin + unit() * (len - 2.0 * margin);
      bool clear = true;
      for (const auto& o : entities_) {
        if (o.kind != kind || o.segment != sid || o.lane != lane || o.direction != dir)
          continue;
        if (std::abs(o.arc - arc) < cfg_.safety_gap + 0.5) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      add_entity(kind, sid, lane, dir, arc);
      return;
    }
  };
  for (int i = 0; i < vehicles; ++i) try_place(EntityKind::vehicle);
  for (int i = 0; i < pedestrians; ++i) try_place(EntityKind::pedestrian);
}

void TrafficSim::release_gates() {
  for (auto& [jid, gate] : gates_) {
    if (!gate.occupant) continue;
    const Junction* j = nullptr;
    for (const auto& x : map_.bundle().junctions)
      if (x.id == jid) j = &x;
    bool inside = false;
    for (const auto& e : entities_) {
      if (e.id != *gate.occupant) continue;
      inside = j && distance(e.pos, j->center) <= cfg_.junction_radius;
      break;
    }
    if (!inside) gate.occupant.reset();
  }
}

void TrafficSim::step(double dt) {
  if (dt <= 0.0) return;
  // rule: congestion lane changes first (conserves per-segment counts)
  for (auto& e : entities_) {
    if (e.kind == EntityKind::vehicle) e.lane = maybe_lane_change(e);
  }

  for (auto& e : entities_) {
    const RoadSegment* seg = segment(e.segment);
    if (!seg) continue;
    double len = seg->length();
    double advance = e.speed * dt;

    // car-following: never close below the safety gap
    if (e.kind == EntityKind::vehicle) {
      auto gap = gap_ahead(e);
      if (gap) advance = std::max(0.0, std::min(advance, *gap - cfg_.safety_gap));
    }

    double new_arc = e.arc + advance;
    const Junction* j = junction_at_end(e);
    // entering the junction radius requires holding the gate
    double gate_line = std::max(0.0, len - cfg_.junction_radius - 0.5);
    if (j && new_arc > gate_line) {
      auto& gate = gates_.at(j->id);
      if (!request_junction(gate, e.id)) {
        e.arc = std::min(new_arc, gate_line);
        e.pos = position_of(e);
        continue;
      }
    }
    if (new_arc >= len) {
      if (j) {
        std::string next = choose_direction(*j, e.segment);
        const RoadSegment* nseg = segments_.at(next);
        bool from_front = distance(nseg->centerline.front(), j->center) <
                          distance(nseg->centerline.back(), j->center);
        e.segment = next;
        e.direction = from_front ? 1 : -1;
        e.lane = std::min(e.lane, nseg->lane_count - 1);
        e.arc = std::min(new_arc - len, nseg->length());
        // keep the gap on the new segment too
        if (e.kind == EntityKind::vehicle) {
          auto gap = gap_ahead(e);
          if (gap && *gap < cfg_.safety_gap)
            e.arc = std::max(0.0, e.arc - (cfg_.safety_gap - *gap));
        }
      } else {
        // dead end without a junction: turn around
        e.direction = -e.direction;
        e.arc = 0.0;
      }
    } else {
      e.arc = new_arc;
    }
    e.pos = position_of(e);
  }

  // rule: pedestrian proximity avoidance
  for (size_t i = 0; i < entities_.size(); ++i) {
    for (size_t k = i + 1; k < entities_.size(); ++k) {
      TrafficEntity& a = entities_[i];
      TrafficEntity& b = entities_[k];
      if (a.kind != EntityKind::pedestrian || b.kind != EntityKind::pedestrian) continue;
      auto [off_a, off_b] =
          pedestrian_adjust(a.pos, heading_of(a), b.pos, heading_of(b), cfg_);
      a.pos = a.pos + off_a;
      b.pos = b.pos + off_b;
    }
  }

  release_gates();
}

std::string TrafficSim::census_json() const {
  json j;
  for (const auto& [id, seg] : segments_) {
    j[id] = {{"vehicles", vehicles_on_segment(id)}, {"pedestrians", 0}};
  }
  for (const auto& e : entities_)
    if (e.kind == EntityKind::pedestrian) {
      auto it = j.find(e.segment);
      if (it != j.end()) (*it)["pedestrians"] = (*it)["pedestrians"].get<int>() + 1;
    }
  return j.dump(2);
}

}  // namespace ocs::traffic
