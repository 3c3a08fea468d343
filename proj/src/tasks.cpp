#include "ocs/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "json.hpp"

namespace ocs::tasks {

using nlohmann::json;

// ---------------------------------------------------------------- schedule

int parse_hms(const std::string& hms) {
  int h = 0, m = 0, s = 0;
  char trailing = 0;
  if (std::sscanf(hms.c_str(), "%d:%d:%d%c", &h, &m, &s, &trailing) != 3 ||
      h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59)
    throw TaskError("bad time: " + hms);
  return h * 3600 + m * 60 + s;
}

std::string format_hms(int seconds) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", seconds / 3600,
                (seconds / 60) % 60, seconds % 60);
  return buf;
}

std::string Schedule::to_json() const {
  json arr = json::array();
  for (const auto& a : activities) {
    json j;
    j["type"] = a.type;
    j["activity"] = a.activity;
    j["place"] = a.place ? json(*a.place) : json(nullptr);
    j["building"] = a.building ? json(*a.building) : json(nullptr);
    j["start_time"] = format_hms(a.start_s);
    j["end_time"] = format_hms(a.end_s);
    arr.push_back(std::move(j));
  }
  return arr.dump();
}

Schedule Schedule::from_json(const std::string& text) {
  Schedule s;
  json arr = json::parse(text);
  for (const auto& j : arr) {
    Activity a;
    a.type = j.at("type").get<std::string>();
    a.activity = j.value("activity", std::string{});
    if (j.contains("place") && !j["place"].is_null())
      a.place = j["place"].get<std::string>();
    if (j.contains("building") && !j["building"].is_null())
      a.building = j["building"].get<std::string>();
    a.start_s = parse_hms(j.at("start_time").get<std::string>());
    a.end_s = parse_hms(j.at("end_time").get<std::string>());
    s.activities.push_back(std::move(a));
  }
  return s;
}

std::vector<Violation> validate_schedule(const Schedule& schedule, const WorldMap& map) {
  std::vector<Violation> out;
  const auto& acts = schedule.activities;
  if (acts.empty()) {
    out.push_back({"bad_bounds", "empty schedule"});
    return out;
  }
  static const std::vector<std::string> kTypes = {"commute", "meal", "sleep", "main"};
  constexpr int kDayEnd = 23 * 3600 + 59 * 60 + 59;

  if (acts.front().start_s != 0)
    out.push_back({"bad_bounds", "schedule starts at " +
                                     format_hms(acts.front().start_s) +
                                     ", expected 00:00:00"});
  if (acts.back().end_s != kDayEnd)
    out.push_back({"bad_bounds", "schedule ends at " + format_hms(acts.back().end_s) +
                                     ", expected 23:59:59"});

  for (size_t i = 0; i < acts.size(); ++i) {
    const Activity& a = acts[i];
    if (std::find(kTypes.begin(), kTypes.end(), a.type) == kTypes.end())
      out.push_back({"bad_type", "unknown activity type '" + a.type + "'"});
    if (a.end_s <= a.start_s)
      out.push_back({"bad_bounds", "activity " + std::to_string(i) +
                                       " ends at or before its start"});
    if (a.place && !map.place(*a.place))
      out.push_back({"unknown_place", "unknown place '" + *a.place + "'"});
    if (a.building && !map.building(*a.building))
      out.push_back({"unknown_building", "unknown building '" + *a.building + "'"});
  }

  for (size_t i = 0; i + 1 < acts.size(); ++i) {
    const Activity& a = acts[i];
    const Activity& b = acts[i + 1];
    // Activities abut when the next starts at the previous end (shared
    // boundary instant) or one second after (inclusive-second convention).
    if (b.start_s > a.end_s + 1)
      out.push_back({"gap", "gap at " + format_hms(a.end_s)});
    else if (b.start_s < a.end_s)
      out.push_back({"overlap", "overlap at " + format_hms(b.start_s)});
    if (a.type != "commute" && b.type != "commute" && a.building && b.building &&
        *a.building != *b.building)
      out.push_back({"missing_commute", "missing commute between '" + *a.building +
                                            "' and '" + *b.building + "'"});
  }
  return out;
}

// ------------------------------------------------------------------- tasks

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::carry: return "carry";
    case TaskKind::delivery: return "delivery";
    case TaskKind::search: return "search";
    case TaskKind::commute: return "commute";
    case TaskKind::influence: return "influence";
  }
  return "delivery";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "carry") return TaskKind::carry;
  if (s == "delivery") return TaskKind::delivery;
  if (s == "search") return TaskKind::search;
  if (s == "commute") return TaskKind::commute;
  if (s == "influence") return TaskKind::influence;
  throw TaskError("unknown task kind: " + s);
}

namespace {

json region_json(const RegionBox& r) {
  return {{"min", {r.min.x, r.min.y}}, {"max", {r.max.x, r.max.y}}};
}

RegionBox region_from(const json& j) {
  return {{j.at("min")[0].get<double>(), j.at("min")[1].get<double>()},
          {j.at("max")[0].get<double>(), j.at("max")[1].get<double>()}};
}

struct Bbox {
  Vec2 min{1e18, 1e18};
  Vec2 max{-1e18, -1e18};
  void add(const Vec2& p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
  }
};

Bbox scene_bbox(const WorldMap& map) {
  Bbox b;
  for (const auto& r : map.bundle().roads)
    for (const auto& p : r.centerline) b.add(p);
  for (const auto& bl : map.bundle().buildings)
    for (const auto& p : bl.footprint) b.add(p);
  if (b.min.x > b.max.x) b = {{0, 0}, {100, 100}};
  return b;
}

// Deterministic unit double in [0, 1).
double unit(std::mt19937_64& rng) { return std::ldexp(double(rng() >> 11), -53); }

size_t pick_index(std::mt19937_64& rng, size_t n) {
  return static_cast<size_t>(unit(rng) * double(n)) % n;
}

Vec2 sample_outdoor(const WorldMap& map, const Bbox& box, std::mt19937_64& rng) {
  for (int i = 0; i < 10000; ++i) {
    Vec2 p{box.min.x + unit(rng) * (box.max.x - box.min.x),
           box.min.y + unit(rng) * (box.max.y - box.min.y)};
    if (!map.point_in_any_building(p)) return p;
  }
  throw TaskError("outdoor placement failed after 10000 draws");
}

const Place* pick_place(const WorldMap& map, std::mt19937_64& rng, TaskKind kind,
                        uint64_t seed, const PlaceSelector& selector,
                        bool require_building) {
  if (selector) {
    const Place* p = selector(map, kind, seed);
    if (!p) throw TaskError("selector returned no place");
    return p;
  }
  std::vector<const Place*> candidates;
  for (const auto& p : map.bundle().places)
    if (!require_building || p.building_id) candidates.push_back(&p);
  if (candidates.empty()) throw TaskError("map has no suitable places");
  return candidates[pick_index(rng, candidates.size())];
}

RegionBox door_region(const Place& p, double half = 5.0) {
  return {{p.door.x - half, p.door.y - half}, {p.door.x + half, p.door.y + half}};
}

}  // namespace

std::string TaskSpec::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["kind"] = tasks::to_string(kind);
  j["seed"] = seed;
  j["objects"] = json::array();
  for (const auto& o : objects) {
    json e;
    e["id"] = o.id;
    e["type"] = o.type;
    if (o.outdoor_pos) e["pos"] = {o.outdoor_pos->x, o.outdoor_pos->y};
    if (o.place) e["place"] = *o.place;
    if (o.container) e["container"] = *o.container;
    j["objects"].push_back(std::move(e));
  }
  j["source_place"] = source_place;
  j["destination_place"] = destination_place;
  j["human_id"] = human_id;
  j["search_object"] = search_object;
  if (search_region) j["search_region"] = region_json(*search_region);
  j["schedule"] = json::parse(schedule.to_json());
  j["main_agents"] = main_agents;
  j["members"] = members;
  j["target_regions"] = json::array();
  for (const auto& r : target_regions) j["target_regions"].push_back(region_json(r));
  j["subtasks"] = subtasks;
  j["deadline_ticks"] = deadline_ticks;
  return j.dump();
}

TaskSpec TaskSpec::from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("schema_version", 0) != 1) throw TaskError("unsupported task schema");
  TaskSpec t;
  t.kind = task_kind_from_string(j.at("kind").get<std::string>());
  t.seed = j.value("seed", uint64_t{0});
  for (const auto& e : j.value("objects", json::array())) {
    ObjectSpawn o;
    o.id = e.at("id").get<std::string>();
    o.type = e.at("type").get<std::string>();
    if (e.contains("pos"))
      o.outdoor_pos = Vec2{e["pos"][0].get<double>(), e["pos"][1].get<double>()};
    if (e.contains("place")) o.place = e["place"].get<std::string>();
    if (e.contains("container")) o.container = e["container"].get<std::string>();
    t.objects.push_back(std::move(o));
  }
  t.source_place = j.value("source_place", std::string{});
  t.destination_place = j.value("destination_place", std::string{});
  t.human_id = j.value("human_id", std::string{});
  t.search_object = j.value("search_object", std::string{});
  if (j.contains("search_region")) t.search_region = region_from(j["search_region"]);
  t.schedule = Schedule::from_json(j.value("schedule", json::array()).dump());
  t.main_agents = j.value("main_agents", std::vector<std::string>{});
  t.members = j.value("members", std::vector<std::string>{});
  for (const auto& r : j.value("target_regions", json::array()))
    t.target_regions.push_back(region_from(r));
  t.subtasks = j.value("subtasks", std::vector<std::string>{});
  t.deadline_ticks = j.value("deadline_ticks", 1500);
  return t;
}

TaskSpec generate_assistant_task(const WorldMap& map, uint64_t seed, TaskKind kind,
                                 const PlaceSelector& selector) {
  if (kind == TaskKind::commute) return generate_commute_episode(map, seed).task;

  std::mt19937_64 rng(seed ^ 0x6f63735f7461736bULL);
  Bbox box = scene_bbox(map);
  TaskSpec t;
  t.kind = kind;
  t.seed = seed;

  switch (kind) {
    case TaskKind::delivery: {
      const Place* dest = pick_place(map, rng, kind, seed, selector, true);
      t.destination_place = dest->id;
      size_t n_items = 1 + pick_index(rng, 3);
      for (size_t i = 0; i < n_items; ++i) {
        ObjectSpawn o;
        o.id = "obj" + std::to_string(i);
        o.type = object_types()[pick_index(rng, object_types().size())];
        if (unit(rng) < 0.5) {
          o.outdoor_pos = sample_outdoor(map, box, rng);
          t.target_regions.push_back({{o.outdoor_pos->x - 5, o.outdoor_pos->y - 5},
                                      {o.outdoor_pos->x + 5, o.outdoor_pos->y + 5}});
        } else {
          const Place* src = pick_place(map, rng, kind, seed, nullptr, true);
          o.place = src->id;
          o.container = container_types()[pick_index(rng, container_types().size())];
          if (t.source_place.empty()) t.source_place = src->id;
          t.target_regions.push_back(door_region(*src));
        }
        t.subtasks.push_back("deliver " + o.type + " " + o.id + " to " + dest->id);
        t.objects.push_back(std::move(o));
      }
      t.target_regions.push_back(door_region(*dest));
      break;
    }
    case TaskKind::carry: {
      const Place* home = pick_place(map, rng, kind, seed, selector, true);
      t.destination_place = home->id;
      t.human_id = "human0";
      t.subtasks.push_back("follow " + t.human_id);
      size_t n_items = 1 + pick_index(rng, 2);
      for (size_t i = 0; i < n_items; ++i) {
        ObjectSpawn o;
        o.id = "obj" + std::to_string(i);
        o.type = object_types()[pick_index(rng, object_types().size())];
        o.outdoor_pos = sample_outdoor(map, box, rng);
        t.subtasks.push_back("carry " + o.type + " " + o.id + " to " + home->id);
        t.objects.push_back(std::move(o));
      }
      t.target_regions.push_back(door_region(*home));
      break;
    }
    case TaskKind::search: {
      Vec2 center = sample_outdoor(map, box, rng);
      RegionBox region{{center.x - 30, center.y - 30}, {center.x + 30, center.y + 30}};
      ObjectSpawn o;
      o.id = "obj0";
      o.type = object_types()[pick_index(rng, object_types().size())];
      Bbox inner{region.min, region.max};
      o.outdoor_pos = sample_outdoor(map, inner, rng);
      t.search_object = o.id;
      t.search_region = region;
      t.subtasks.push_back("locate " + o.type + " " + o.id);
      t.target_regions.push_back(region);
      t.objects.push_back(std::move(o));
      break;
    }
    case TaskKind::influence: {
      t.main_agents = {"agent0", "agent1"};
      for (int i = 0; i < 13; ++i) t.members.push_back("member" + std::to_string(i));
      t.subtasks.push_back("win the friendship-ranking vote");
      break;
    }
    case TaskKind::commute:
      break;  // handled above
  }
  if (t.subtasks.empty()) throw TaskError("task has no subtasks");
  return t;
}

CommuteGenResult generate_commute_episode(const WorldMap& map, uint64_t seed) {
  const auto& places = map.bundle().places;
  if (places.size() < 8) throw TaskError("map has fewer than 8 places");
  std::mt19937_64 rng(seed ^ 0x636f6d6d75746523ULL);

  auto leg_length = [&](const Place& a, const Place& b) {
    try {
      return map.road_path_length(a.door, b.door);
    } catch (const WorldError&) {
      return (b.door - a.door).norm();
    }
  };

  constexpr double kTarget = 2500.0;
  std::vector<const Place*> best;
  double best_len = 0.0, best_err = 1e18;
  for (int attempt = 0; attempt < 200; ++attempt) {
    size_t n = 4 + pick_index(rng, 5);
    std::vector<const Place*> route;
    std::vector<size_t> used;
    while (route.size() < n) {
      size_t idx = pick_index(rng, places.size());
      if (std::find(used.begin(), used.end(), idx) != used.end()) continue;
      used.push_back(idx);
      route.push_back(&places[idx]);
    }
    double len = 0.0;
    for (size_t i = 0; i + 1 < route.size(); ++i)
      len += leg_length(*route[i], *route[i + 1]);
    double err = std::abs(len - kTarget);
    if (err < best_err) {
      best_err = err;
      best_len = len;
      best = route;
    }
    if (err <= 0.1 * kTarget) break;
  }

  CommuteGenResult result;
  result.route_length_m = best_len;
  if (best_err > 0.2 * kTarget)
    result.warnings.push_back("route length " + std::to_string(best_len) +
                              " m misses the 2.5 km target");

  // Build the day: sleep at the first place, then commute/main pairs.
  constexpr int kDayEnd = 23 * 3600 + 59 * 60 + 59;
  constexpr int kWake = 7 * 3600;
  Schedule sched;
  auto building_of = [](const Place* p) { return p->building_id; };

  Activity sleep;
  sleep.type = "sleep";
  sleep.activity = "sleep at " + best[0]->name;
  sleep.place = best[0]->id;
  sleep.building = building_of(best[0]);
  sleep.start_s = 0;
  sleep.end_s = kWake;
  sched.activities.push_back(sleep);

  size_t n_legs = best.size() - 1;
  std::vector<int> commute_s(n_legs);
  int commute_total = 0;
  for (size_t i = 0; i < n_legs; ++i) {
    double d = leg_length(*best[i], *best[i + 1]);
    // Walk-feasible at 2 m/s with slack, rounded up to whole minutes.
    int dur = static_cast<int>(std::ceil(d / 1.5 / 60.0)) * 60;
    commute_s[i] = std::max(300, dur);
    commute_total += commute_s[i];
  }
  int main_total = kDayEnd - kWake - commute_total;
  if (main_total < static_cast<int>(n_legs) * 600)
    throw TaskError("commute schedule does not fit in a day");
  int main_each = main_total / static_cast<int>(n_legs);

  int t = kWake;
  for (size_t i = 0; i < n_legs; ++i) {
    Activity c;
    c.type = "commute";
    c.activity = "commute to " + best[i + 1]->name;
    c.start_s = t;
    c.end_s = t + commute_s[i];
    t = c.end_s;
    sched.activities.push_back(c);

    Activity m;
    m.type = i + 1 == n_legs && best[i + 1]->category == PlaceCategory::food
                 ? "meal"
                 : "main";
    m.activity = "visit " + best[i + 1]->name;
    m.place = best[i + 1]->id;
    m.building = building_of(best[i + 1]);
    m.start_s = t;
    m.end_s = i + 1 == n_legs ? kDayEnd : t + main_each;
    t = m.end_s;
    sched.activities.push_back(m);
  }

  TaskSpec task;
  task.kind = TaskKind::commute;
  task.seed = seed;
  task.schedule = sched;
  task.destination_place = best.back()->id;
  for (size_t i = 1; i < best.size(); ++i) {
    task.subtasks.push_back("commute to " + best[i]->id);
    task.target_regions.push_back(door_region(*best[i]));
  }
  result.task = std::move(task);
  return result;
}

// ----------------------------------------------------------------- results

std::string EpisodeResult::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["kind"] = tasks::to_string(kind);
  j["subtask_success"] = subtask_success;
  j["ticks"] = ticks;
  j["follow_frames"] = follow_frames;
  j["total_frames"] = total_frames;
  j["commutes"] = json::array();
  for (const auto& c : commutes)
    j["commutes"].push_back({{"destination", c.destination},
                             {"duration_s", c.duration_s},
                             {"price", c.price},
                             {"walk_m", c.walk_m},
                             {"late", c.late}});
  j["trace_digest"] = trace_digest;
  j["cash_spent"] = cash_spent;
  return j.dump();
}

EpisodeResult EpisodeResult::from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("schema_version", 0) != 1) throw TaskError("unsupported result schema");
  EpisodeResult r;
  r.kind = task_kind_from_string(j.at("kind").get<std::string>());
  r.subtask_success = j.value("subtask_success", std::vector<bool>{});
  r.ticks = j.value("ticks", int64_t{0});
  r.follow_frames = j.value("follow_frames", int64_t{0});
  r.total_frames = j.value("total_frames", int64_t{0});
  for (const auto& e : j.value("commutes", json::array())) {
    CommuteRecord c;
    c.destination = e.value("destination", std::string{});
    c.duration_s = e.value("duration_s", 0.0);
    c.price = e.value("price", 0.0);
    c.walk_m = e.value("walk_m", 0.0);
    c.late = e.value("late", false);
    r.commutes.push_back(std::move(c));
  }
  r.trace_digest = j.value("trace_digest", uint64_t{0});
  r.cash_spent = j.value("cash_spent", 0.0);
  return r;
}

AssistantMetrics eval_assistant(const EpisodeResult& result) {
  AssistantMetrics m;
  if (!result.subtask_success.empty()) {
    int ok = static_cast<int>(
        std::count(result.subtask_success.begin(), result.subtask_success.end(), true));
    m.sr = 100.0 * ok / static_cast<double>(result.subtask_success.size());
  }
  m.ts = static_cast<double>(result.ticks);
  m.hr = result.total_frames > 0
             ? 100.0 * static_cast<double>(result.follow_frames) /
                   static_cast<double>(result.total_frames)
             : 0.0;
  return m;
}

CommuteMetrics eval_commute(const EpisodeResult& result) {
  if (result.commutes.empty()) throw TaskError("result has no commutes");
  CommuteMetrics m;
  int late = 0;
  for (const auto& c : result.commutes) {
    m.travel_time_min += c.duration_s / 60.0;
    m.travel_price += c.price;
    m.walk_km += c.walk_m / 1000.0;
    late += c.late ? 1 : 0;
  }
  m.late_rate = 100.0 * late / static_cast<double>(result.commutes.size());
  return m;
}

InfluenceMetrics eval_influence(
    const std::string& agent,
    const std::map<std::string, std::vector<std::string>>& rankings,
    const std::map<std::string, std::string>& initial_support) {
  InfluenceMetrics m;
  if (rankings.empty()) return m;
  int firsts = 0, non_supporters = 0, converted = 0;
  for (const auto& [member, ranked] : rankings) {
    if (ranked.empty()) throw TaskError("member " + member + " has an empty ranking");
    bool first = ranked.front() == agent;
    if (first) ++firsts;
    auto it = initial_support.find(member);
    if (it == initial_support.end() || it->second != agent) {
      ++non_supporters;
      if (first) ++converted;
    }
  }
  m.win = 100.0 * firsts / static_cast<double>(rankings.size());
  if (non_supporters > 0)
    m.conv = 100.0 * converted / static_cast<double>(non_supporters);
  return m;
}

}  // namespace ocs::tasks
