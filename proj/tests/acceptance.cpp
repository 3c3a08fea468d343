// Acceptance gate: one line per criterion, exit non-zero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "ocs/episode.hpp"
#include "ocs/external_planner.hpp"
#include "ocs/geodata.hpp"
#include "ocs/nav.hpp"
#include "ocs/planners.hpp"
#include "ocs/simcore.hpp"
#include "ocs/tasks.hpp"
#include "ocs/traffic.hpp"
#include "ocs/worldmodel.hpp"

using namespace ocs;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& why = "") {
  if (ok) {
    std::printf("PASS %2d. %s\n", number, name.c_str());
  } else {
    ++g_failures;
    std::printf("FAIL %2d. %s%s%s\n", number, name.c_str(), why.empty() ? "" : " -- ",
                why.c_str());
  }
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const WorldMap& synth_map() {
  static WorldMap map(geodata::synth_scene(1));
  return map;
}

// ---------------------------------------------------------------- criteria

void criterion_1_and_2() {
  auto t0 = std::chrono::steady_clock::now();
  std::string why;
  bool sr_zero = true, ts_exact = true;
  for (tasks::TaskKind kind :
       {tasks::TaskKind::delivery, tasks::TaskKind::carry, tasks::TaskKind::search}) {
    for (uint64_t seed = 1; seed <= 10; ++seed) {
      tasks::TaskSpec task = tasks::generate_assistant_task(synth_map(), seed, kind);
      tasks::PlannerBinding rnd;
      rnd.name = "random";
      rnd.seed = seed;
      tasks::EpisodeOutcome out = tasks::run_episode(synth_map(), task, rnd, 1500);
      tasks::AssistantMetrics m = tasks::eval_assistant(out.result);
      if (m.sr != 0.0) {
        sr_zero = false;
        why = tasks::to_string(kind) + " seed " + std::to_string(seed) + " SR " +
              std::to_string(m.sr);
      }
      if (out.result.ticks != 1500) ts_exact = false;
    }
  }
  double elapsed = seconds_since(t0);
  if (elapsed >= 120.0) why += " runtime " + std::to_string(elapsed) + " s";
  report(1, "random planner scores SR 0.0 on 10 episodes per assistant kind",
         sr_zero && elapsed < 120.0, why);
  report(2, "episodes that hit the limit report Ts = 1500 exactly", ts_exact);
}

void criterion_3() {
  double total_price = 0.0;
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    tasks::CommuteGenResult gen = tasks::generate_commute_episode(synth_map(), seed);
    tasks::PlannerBinding walk;
    walk.name = "walk";
    tasks::EpisodeOutcome out = tasks::run_episode(synth_map(), gen.task, walk, 1500);
    for (const auto& c : out.result.commutes) total_price += c.price;
    if (out.result.commutes.empty()) {
      ok = false;
      why = "seed " + std::to_string(seed) + " produced no commutes";
    }
  }
  if (total_price != 0.0) {
    ok = false;
    why = "total price " + std::to_string(total_price);
  }
  report(3, "direct-walk commute baseline pays exactly 0.00 over 10 episodes", ok, why);
}

void criterion_4() {
  auto t0 = std::chrono::steady_clock::now();
  const double kDiag = std::sqrt(2.0);
  bool ok = true;
  std::string why;
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 100 && ok; ++trial) {
    nav::OccupancyGrid grid;
    grid.origin = {0, 0};
    grid.width = 50;
    grid.height = 50;
    grid.cells.assign(2500, nav::CellState::free);
    for (auto& c : grid.cells)
      if (std::ldexp(double(rng() >> 11), -53) < 0.30) c = nav::CellState::occupied;

    auto free_cell = [&]() {
      while (true) {
        nav::Cell c{int(rng() % 50), int(rng() % 50)};
        if (grid.at(c) == nav::CellState::free) return c;
      }
    };
    nav::Cell start = free_cell(), goal = free_cell();

    // reference: uniform-cost Dijkstra over the same 8-connected grid
    std::vector<double> dist(2500, 1e18);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    dist[start.y * 50 + start.x] = 0.0;
    pq.push({0.0, start.y * 50 + start.x});
    while (!pq.empty()) {
      auto [d, idx] = pq.top();
      pq.pop();
      if (d > dist[idx] + 1e-12) continue;
      int cx = idx % 50, cy = idx / 50;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy) continue;
          nav::Cell n{cx + dx, cy + dy};
          if (grid.at(n) != nav::CellState::free) continue;
          double nd = d + (dx && dy ? kDiag : 1.0);
          int nidx = n.y * 50 + n.x;
          if (nd < dist[nidx] - 1e-12) {
            dist[nidx] = nd;
            pq.push({nd, nidx});
          }
        }
      }
    }
    double oracle = dist[goal.y * 50 + goal.x];

    try {
      auto path = nav::plan_path(grid, start, {goal});
      double cost = nav::path_cost(grid, path);
      if (oracle >= 1e17 || std::abs(cost - oracle) > 1e-9) {
        ok = false;
        why = "trial " + std::to_string(trial) + " cost " + std::to_string(cost) +
              " vs " + std::to_string(oracle);
      }
    } catch (const nav::NavError&) {
      if (oracle < 1e17) {
        ok = false;
        why = "trial " + std::to_string(trial) + " reachable but A* said unreachable";
      }
    }
  }
  double elapsed = seconds_since(t0);
  if (elapsed >= 10.0) {
    ok = false;
    why += " runtime " + std::to_string(elapsed) + " s";
  }
  report(4, "A* cost equals Dijkstra on 100 random 50x50 grids", ok, why);
}

SceneBundle mcts_scene(uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  SceneBundle b;
  RoadSegment r;
  r.id = "main";
  r.centerline = {{0, 0}, {1000, 0}};
  b.roads = {r};
  int k = 3 + int(rng() % 4);   // 3..6 stops
  std::set<int> arcs;
  while (int(arcs.size()) < k) arcs.insert(100 + int(rng() % 17) * 50);
  BusLine line;
  line.id = "L";
  int idx = 0;
  for (int a : arcs) {
    Place p;
    p.id = "stop" + std::to_string(idx++);
    p.name = p.id;
    p.category = PlaceCategory::open;
    p.door = {double(a), 0.0};
    b.places.push_back(p);
    line.stops.push_back(p.id);
    line.offsets_s.push_back(10.0);
  }
  line.loop_period_s = 200.0;
  b.bus_lines = {line};
  b.heightfield = fixtures::flat_field(0.0, 1200.0);
  return b;
}

void criterion_5() {
  int matched = 0;
  bool rewards_exact = true;
  std::string why;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed + 5000);
    WorldMap map(mcts_scene(seed));
    const auto& places = map.bundle().places;
    const Place& goal_stop = places[rng() % places.size()];
    Vec2 goal = goal_stop.door;
    // keep the optimum within 3 legs: the boarding stop (nearest to the
    // start) has no bus child to itself, so start elsewhere
    Vec2 start{double(rng() % 1000), 0.0};
    for (int tries = 0; tries < 200; ++tries) {
      if (map.nearest_stop(start).first != goal_stop.id) break;
      start = {double(rng() % 1000), 0.0};
    }

    plan::MctsParams params;   // alpha = 1
    auto hand = [&](const plan::MctsNode& n) {
      return -(n.d_walk / 2.0 + n.d_bike / 5.0 + n.d_bus / 10.0) -
             distance(n.location, goal);
    };

    // exhaustive enumeration to depth 3
    plan::MctsTree full(map, start, goal, params);
    double best = -1e18;
    std::deque<std::pair<int, int>> frontier = {{0, 0}};   // node, depth
    while (!frontier.empty()) {
      auto [idx, depth] = frontier.front();
      frontier.pop_front();
      if (std::abs(full.simulate_reward(idx) - hand(full.node(idx))) > 1e-9)
        rewards_exact = false;
      best = std::max(best, hand(full.node(idx)));
      if (depth >= 3 || full.is_terminal(full.node(idx))) continue;
      full.expand(idx);
      for (int c : full.node(idx).children) frontier.push_back({c, depth + 1});
    }

    // MCTS at budget 10000, then descend by mean reward as best_plan does
    plan::MctsTree tree(map, start, goal, params);
    tree.run(10000);
    int cur = 0;
    while (!tree.is_terminal(tree.node(cur)) && !tree.node(cur).children.empty()) {
      int pick = -1;
      double pick_mean = -1e18;
      for (int c : tree.node(cur).children) {
        if (tree.node(c).visits == 0) continue;
        double mean = tree.node(c).total / tree.node(c).visits;
        if (mean > pick_mean) {
          pick_mean = mean;
          pick = c;
        }
      }
      if (pick < 0) break;
      cur = pick;
    }
    if (std::abs(hand(tree.node(cur)) - best) <= 1e-9) ++matched;
  }
  if (matched < 95) why = "matched " + std::to_string(matched) + "/100";
  if (!rewards_exact) why += " reward formula mismatch";
  report(5, "MCTS (budget 10000) finds the enumeration optimum on >= 95/100 seeds",
         matched >= 95 && rewards_exact, why);
}

void criterion_6() {
  WorldMap map(fixtures::cross_scene());
  sim::Simulator simu(map);
  simu.add_agent("a", {50, 20});
  std::vector<std::string> objs = {"pkg0", "pkg1", "pkg2"};
  simu.add_object("pkg0", {62, 10});
  simu.add_object("pkg1", {64, 10});
  simu.add_object("pkg2", {66, 10});

  plan::DeliveryFsm fsm;
  fsm.task.object_ids = objs;
  fsm.task.source = {62, 10};
  fsm.task.destination = {50, 20};
  fsm.task.destination_place = "p_home";

  auto obs = simu.step({{"a", sim::Wait{}}});
  int ticks = 0;
  while (fsm.state != 7 && ticks < 300) {
    obs = simu.step({{"a", plan::fsm_delivery_step(fsm, obs.at("a"))}});
    ++ticks;
  }
  int delivered = 0;
  for (const auto& id : objs) {
    const auto& o = simu.object(id);
    if (!o.held_by && o.pos && distance(*o.pos, {50, 20}) <= 5.0) ++delivered;
  }
  const std::set<std::pair<int, int>> allowed = {
      {0, 1}, {1, 2}, {2, 1}, {2, 3}, {3, 1}, {3, 2}, {3, 4},
      {2, 4}, {4, 5}, {5, 0}, {5, 6}, {6, 7}};
  bool edges_ok = true;
  for (size_t i = 1; i < fsm.visited_states.size(); ++i)
    if (!allowed.count({fsm.visited_states[i - 1], fsm.visited_states[i]}))
      edges_ok = false;
  bool ok = fsm.state == 7 && delivered == 3 && ticks <= 300 && edges_ok;
  report(6, "delivery FSM reaches state 7 with SR 100.0 within 300 ticks", ok,
         ok ? "" : "state " + std::to_string(fsm.state) + " delivered " +
                       std::to_string(delivered) + " ticks " + std::to_string(ticks));
}

void criterion_7() {
  WorldMap map(fixtures::cross_scene());
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 10 && ok; ++seed) {
    for (int variant = 0; variant < 2 && ok; ++variant) {
      sim::SimConfig cfg;
      if (variant == 1) {
        cfg.bus_dwell = 4.0;
        cfg.sense_range = 25.0;
      }
      tasks::TaskSpec task;
      task.kind = tasks::TaskKind::delivery;
      task.destination_place = "p_home";
      task.seed = seed;
      tasks::ObjectSpawn o{"obj0", "box", Vec2{150, 80}, std::nullopt, std::nullopt};
      task.objects = {o};
      task.subtasks = {"deliver"};
      tasks::PlannerBinding rnd;
      rnd.name = "random";
      rnd.seed = seed;
      tasks::EpisodeOutcome a = tasks::run_episode(map, task, rnd, 150, cfg);
      tasks::EpisodeOutcome b = tasks::run_episode(map, task, rnd, 150, cfg);
      if (a.digest_chain != b.digest_chain || a.digest_chain.empty()) {
        ok = false;
        why = "seed " + std::to_string(seed) + " variant " + std::to_string(variant);
      }
    }
  }
  report(7, "20 (seed, config) pairs replay with identical digest chains", ok, why);
}

void criterion_8() {
  const WorldMap& map = synth_map();
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 5 && ok; ++seed) {
    traffic::TrafficSim tsim(map);
    tsim.spawn(50, 30, seed);
    for (int t = 0; t < 10000 && ok; ++t) {
      tsim.step(1.0);
      const auto& es = tsim.entities();
      for (const auto& j : map.bundle().junctions) {
        int inside = 0;
        for (const auto& e : es)
          if (distance(e.pos, j.center) < 8.0 - 1.0) ++inside;
        if (inside > 1) {
          ok = false;
          why = "junction " + j.id + " occupancy " + std::to_string(inside) +
                " at tick " + std::to_string(t) + " seed " + std::to_string(seed);
        }
      }
      for (size_t i = 0; i < es.size() && ok; ++i) {
        for (size_t k = i + 1; k < es.size(); ++k) {
          if (es[i].kind != traffic::EntityKind::vehicle ||
              es[k].kind != traffic::EntityKind::vehicle)
            continue;
          if (es[i].segment != es[k].segment || es[i].lane != es[k].lane ||
              es[i].direction != es[k].direction)
            continue;
          if (std::abs(es[i].arc - es[k].arc) < 4.0 - 1e-6) {
            ok = false;
            why = "gap violation at tick " + std::to_string(t) + " seed " +
                  std::to_string(seed);
          }
        }
      }
    }
  }
  report(8, "traffic fuzz: junction occupancy <= 1 and no gap violations", ok, why);
}

void criterion_9() {
  WorldMap map(fixtures::cross_scene());
  sim::Simulator simu(map);
  simu.add_agent("a0", {10, 0}, 25.0);
  simu.add_agent("a1", {190, 0}, 25.0);
  simu.add_agent("a2", {0, 0}, 25.0);
  simu.add_agent("a3", {200, 0}, 25.0);
  bool ok = true;
  std::string why;
  for (int t = 0; t < 400 && ok; ++t) {
    std::map<std::string, sim::Action> acts;
    // a0/a1 rent at their stations, hold for >1 started minute, return
    auto bike_script = [&](const std::string& id, const char* station,
                           int enter_at) -> sim::Action {
      if (t == enter_at) return sim::EnterBike{station};
      if (t > enter_at + 70 &&
          simu.agent(id).mode == sim::AgentMode::riding_bike)
        return sim::ExitBike{station};
      return sim::Wait{};
    };
    acts["a0"] = bike_script("a0", "bike0", 0);
    acts["a1"] = bike_script("a1", "bike1", 5);
    // a2 boards the first dwelling bus at stop a, then exits at a later dwell
    acts["a2"] = sim::Wait{};
    if (simu.agent("a2").mode == sim::AgentMode::walking) {
      for (const auto& bus : simu.transit().buses)
        if (bus.dwell_remaining > 0.0 && distance(simu.agent("a2").pos, bus.pos) <= 5.0)
          acts["a2"] = sim::EnterBus{"L"};
    } else if (t > 60) {
      acts["a2"] = sim::ExitBus{};
    }
    acts["a3"] = t % 9 == 0 ? sim::Action(sim::Turn{0.7})
                            : sim::Action(sim::MoveForward{1.0});
    simu.step(acts);

    double cash = 0.0;
    for (int i = 0; i < 4; ++i) cash += simu.agent("a" + std::to_string(i)).cash;
    double ledger = cash + simu.total_fares_paid() + simu.total_bike_charges();
    if (std::abs(ledger - 100.0) > 1e-9) {
      ok = false;
      why = "ledger " + std::to_string(ledger) + " at tick " + std::to_string(t);
    }
    if (simu.total_bikes() != 8) {
      ok = false;
      why = "bike total " + std::to_string(simu.total_bikes()) + " at tick " +
            std::to_string(t);
    }
  }
  if (simu.total_fares_paid() <= 0.0 || simu.total_bike_charges() <= 0.0) {
    ok = false;
    why = "scenario did not exercise fares/charges";
  }
  report(9, "bike-count and cash-ledger identities hold every tick", ok, why);
}

void criterion_10() {
  SceneBundle b = fixtures::cross_scene();
  Building b2;
  b2.id = "b2";
  b2.footprint = {{120, 20}, {140, 20}, {140, 40}, {120, 40}};
  b.buildings.push_back(b2);
  WorldMap map(std::move(b));

  auto activity = [](const std::string& type, const char* from, const char* to,
                     std::optional<std::string> place = std::nullopt,
                     std::optional<std::string> building = std::nullopt) {
    tasks::Activity a;
    a.type = type;
    a.activity = type;
    a.place = place;
    a.building = building;
    a.start_s = tasks::parse_hms(from);
    a.end_s = tasks::parse_hms(to);
    return a;
  };
  auto has_code = [](const std::vector<tasks::Violation>& v, const std::string& code) {
    for (const auto& x : v)
      if (x.code == code) return true;
    return false;
  };

  bool ok = true;
  std::string why;

  std::vector<tasks::Schedule> accepts(5);
  accepts[0].activities = {activity("sleep", "00:00:00", "08:00:00", "p_home", "b1"),
                           activity("main", "08:00:00", "23:59:59", "p_home", "b1")};
  accepts[1].activities = {activity("sleep", "00:00:00", "07:00:00", "p_home", "b1"),
                           activity("commute", "07:00:00", "07:30:00"),
                           activity("main", "07:30:00", "23:59:59", "p_stop_b", "b2")};
  accepts[2].activities = {activity("sleep", "00:00:00", "07:59:59", "p_home", "b1"),
                           activity("main", "08:00:00", "23:59:59", "p_home", "b1")};
  accepts[3].activities = {activity("sleep", "00:00:00", "12:00:00"),
                           activity("main", "12:00:00", "23:59:59")};
  accepts[4].activities = {activity("sleep", "00:00:00", "11:00:00", "p_home", "b1"),
                           activity("meal", "11:00:00", "12:00:00", "p_home", "b1"),
                           activity("main", "12:00:00", "23:59:59", "p_home", "b1")};
  for (size_t i = 0; i < accepts.size(); ++i) {
    // JSON shape round-trip then validation
    tasks::Schedule s = tasks::Schedule::from_json(accepts[i].to_json());
    if (!tasks::validate_schedule(s, map).empty()) {
      ok = false;
      why = "accept fixture " + std::to_string(i) + " rejected";
    }
  }

  tasks::Schedule gap;
  gap.activities = {activity("sleep", "00:00:00", "07:30:00", "p_home", "b1"),
                    activity("main", "07:40:00", "23:59:59", "p_home", "b1")};
  if (!has_code(tasks::validate_schedule(gap, map), "gap")) ok = false;

  tasks::Schedule overlap;
  overlap.activities = {activity("sleep", "00:00:00", "08:00:00", "p_home", "b1"),
                        activity("main", "07:45:00", "23:59:59", "p_home", "b1")};
  if (!has_code(tasks::validate_schedule(overlap, map), "overlap")) ok = false;

  tasks::Schedule teleport;
  teleport.activities = {activity("sleep", "00:00:00", "12:00:00", "p_home", "b1"),
                         activity("main", "12:00:00", "23:59:59", "p_stop_b", "b2")};
  if (!has_code(tasks::validate_schedule(teleport, map), "missing_commute")) ok = false;

  tasks::Schedule ghost;
  ghost.activities = {activity("sleep", "00:00:00", "12:00:00", "p_ghost"),
                      activity("main", "12:00:00", "23:59:59")};
  if (!has_code(tasks::validate_schedule(ghost, map), "unknown_place")) ok = false;

  report(10, "schedule validator accepts 5 fixtures and rejects with exact codes", ok,
         why);
}

void criterion_11() {
  std::vector<geodata::ElevationSample> samples;
  for (int r = 0; r <= 10; ++r)
    for (int c = 0; c <= 10; ++c)
      samples.push_back({c * 10.0, r * 10.0,
                         10.0 + 3.0 * std::sin(c * 0.5) + 2.0 * std::cos(r * 0.7)});
  Heightfield hf = geodata::build_heightfield(samples, 10.0);
  SceneBundle b = fixtures::bare_scene();
  b.heightfield = hf;
  WorldMap map(std::move(b));

  bool ok = true;
  std::string why;
  double zmin = 1e18, zmax = -1e18;
  for (const auto& s : samples) {
    zmin = std::min(zmin, s.z);
    zmax = std::max(zmax, s.z);
    if (std::abs(map.elevation_at({s.x, s.y}) - s.z) > 1e-9) {
      ok = false;
      why = "node query off at " + std::to_string(s.x) + "," + std::to_string(s.y);
    }
  }
  std::mt19937_64 rng(1111);
  for (int i = 0; i < 1000; ++i) {
    Vec2 p{std::ldexp(double(rng() >> 11), -53) * 100.0,
           std::ldexp(double(rng() >> 11), -53) * 100.0};
    double z = map.elevation_at(p);
    if (z < zmin - 1e-9 || z > zmax + 1e-9) {
      ok = false;
      why = "interior query out of corner bounds";
    }
  }

  samples.push_back({55.0, 55.0, 500.0});
  Heightfield spiked = geodata::build_heightfield(samples, 10.0);
  double spiked_max = -1e18;
  for (double z : spiked.elevations) spiked_max = std::max(spiked_max, z);
  if (spiked_max > 100.0) {
    ok = false;
    why = "500 m outlier survived (max " + std::to_string(spiked_max) + ")";
  }
  report(11, "heightfield: exact node queries, bounded interior, outlier filtered", ok,
         why);
}

void criterion_12() {
  bool ok = true;
  std::string why;
  double total = 0.0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    tasks::CommuteGenResult r = tasks::generate_commute_episode(synth_map(), seed);
    size_t places = r.task.subtasks.size() + 1;
    if (places < 4 || places > 8) {
      ok = false;
      why = "seed " + std::to_string(seed) + " uses " + std::to_string(places) +
            " places";
    }
    total += r.route_length_m;
  }
  double mean = total / 100.0;
  if (mean < 2000.0 || mean > 3000.0) {
    ok = false;
    why = "mean route " + std::to_string(mean) + " m";
  }
  report(12, "commute generator: 4-8 places, mean route within 20% of 2.5 km", ok, why);
}

void criterion_13() {
  bool ok = true;
  std::string why;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    SceneBundle b = geodata::synth_scene(seed);
    auto within = [](size_t n, double target) {
      return double(n) >= 0.5 * target && double(n) <= 1.5 * target;
    };
    if (!within(b.buildings.size(), 53.0) || !within(b.places.size(), 85.0) ||
        !within(b.junctions.size(), 76.0)) {
      ok = false;
      why = "seed " + std::to_string(seed) + ": " + std::to_string(b.buildings.size()) +
            " buildings, " + std::to_string(b.places.size()) + " places, " +
            std::to_string(b.junctions.size()) + " junctions";
    }
  }
  report(13, "synth_scene statistics within 50% of reference averages", ok, why);
}

void criterion_14() {
  WorldMap map(fixtures::cross_scene());
  tasks::TaskSpec task;
  task.kind = tasks::TaskKind::delivery;
  task.destination_place = "p_home";
  tasks::ObjectSpawn o{"obj0", "box", Vec2{51, 19}, std::nullopt, std::nullopt};
  task.objects = {o};
  task.subtasks = {"deliver box obj0 to p_home"};

  bool ok = true;
  std::string why;

  tasks::PlannerBinding good;
  good.name = "external";
  good.external_command =
      "while read l; do echo '{\"action\":{\"type\":\"task_complete\",\"subtask\":0}}';"
      " done";
  tasks::EpisodeOutcome done = tasks::run_episode(map, task, good, 50);
  if (tasks::eval_assistant(done.result).sr != 100.0 || !done.planner_failures.empty()) {
    ok = false;
    why = "stub episode SR " + std::to_string(tasks::eval_assistant(done.result).sr);
  }

  tasks::PlannerBinding garbled;
  garbled.name = "external";
  garbled.external_command = "while read l; do echo 'garbage'; done";
  tasks::EpisodeOutcome bad = tasks::run_episode(map, task, garbled, 5);
  bool saw_bad = false;
  for (const auto& f : bad.planner_failures) saw_bad = saw_bad || f == "bad plan";
  if (!saw_bad || bad.result.ticks != 5) {
    ok = false;
    why = "malformed stub: " + std::to_string(bad.planner_failures.size()) +
          " failures, ticks " + std::to_string(bad.result.ticks);
  }

  // timeout status through the same bridge the episode loop uses
  plan::ExternalPlanner slow("sleep 30", 0.3);
  auto r = slow.query(0, sim::Observation{});
  if (r.failure != "planner timeout") {
    ok = false;
    why = "timeout status was '" + r.failure + "'";
  }
  report(14, "external bridge: stub completes; malformed/timeout degrade gracefully",
         ok, why);
}

}  // namespace

int main() {
  criterion_1_and_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  criterion_13();
  criterion_14();
  std::printf("%s: %d criterion failure(s)\n", g_failures ? "FAILURE" : "SUCCESS",
              g_failures);
  return g_failures ? 1 : 0;
}
