#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ocs/episode.hpp"
#include "ocs/geodata.hpp"
#include "ocs/nav.hpp"
#include "ocs/planners.hpp"
#include "ocs/protocol.hpp"
#include "ocs/simcore.hpp"
#include "ocs/tasks.hpp"
#include "ocs/worldmodel.hpp"

namespace py = pybind11;
using namespace ocs;

PYBIND11_MODULE(_ocs, m) {
  m.doc() = "community simulator core";

  // ------------------------------------------------------------- geodata
  m.def(
      "synth_scene",
      [](uint64_t seed) { return geodata::synth_scene(seed).to_json(); },
      py::arg("seed") = 0, "Generate a synthetic scene bundle (JSON).");
  m.def(
      "ingest",
      [](const std::string& osm, const std::string& elevation, uint64_t seed) {
        return geodata::ingest(osm, elevation, {}, seed).to_json();
      },
      py::arg("osm_xml"), py::arg("elevation_csv"), py::arg("seed") = 0,
      "Run the OSM + elevation ingest pipeline; returns the bundle JSON.");

  // ----------------------------------------------------------- worldmodel
  py::class_<WorldMap>(m, "WorldMap")
      .def(py::init([](const std::string& json_text) {
             return WorldMap::load(json_text);
           }),
           py::arg("scene_json"))
      .def("elevation_at",
           [](const WorldMap& w, double x, double y) {
             return w.elevation_at({x, y});
           })
      .def("line_of_sight",
           [](const WorldMap& w, double ax, double ay, double bx, double by) {
             return w.line_of_sight({ax, ay}, {bx, by});
           })
      .def("nearest_stop",
           [](const WorldMap& w, double x, double y) { return w.nearest_stop({x, y}); })
      .def("nearest_station",
           [](const WorldMap& w, double x, double y) {
             return w.nearest_station({x, y});
           })
      .def("road_path_length",
           [](const WorldMap& w, double ax, double ay, double bx, double by) {
             return w.road_path_length({ax, ay}, {bx, by});
           })
      .def("scene_json", [](const WorldMap& w) { return w.bundle().to_json(); });

  // -------------------------------------------------------------- simcore
  py::class_<sim::Simulator>(m, "Simulator")
      .def(py::init([](const WorldMap& map, uint64_t seed) {
             return new sim::Simulator(map, {}, seed);
           }),
           py::arg("map"), py::arg("seed") = 0, py::keep_alive<1, 2>())
      .def("add_agent",
           [](sim::Simulator& s, const std::string& id, double x, double y,
              double cash) { s.add_agent(id, {x, y}, cash); },
           py::arg("id"), py::arg("x"), py::arg("y"), py::arg("cash") = 0.0)
      .def("add_object",
           [](sim::Simulator& s, const std::string& id, double x, double y) {
             s.add_object(id, {x, y});
           })
      .def("step",
           [](sim::Simulator& s, const std::map<std::string, std::string>& actions) {
             std::map<std::string, sim::Action> parsed;
             for (const auto& [id, text] : actions)
               parsed[id] = proto::action_from_json(text);
             std::map<std::string, std::string> out;
             for (auto& [id, obs] : s.step(parsed))
               out[id] = proto::observation_to_json(obs);
             return out;
           },
           "Apply one tick of {agent id: action JSON}; returns observations.")
      .def("sense",
           [](const sim::Simulator& s, const std::string& agent) {
             return proto::observation_to_json(s.sense(agent));
           })
      .def("sim_time", &sim::Simulator::sim_time)
      .def("digest_chain", &sim::Simulator::digest_chain)
      .def("current_digest", &sim::Simulator::current_digest)
      .def("trace_jsonl", &sim::Simulator::trace_jsonl)
      .def("state_json", &sim::Simulator::state_json)
      .def("load_state", &sim::Simulator::load_state)
      .def("total_bikes", &sim::Simulator::total_bikes)
      .def("total_fares_paid", &sim::Simulator::total_fares_paid)
      .def("total_bike_charges", &sim::Simulator::total_bike_charges);

  // ------------------------------------------------------------- planners
  m.def(
      "mcts_plan",
      [](const WorldMap& map, double sx, double sy, double gx, double gy, int budget,
         uint64_t seed) {
        plan::CommutePlan p = plan::mcts_plan(map, {sx, sy}, {gx, gy}, budget, {}, seed);
        py::list legs;
        for (const auto& leg : p.legs) {
          py::dict d;
          d["transit_type"] = leg.type == plan::TransitType::bus    ? "bus"
                              : leg.type == plan::TransitType::bike ? "bike"
                                                                    : "walk";
          d["point"] = py::make_tuple(leg.point.x, leg.point.y);
          if (leg.place) d["goal_place"] = *leg.place;
          legs.append(d);
        }
        return legs;
      },
      py::arg("map"), py::arg("sx"), py::arg("sy"), py::arg("gx"), py::arg("gy"),
      py::arg("budget") = 2000, py::arg("seed") = 0);
  m.def("simulate_reward",
        [](double d_walk, double d_bike, double d_bus, double d_target) {
          return plan::simulate_reward(d_walk, d_bike, d_bus, d_target, {});
        });
  m.def("rl_reward", [](bool goal, double d0, double dt, bool walked,
                        double cash_spent, bool acted) {
    return plan::rl_reward({goal, d0, dt, walked, cash_spent, acted});
  });

  // ---------------------------------------------------------------- tasks
  m.def(
      "generate_task",
      [](const WorldMap& map, uint64_t seed, const std::string& kind) {
        return tasks::generate_assistant_task(map, seed,
                                              tasks::task_kind_from_string(kind))
            .to_json();
      },
      py::arg("map"), py::arg("seed"), py::arg("kind"));
  m.def("generate_commute_episode", [](const WorldMap& map, uint64_t seed) {
    auto gen = tasks::generate_commute_episode(map, seed);
    return py::make_tuple(gen.task.to_json(), gen.route_length_m, gen.warnings);
  });
  m.def("validate_schedule",
        [](const std::string& schedule_json, const WorldMap& map) {
          auto violations =
              tasks::validate_schedule(tasks::Schedule::from_json(schedule_json), map);
          py::list out;
          for (const auto& v : violations) out.append(py::make_tuple(v.code, v.detail));
          return out;
        });
  m.def(
      "run_episode",
      [](const WorldMap& map, const std::string& task_json, const std::string& planner,
         int step_limit, uint64_t seed) {
        tasks::TaskSpec task = tasks::TaskSpec::from_json(task_json);
        tasks::PlannerBinding binding;
        if (planner.rfind("exec:", 0) == 0) {
          binding.name = "external";
          binding.external_command = planner.substr(5);
        } else {
          binding.name = planner;
        }
        binding.seed = seed;
        auto outcome = tasks::run_episode(map, task, binding, step_limit);
        return outcome.result.to_json();
      },
      py::arg("map"), py::arg("task_json"), py::arg("planner") = "fsm",
      py::arg("step_limit") = 1500, py::arg("seed") = 0);
  m.def("eval_assistant", [](const std::string& result_json) {
    auto m2 = tasks::eval_assistant(tasks::EpisodeResult::from_json(result_json));
    return py::make_tuple(m2.sr, m2.ts, m2.hr);
  });
  m.def("eval_commute", [](const std::string& result_json) {
    auto m2 = tasks::eval_commute(tasks::EpisodeResult::from_json(result_json));
    return py::make_tuple(m2.travel_time_min, m2.travel_price, m2.walk_km,
                          m2.late_rate);
  });
  m.def("eval_influence",
        [](const std::string& agent,
           const std::map<std::string, std::vector<std::string>>& rankings,
           const std::map<std::string, std::string>& initial_support) {
          auto m2 = tasks::eval_influence(agent, rankings, initial_support);
          return py::make_tuple(m2.win, m2.conv ? py::object(py::float_(*m2.conv))
                                                : py::object(py::none()));
        });
}
