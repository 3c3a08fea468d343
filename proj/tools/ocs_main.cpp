#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ocs/episode.hpp"
#include "ocs/geodata.hpp"
#include "ocs/tasks.hpp"
#include "ocs/worldmodel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ocs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("no such file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (fs::path(path).has_parent_path())
    fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << text;
}

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

// TOML-style key = value lines; '#' comments. Flags win over file values.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\"");
      size_t e = s.find_last_not_of(" \t\"");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = val;
  }
  return kv;
}

bool command_exists(const std::string& command) {
  std::istringstream in(command);
  std::string head;
  in >> head;
  if (head.empty()) return false;
  if (head.find('/') != std::string::npos) return fs::exists(head);
  const char* path_env = std::getenv("PATH");
  if (!path_env) return false;
  std::istringstream paths(path_env);
  std::string dir;
  while (std::getline(paths, dir, ':'))
    if (!dir.empty() && fs::exists(fs::path(dir) / head)) return true;
  return false;
}

tasks::PlannerBinding make_binding(const std::string& spec, uint64_t seed) {
  tasks::PlannerBinding b;
  b.seed = seed;
  if (spec.rfind("exec:", 0) == 0) {
    b.name = "external";
    b.external_command = spec.substr(5);
    if (b.external_command.empty() || !command_exists(b.external_command))
      throw CLI::ValidationError("--planner", "external planner command missing");
    return b;
  }
  static const std::vector<std::string> kKnown = {"random", "fsm", "mcts", "walk",
                                                 "wait"};
  if (std::find(kKnown.begin(), kKnown.end(), spec) == kKnown.end())
    throw CLI::ValidationError("--planner", "unknown planner: " + spec);
  b.name = spec;
  return b;
}

// ----------------------------------------------------------------- ingest

int cmd_ingest(const std::string& osm_path, const std::string& elev_path,
               const std::string& out_path, uint64_t seed) {
  std::string osm = read_file(osm_path);
  std::string elev = read_file(elev_path);
  SceneBundle bundle = geodata::ingest(osm, elev, {}, seed);
  bundle.validate();
  write_file(out_path, bundle.to_json());
  std::cout << "scene: " << out_path << "\n"
            << "roads: " << bundle.roads.size() << "\n"
            << "junctions: " << bundle.junctions.size() << "\n"
            << "buildings: " << bundle.buildings.size() << "\n"
            << "places: " << bundle.places.size() << "\n"
            << "bus_lines: " << bundle.bus_lines.size() << "\n"
            << "bike_stations: " << bundle.bike_stations.size() << "\n";
  return kExitOk;
}

int cmd_synth(uint64_t seed, const std::string& out_path) {
  SceneBundle bundle = geodata::synth_scene(seed);
  write_file(out_path, bundle.to_json());
  std::cout << "scene: " << out_path << " (seed " << seed << ")\n";
  return kExitOk;
}

// -------------------------------------------------------------------- run

struct EpisodeJob {
  int index = 0;
  tasks::TaskSpec task;
  std::string planner_spec;
  int steps = 1500;
};

int cmd_run(const std::string& scene_path, const std::string& manifest_path,
            const std::string& planner_spec, uint64_t seed, int steps,
            const std::string& out_dir, int jobs) {
  WorldMap map = WorldMap::load(read_file(scene_path));

  std::vector<EpisodeJob> plan;
  if (!manifest_path.empty()) {
    json manifest = json::parse(read_file(manifest_path));
    int idx = 0;
    for (const auto& e : manifest) {
      EpisodeJob job;
      job.index = idx++;
      uint64_t ep_seed = e.value("seed", seed);
      std::string kind = e.value("kind", std::string("delivery"));
      if (e.contains("task"))
        job.task = tasks::TaskSpec::from_json(e["task"].dump());
      else
        job.task = tasks::generate_assistant_task(
            map, ep_seed, tasks::task_kind_from_string(kind));
      job.planner_spec = e.value("planner", planner_spec);
      job.steps = e.value("steps", steps);
      plan.push_back(std::move(job));
    }
  } else {
    EpisodeJob job;
    job.task = tasks::generate_assistant_task(map, seed, tasks::TaskKind::delivery);
    job.planner_spec = planner_spec;
    job.steps = steps;
    plan.push_back(std::move(job));
  }
  // validate every planner spec up front so a bad manifest exits 2
  for (const auto& job : plan) make_binding(job.planner_spec, job.task.seed);

  std::vector<std::string> rows(plan.size());
  std::vector<std::string> errors(plan.size());
  std::mutex io_mutex;
  std::atomic<size_t> cursor{0};

  auto worker = [&]() {
    while (true) {
      size_t i = cursor.fetch_add(1);
      if (i >= plan.size()) return;
      const EpisodeJob& job = plan[i];
      try {
        tasks::PlannerBinding binding = make_binding(job.planner_spec, job.task.seed);
        tasks::EpisodeOutcome outcome =
            tasks::run_episode(map, job.task, binding, job.steps);

        json result = json::parse(outcome.result.to_json());
        result["planner"] = job.planner_spec;
        std::string stem = out_dir + "/result_" + std::to_string(job.index);
        {
          std::lock_guard<std::mutex> lock(io_mutex);
          write_file(stem + ".json", result.dump(2) + "\n");
          write_file(out_dir + "/trace_" + std::to_string(job.index) + ".jsonl",
                     outcome.trace_jsonl);
        }
        std::ostringstream row;
        row << job.index << "," << tasks::to_string(job.task.kind) << ","
            << job.planner_spec;
        if (job.task.kind == tasks::TaskKind::commute) {
          tasks::CommuteMetrics m = tasks::eval_commute(outcome.result);
          row << ",,,," << fmt1(m.travel_time_min) << "," << fmt1(m.travel_price)
              << "," << fmt1(m.walk_km) << "," << fmt1(m.late_rate);
        } else {
          tasks::AssistantMetrics m = tasks::eval_assistant(outcome.result);
          row << "," << fmt1(m.sr) << "," << fmt1(m.ts) << "," << fmt1(m.hr)
              << ",,,,";
        }
        rows[i] = row.str();
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  int n_threads = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "episode,kind,planner,sr,ts,hr,travel_time_min,travel_price,walk_km,"
         "late_rate\n";
  for (const auto& r : rows)
    if (!r.empty()) csv << r << "\n";
  write_file(out_dir + "/summary.csv", csv.str());
  std::cout << csv.str();

  for (size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      std::cerr << "episode " << i << " failed: " << errors[i] << "\n";
  return kExitOk;   // task failures are data, not exit codes
}

// ------------------------------------------------------------------- eval

int cmd_eval(const std::string& results_dir) {
  struct Bucket {
    int n = 0;
    double sr = 0, ts = 0, hr = 0;
    double tt = 0, price = 0, walk = 0, late = 0;
    bool commute = false;
  };
  std::map<std::pair<std::string, std::string>, Bucket> buckets;

  if (!fs::is_directory(results_dir)) {
    std::cerr << "no such results directory: " << results_dir << "\n";
    return kExitUsage;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(results_dir)) {
    std::string name = entry.path().filename().string();
    if (name.rfind("result_", 0) == 0 && entry.path().extension() == ".json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "no result files in " << results_dir << "\n";
    return kExitUsage;
  }

  int loaded = 0;
  for (const auto& path : files) {
    try {
      std::string text = read_file(path.string());
      json j = json::parse(text);
      tasks::EpisodeResult r = tasks::EpisodeResult::from_json(text);
      std::string planner = j.value("planner", std::string("?"));
      Bucket& b = buckets[{tasks::to_string(r.kind), planner}];
      ++b.n;
      ++loaded;
      if (r.kind == tasks::TaskKind::commute) {
        b.commute = true;
        tasks::CommuteMetrics m = tasks::eval_commute(r);
        b.tt += m.travel_time_min;
        b.price += m.travel_price;
        b.walk += m.walk_km;
        b.late += m.late_rate;
      } else {
        tasks::AssistantMetrics m = tasks::eval_assistant(r);
        b.sr += m.sr;
        b.ts += m.ts;
        b.hr += m.hr;
      }
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping " << path.string() << ": " << e.what() << "\n";
    }
  }
  if (loaded == 0) {
    std::cerr << "no readable result files in " << results_dir << "\n";
    return kExitUsage;
  }

  std::cout << "kind,planner,episodes,sr,ts,hr,travel_time_min,travel_price,"
               "walk_km,late_rate\n";
  for (const auto& [key, b] : buckets) {
    std::cout << key.first << "," << key.second << "," << b.n << ",";
    if (b.commute)
      std::cout << ",,," << fmt1(b.tt / b.n) << "," << fmt1(b.price / b.n) << ","
                << fmt1(b.walk / b.n) << "," << fmt1(b.late / b.n) << "\n";
    else
      std::cout << fmt1(b.sr / b.n) << "," << fmt1(b.ts / b.n) << ","
                << fmt1(b.hr / b.n) << ",,,,\n";
  }
  return kExitOk;
}

// ------------------------------------------------------------------ trace

int cmd_trace(const std::string& trace_path, const std::string& agent_filter,
              int64_t tick_filter, bool show_digest) {
  std::istringstream in(read_file(trace_path));
  std::string line;
  int lineno = 0;
  std::vector<uint64_t> digests;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception&) {
      std::cerr << "malformed trace line " << lineno << "\n";
      return kExitUsage;
    }
    if (j.contains("digest")) {
      uint64_t d = j["digest"].get<uint64_t>();
      if (digests.empty() || digests.back() != d) digests.push_back(d);
    }
    if (!agent_filter.empty() && j.value("agent", std::string{}) != agent_filter)
      continue;
    if (tick_filter >= 0 && j.value("tick", int64_t{-1}) != tick_filter) continue;
    if (!show_digest)
      std::cout << "[" << j.value("tick", int64_t{0}) << "] "
                << j.value("type", std::string("?"))
                << (j.contains("agent") ? " " + j["agent"].get<std::string>() : "")
                << " " << j.dump() << "\n";
  }
  if (show_digest) {
    size_t tail = std::min<size_t>(digests.size(), 10);
    for (size_t i = digests.size() - tail; i < digests.size(); ++i)
      std::cout << "digest[" << i << "] = " << digests[i] << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"community simulator and benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  if (const char* env = std::getenv("OCS_CONFIG")) config_path = env;
  app.add_option("--config", config_path, "key = value config file");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "build a scene from OSM + elevation");
  std::string osm_path, elev_path, out_path = "scene.json";
  uint64_t seed = 0;
  ingest->add_option("--osm", osm_path, "OSM XML extract")->required();
  ingest->add_option("--elevation", elev_path, "elevation sample CSV")->required();
  ingest->add_option("--out", out_path, "output scene bundle path");
  ingest->add_option("--seed", seed, "transit annotation seed");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  synth->add_option("--seed", seed, "scene seed");
  synth->add_option("--out", out_path, "output scene bundle path");

  // run
  auto* run = app.add_subcommand("run", "run benchmark episodes");
  std::string scene_path, manifest_path, planner_spec = "fsm", out_dir = "results";
  int steps = 1500, jobs = 1;
  run->add_option("--scene", scene_path, "scene bundle path");
  run->add_option("--manifest", manifest_path, "episode manifest JSON");
  run->add_option("--planner", planner_spec, "planner name or exec:CMD");
  run->add_option("--seed", seed, "default episode seed");
  run->add_option("--steps", steps, "step limit (default 1500)");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "parallel episodes");

  // eval
  auto* eval = app.add_subcommand("eval", "aggregate result files");
  std::string results_dir = "results";
  eval->add_option("--results", results_dir, "results directory");
  eval->add_option("--out", out_path, "unused; kept for symmetry");

  // trace
  auto* trace = app.add_subcommand("trace", "inspect a trace JSONL file");
  std::string trace_path, agent_filter;
  int64_t tick_filter = -1;
  bool show_digest = false;
  trace->add_option("--trace", trace_path, "trace file")->required();
  trace->add_option("--agent", agent_filter, "only this agent's events");
  trace->add_option("--tick", tick_filter, "only this tick");
  trace->add_flag("--digest", show_digest, "print the digest chain tail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!config_path.empty() && fs::exists(config_path)) {
      auto kv = load_config(config_path);
      auto set_if_default = [&](CLI::App* sub, const std::string& flag,
                                auto& target) {
        auto it = kv.find(flag);
        if (it == kv.end()) return;
        CLI::Option* opt = sub->get_option_no_throw("--" + flag);
        if (opt && opt->count() == 0) {
          std::istringstream ss(it->second);
          ss >> target;
        }
      };
      for (CLI::App* sub : {ingest, synth, run, eval, trace}) {
        if (!sub->parsed()) continue;
        set_if_default(sub, "scene", scene_path);
        set_if_default(sub, "manifest", manifest_path);
        set_if_default(sub, "planner", planner_spec);
        set_if_default(sub, "seed", seed);
        set_if_default(sub, "steps", steps);
        set_if_default(sub, "out", sub == run ? out_dir : out_path);
        set_if_default(sub, "jobs", jobs);
        set_if_default(sub, "results", results_dir);
      }
    }

    if (ingest->parsed()) return cmd_ingest(osm_path, elev_path, out_path, seed);
    if (synth->parsed()) return cmd_synth(seed, out_path);
    if (run->parsed()) {
      if (scene_path.empty()) {
        std::cerr << "run: --scene is required (flag or config)\n";
        return kExitUsage;
      }
      return cmd_run(scene_path, manifest_path, planner_spec, seed, steps, out_dir,
                     jobs);
    }
    if (eval->parsed()) return cmd_eval(results_dir);
    if (trace->parsed())
      return cmd_trace(trace_path, agent_filter, tick_filter, show_digest);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const geodata::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const geodata::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const SceneError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const tasks::TaskError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    std::cerr << msg << "\n";
    return msg.rfind("no such file", 0) == 0 || msg.rfind("cannot write", 0) == 0
               ? kExitUsage
               : kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
