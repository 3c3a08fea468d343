#include "ocs/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace ocs {

using nlohmann::json;

std::string to_string(PlaceCategory c) {
  switch (c) {
    case PlaceCategory::accommodation: return "accommodation";
    case PlaceCategory::entertainment: return "entertainment";
    case PlaceCategory::food: return "food";
    case PlaceCategory::office: return "office";
    case PlaceCategory::stores: return "stores";
    case PlaceCategory::open: return "open";
  }
  return "open";
}

PlaceCategory place_category_from_string(const std::string& s) {
  if (s == "accommodation") return PlaceCategory::accommodation;
  if (s == "entertainment") return PlaceCategory::entertainment;
  if (s == "food") return PlaceCategory::food;
  if (s == "office") return PlaceCategory::office;
  if (s == "stores") return PlaceCategory::stores;
  if (s == "open") return PlaceCategory::open;
  throw SceneError("unknown place category: " + s);
}

const Place* SceneBundle::find_place(const std::string& id) const {
  for (const auto& p : places)
    if (p.id == id) return &p;
  return nullptr;
}

const Building* SceneBundle::find_building(const std::string& id) const {
  for (const auto& b : buildings)
    if (b.id == id) return &b;
  return nullptr;
}

void SceneBundle::validate() const {
  std::set<std::string> seg_ids;
  for (const auto& r : roads) {
    if (!seg_ids.insert(r.id).second) throw SceneError("duplicate segment id " + r.id);
    if (r.centerline.size() < 2) throw SceneError("segment " + r.id + " has < 2 points");
    for (const auto& p : r.centerline)
      if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw SceneError("segment " + r.id + " has non-finite point");
  }
  for (const auto& j : junctions)
    for (const auto& s : j.incident_segments)
      if (!seg_ids.count(s))
        throw SceneError("junction " + j.id + " references unknown segment " + s);
  for (const auto& b : buildings) {
    if (b.footprint.size() < 3) throw SceneError("building " + b.id + " footprint degenerate");
    if (!polygon_is_simple(b.footprint))
      throw SceneError("building " + b.id + " footprint self-intersects");
  }
  for (const auto& p : places)
    if (p.building_id && !find_building(*p.building_id))
      throw SceneError("place " + p.id + " references unknown building " + *p.building_id);
  for (const auto& line : bus_lines) {
    for (const auto& s : line.stops)
      if (!find_place(s)) throw SceneError("bus line " + line.id + " stops at unknown place " + s);
    if (line.offsets_s.size() != line.stops.size())
      throw SceneError("bus line " + line.id + " offsets/stops mismatch");
  }
  if (heightfield.rows > 0) {
    if (heightfield.rows < 2 || heightfield.cols < 2 || heightfield.cell_size <= 0.0)
      throw SceneError("heightfield shape invalid");
    for (double z : heightfield.elevations)
      if (!std::isfinite(z)) throw SceneError("heightfield has non-finite elevation");
  }
}

static json vec_to_json(const Vec2& v) { return json::array({v.x, v.y}); }
static Vec2 vec_from_json(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

static json polyline_to_json(const Polyline& pl) {
  json a = json::array();
  for (const auto& p : pl) a.push_back(vec_to_json(p));
  return a;
}

static Polyline polyline_from_json(const json& j) {
  Polyline pl;
  for (const auto& e : j) pl.push_back(vec_from_json(e));
  return pl;
}

std::string SceneBundle::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["roads"] = json::array();
  for (const auto& r : roads)
    j["roads"].push_back({{"id", r.id},
                          {"centerline", polyline_to_json(r.centerline)},
                          {"width", r.width},
                          {"lane_count", r.lane_count},
                          {"one_way", r.one_way}});
  j["junctions"] = json::array();
  for (const auto& x : junctions)
    j["junctions"].push_back({{"id", x.id},
                              {"center", vec_to_json(x.center)},
                              {"radius", x.radius},
                              {"incident_segments", x.incident_segments}});
  j["buildings"] = json::array();
  for (const auto& b : buildings)
    j["buildings"].push_back({{"id", b.id},
                              {"name", b.name},
                              {"footprint", polyline_to_json(b.footprint)},
                              {"height", b.height},
                              {"category", b.category}});
  j["places"] = json::array();
  for (const auto& p : places) {
    json e = {{"id", p.id},
              {"name", p.name},
              {"category", to_string(p.category)},
              {"door", vec_to_json(p.door)}};
    if (p.building_id) e["building"] = *p.building_id;
    j["places"].push_back(e);
  }
  j["bus_lines"] = json::array();
  for (const auto& l : bus_lines)
    j["bus_lines"].push_back({{"id", l.id},
                              {"stops", l.stops},
                              {"offsets_s", l.offsets_s},
                              {"loop_period_s", l.loop_period_s}});
  j["bike_stations"] = json::array();
  for (const auto& s : bike_stations)
    j["bike_stations"].push_back({{"id", s.id},
                                  {"location", vec_to_json(s.location)},
                                  {"capacity", s.capacity},
                                  {"initial_count", s.initial_count}});
  const auto& h = heightfield;
  j["heightfield"] = {{"origin", vec_to_json(h.origin)},
                      {"cell_size", h.cell_size},
                      {"rows", h.rows},
                      {"cols", h.cols},
                      {"elevations", h.elevations}};
  return j.dump(2);
}

SceneBundle SceneBundle::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene JSON parse: ") + e.what());
  }
  SceneBundle b;
  for (const auto& e : j.value("roads", json::array())) {
    RoadSegment r;
    r.id = e.at("id");
    r.centerline = polyline_from_json(e.at("centerline"));
    r.width = e.value("width", 6.0);
    r.lane_count = e.value("lane_count", 2);
    r.one_way = e.value("one_way", false);
    b.roads.push_back(std::move(r));
  }
  for (const auto& e : j.value("junctions", json::array())) {
    Junction x;
    x.id = e.at("id");
    x.center = vec_from_json(e.at("center"));
    x.radius = e.value("radius", 8.0);
    x.incident_segments = e.value("incident_segments", std::vector<std::string>{});
    b.junctions.push_back(std::move(x));
  }
  for (const auto& e : j.value("buildings", json::array())) {
    Building bd;
    bd.id = e.at("id");
    bd.name = e.value("name", "");
    bd.footprint = polyline_from_json(e.at("footprint"));
    bd.height = e.value("height", 10.0);
    bd.category = e.value("category", "");
    b.buildings.push_back(std::move(bd));
  }
  for (const auto& e : j.value("places", json::array())) {
    Place p;
    p.id = e.at("id");
    p.name = e.value("name", "");
    p.category = place_category_from_string(e.at("category"));
    if (e.contains("building")) p.building_id = e.at("building").get<std::string>();
    p.door = vec_from_json(e.at("door"));
    b.places.push_back(std::move(p));
  }
  for (const auto& e : j.value("bus_lines", json::array())) {
    BusLine l;
    l.id = e.at("id");
    l.stops = e.at("stops").get<std::vector<std::string>>();
    l.offsets_s = e.at("offsets_s").get<std::vector<double>>();
    l.loop_period_s = e.value("loop_period_s", 0.0);
    b.bus_lines.push_back(std::move(l));
  }
  for (const auto& e : j.value("bike_stations", json::array())) {
    BikeStation s;
    s.id = e.at("id");
    s.location = vec_from_json(e.at("location"));
    s.capacity = e.value("capacity", 0);
    s.initial_count = e.value("initial_count", 0);
    b.bike_stations.push_back(std::move(s));
  }
  if (j.contains("heightfield")) {
    const auto& e = j["heightfield"];
    Heightfield h;
    h.origin = vec_from_json(e.at("origin"));
    h.cell_size = e.at("cell_size");
    h.rows = e.at("rows");
    h.cols = e.at("cols");
    h.elevations = e.at("elevations").get<std::vector<double>>();
    b.heightfield = std::move(h);
  }
  b.validate();
  return b;
}

}  // namespace ocs
