#include "ocs/geodata.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "ocs/roadgraph.hpp"

namespace ocs::geodata {

namespace pt = boost::property_tree;

// ---------------------------------------------------------------- OSM parsing

RawGeo parse_osm(const std::string& document) {
  pt::ptree tree;
  std::istringstream in(document);
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("XML parse error at line " + std::to_string(e.line()) + ": " +
                     e.message());
  }
  RawGeo geo;
  auto osm = tree.get_child_optional("osm");
  if (!osm) throw ParseError("missing <osm> root element");

  auto read_tags = [](const pt::ptree& elem) {
    TagMap tags;
    for (const auto& [name, child] : elem) {
      if (name == "tag")
        tags[child.get<std::string>("<xmlattr>.k")] = child.get<std::string>("<xmlattr>.v");
    }
    return tags;
  };

  for (const auto& [name, elem] : *osm) {
    if (name == "node") {
      int64_t id = elem.get<int64_t>("<xmlattr>.id");
      OsmNode n;
      n.lat = elem.get<double>("<xmlattr>.lat");
      n.lon = elem.get<double>("<xmlattr>.lon");
      if (!std::isfinite(n.lat) || !std::isfinite(n.lon))
        throw ValidationError("node " + std::to_string(id) + ": non-finite coordinate");
      n.tags = read_tags(elem);
      if (!geo.nodes.emplace(id, std::move(n)).second)
        throw ValidationError("duplicate node id " + std::to_string(id));
    } else if (name == "way") {
      int64_t id = elem.get<int64_t>("<xmlattr>.id");
      OsmWay w;
      for (const auto& [cn, child] : elem) {
        if (cn == "nd") w.node_refs.push_back(child.get<int64_t>("<xmlattr>.ref"));
      }
      w.tags = read_tags(elem);
      if (!geo.ways.emplace(id, std::move(w)).second)
        throw ValidationError("duplicate way id " + std::to_string(id));
    } else if (name == "relation") {
      int64_t id = elem.get<int64_t>("<xmlattr>.id");
      OsmRelation r;
      for (const auto& [cn, child] : elem) {
        if (cn == "member") {
          OsmMember m;
          m.type = child.get<std::string>("<xmlattr>.type");
          m.ref = child.get<int64_t>("<xmlattr>.ref");
          m.role = child.get<std::string>("<xmlattr>.role", "");
          r.members.push_back(std::move(m));
        }
      }
      r.tags = read_tags(elem);
      if (!geo.relations.emplace(id, std::move(r)).second)
        throw ValidationError("duplicate relation id " + std::to_string(id));
    }
  }

  for (const auto& [wid, way] : geo.ways) {
    for (int64_t ref : way.node_refs) {
      if (!geo.nodes.count(ref))
        throw ValidationError("way w" + std::to_string(wid) + ": unknown node " +
                              std::to_string(ref));
    }
  }
  return geo;
}

std::string serialize_osm(const RawGeo& geo) {
  std::ostringstream out;
  out.precision(12);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n";
  auto escape = [](const std::string& s) {
    std::string r;
    for (char c : s) {
      switch (c) {
        case '&': r += "&amp;"; break;
        case '<': r += "&lt;"; break;
        case '>': r += "&gt;"; break;
        case '"': r += "&quot;"; break;
        default: r += c;
      }
    }
    return r;
  };
  auto emit_tags = [&](const TagMap& tags, const char* indent) {
    for (const auto& [k, v] : tags)
      out << indent << "<tag k=\"" << escape(k) << "\" v=\"" << escape(v) << "\"/>\n";
  };
  for (const auto& [id, n] : geo.nodes) {
    out << "  <node id=\"" << id << "\" lat=\"" << n.lat << "\" lon=\"" << n.lon << "\"";
    if (n.tags.empty()) {
      out << "/>\n";
    } else {
      out << ">\n";
      emit_tags(n.tags, "    ");
      out << "  </node>\n";
    }
  }
  for (const auto& [id, w] : geo.ways) {
    out << "  <way id=\"" << id << "\">\n";
    for (int64_t ref : w.node_refs) out << "    <nd ref=\"" << ref << "\"/>\n";
    emit_tags(w.tags, "    ");
    out << "  </way>\n";
  }
  for (const auto& [id, r] : geo.relations) {
    out << "  <relation id=\"" << id << "\">\n";
    for (const auto& m : r.members)
      out << "    <member type=\"" << m.type << "\" ref=\"" << m.ref << "\" role=\""
          << escape(m.role) << "\"/>\n";
    emit_tags(r.tags, "    ");
    out << "  </relation>\n";
  }
  out << "</osm>\n";
  return out.str();
}

std::map<int64_t, Vec2> project_enu(const RawGeo& geo) {
  std::map<int64_t, Vec2> out;
  if (geo.nodes.empty()) return out;
  double lat0 = 0.0, lon0 = 0.0;
  for (const auto& [id, n] : geo.nodes) {
    lat0 += n.lat;
    lon0 += n.lon;
  }
  lat0 /= static_cast<double>(geo.nodes.size());
  lon0 /= static_cast<double>(geo.nodes.size());
  constexpr double kEarthRadius = 6371000.0;
  constexpr double kDeg = M_PI / 180.0;
  double coslat = std::cos(lat0 * kDeg);
  for (const auto& [id, n] : geo.nodes) {
    out[id] = {kEarthRadius * coslat * (n.lon - lon0) * kDeg,
               kEarthRadius * (n.lat - lat0) * kDeg};
  }
  return out;
}

// ------------------------------------------------------------- road building

static bool is_road(const OsmWay& w) { return w.tags.count("highway") > 0; }

static double road_width(const OsmWay& w) {
  auto it = w.tags.find("width");
  if (it != w.tags.end()) {
    try {
      return std::stod(it->second);
    } catch (...) {
    }
  }
  return 6.0;
}

static int road_lanes(const OsmWay& w) {
  auto it = w.tags.find("lanes");
  if (it != w.tags.end()) {
    try {
      return std::max(1, std::stoi(it->second));
    } catch (...) {
    }
  }
  return 2;
}

RoadGraphResult build_road_graph(const RawGeo& geo) {
  RoadGraphResult result;
  auto enu = project_enu(geo);

  // nodes shared by >= 2 road ways split ways into segments
  std::map<int64_t, int> usage;
  for (const auto& [wid, way] : geo.ways) {
    if (!is_road(way)) continue;
    std::set<int64_t> seen;
    for (int64_t ref : way.node_refs)
      if (seen.insert(ref).second) usage[ref]++;
  }

  std::map<int64_t, std::vector<std::string>> incident;   // node -> segment ids
  for (const auto& [wid, way] : geo.ways) {
    if (!is_road(way) || way.node_refs.size() < 2) continue;
    std::vector<std::vector<int64_t>> pieces;
    std::vector<int64_t> cur = {way.node_refs.front()};
    for (size_t i = 1; i < way.node_refs.size(); ++i) {
      int64_t ref = way.node_refs[i];
      cur.push_back(ref);
      bool interior = i + 1 < way.node_refs.size();
      if (interior && usage[ref] >= 2) {
        pieces.push_back(cur);
        cur = {ref};
      }
    }
    pieces.push_back(cur);

    int part = 0;
    for (const auto& piece : pieces) {
      RoadSegment seg;
      seg.id = "r" + std::to_string(wid) +
               (pieces.size() > 1 ? "." + std::to_string(part) : "");
      for (int64_t ref : piece) seg.centerline.push_back(enu.at(ref));
      seg.width = road_width(way);
      seg.lane_count = road_lanes(way);
      auto ow = way.tags.find("oneway");
      seg.one_way = ow != way.tags.end() && ow->second == "yes";
      if (seg.length() < 1e-9) {
        result.warnings.push_back("dropped zero-length segment from way " +
                                  std::to_string(wid));
      } else {
        incident[piece.front()].push_back(seg.id);
        incident[piece.back()].push_back(seg.id);
        result.roads.push_back(std::move(seg));
      }
      ++part;
    }
  }

  for (const auto& [nid, segs] : incident) {
    if (segs.size() >= 2) {
      Junction j;
      j.id = "j" + std::to_string(nid);
      j.center = enu.at(nid);
      j.incident_segments = segs;
      std::sort(j.incident_segments.begin(), j.incident_segments.end());
      result.junctions.push_back(std::move(j));
    }
  }
  return result;
}

std::vector<Building> build_buildings(const RawGeo& geo) {
  std::vector<Building> out;
  auto enu = project_enu(geo);
  for (const auto& [wid, way] : geo.ways) {
    if (!way.tags.count("building")) continue;
    if (way.node_refs.size() < 4) continue;   // need a closed ring
    Building b;
    b.id = "b" + std::to_string(wid);
    auto it = way.tags.find("name");
    b.name = it != way.tags.end() ? it->second : b.id;
    auto refs = way.node_refs;
    if (refs.front() == refs.back()) refs.pop_back();
    for (int64_t ref : refs) b.footprint.push_back(enu.at(ref));
    auto h = way.tags.find("height");
    if (h != way.tags.end()) {
      try {
        b.height = std::stod(h->second);
      } catch (...) {
      }
    }
    auto c = way.tags.find("building");
    b.category = c->second == "yes" ? "" : c->second;
    out.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------- places

static std::optional<PlaceCategory> categorize(const TagMap& tags) {
  auto has = [&](const char* k) { return tags.find(k) != tags.end(); };
  auto val = [&](const char* k) {
    auto it = tags.find(k);
    return it != tags.end() ? it->second : std::string();
  };
  std::string amenity = val("amenity");
  if (amenity == "restaurant" || amenity == "cafe" || amenity == "fast_food" ||
      amenity == "bar" || amenity == "pub" || amenity == "food_court")
    return PlaceCategory::food;
  std::string leisure = val("leisure");
  if (amenity == "cinema" || amenity == "theatre" || amenity == "nightclub" ||
      amenity == "arts_centre" || leisure == "sports_centre" ||
      leisure == "fitness_centre" || leisure == "bowling_alley" ||
      leisure == "amusement_arcade")
    return PlaceCategory::entertainment;
  std::string tourism = val("tourism");
  if (tourism == "hotel" || tourism == "hostel" || tourism == "guest_house" ||
      tourism == "motel" || tourism == "apartment")
    return PlaceCategory::accommodation;
  if (has("office")) return PlaceCategory::office;
  if (has("shop")) return PlaceCategory::stores;
  return std::nullopt;
}

static bool is_open_space(const TagMap& tags) {
  auto it = tags.find("leisure");
  if (it != tags.end() &&
      (it->second == "park" || it->second == "garden" || it->second == "playground"))
    return true;
  auto lu = tags.find("landuse");
  return lu != tags.end() && (lu->second == "grass" || lu->second == "meadow");
}

static Vec2 polygon_centroid(const Polygon& poly) {
  Vec2 c;
  for (const auto& p : poly) c = c + p;
  return c * (1.0 / static_cast<double>(poly.size()));
}

static Vec2 nearest_road_point(const Vec2& p, const std::vector<RoadSegment>& roads) {
  Vec2 best = p;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& r : roads) {
    for (size_t i = 1; i < r.centerline.size(); ++i) {
      Vec2 q = project_to_segment(p, r.centerline[i - 1], r.centerline[i]);
      double d = distance(p, q);
      if (d < best_d) {
        best_d = d;
        best = q;
      }
    }
  }
  return best;
}

// door = footprint boundary point closest to the nearest road
static Vec2 door_point(const Building& b, const std::vector<RoadSegment>& roads) {
  Vec2 anchor = nearest_road_point(polygon_centroid(b.footprint), roads);
  Vec2 best = b.footprint.front();
  double best_d = std::numeric_limits<double>::infinity();
  const size_t n = b.footprint.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 q = project_to_segment(anchor, b.footprint[i], b.footprint[(i + 1) % n]);
    double d = distance(anchor, q);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

PlaceResult annotate_places(const RawGeo& geo, const std::vector<Building>& buildings,
                            const std::vector<RoadSegment>& roads) {
  PlaceResult result;
  auto enu = project_enu(geo);

  auto add_point_place = [&](int64_t id, const TagMap& tags, const Vec2& pos) {
    auto cat = categorize(tags);
    if (!cat) {
      if (is_open_space(tags)) cat = PlaceCategory::open;
      else return;
    }
    Place p;
    p.id = "p" + std::to_string(id);
    auto nm = tags.find("name");
    p.name = nm != tags.end() ? nm->second : p.id;
    p.category = *cat;

    const Building* host = nullptr;
    for (const auto& b : buildings) {
      if (point_in_polygon(pos, b.footprint)) {
        host = &b;
        break;
      }
    }
    if (!host && *cat != PlaceCategory::open) {
      double best_d = kPlaceMatchRadius;
      for (const auto& b : buildings) {
        const size_t n = b.footprint.size();
        for (size_t i = 0; i < n; ++i) {
          double d =
              point_segment_distance(pos, b.footprint[i], b.footprint[(i + 1) % n]);
          if (d < best_d) {
            best_d = d;
            host = &b;
          }
        }
      }
      if (!host) {
        result.dropped++;
        return;
      }
    }
    if (host) {
      p.building_id = host->id;
      p.door = door_point(*host, roads);
    } else {
      p.door = pos;
    }
    result.places.push_back(std::move(p));
  };

  for (const auto& [id, n] : geo.nodes) {
    if (n.tags.empty()) continue;
    add_point_place(id, n.tags, enu.at(id));
  }
  // area amenities (parks etc.) keyed by way centroid
  for (const auto& [id, w] : geo.ways) {
    if (w.tags.count("building") || w.tags.count("highway")) continue;
    if (w.tags.empty() || w.node_refs.empty()) continue;
    if (!categorize(w.tags) && !is_open_space(w.tags)) continue;
    Polygon poly;
    auto refs = w.node_refs;
    if (refs.size() > 1 && refs.front() == refs.back()) refs.pop_back();
    for (int64_t ref : refs) poly.push_back(enu.at(ref));
    add_point_place(id, w.tags, polygon_centroid(poly));
  }
  return result;
}

// ------------------------------------------------------------- heightfield

std::vector<ElevationSample> read_elevation_csv(const std::string& text) {
  std::vector<ElevationSample> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    ElevationSample s;
    if (!(ls >> s.x >> s.y >> s.z)) {
      if (lineno == 1) continue;   // header row
      throw ParseError("elevation CSV line " + std::to_string(lineno) + ": bad row");
    }
    out.push_back(s);
  }
  return out;
}

static std::vector<ElevationSample> filter_outliers(std::vector<ElevationSample> samples) {
  if (samples.size() <= 2) return samples;
  std::vector<ElevationSample> kept;
  for (size_t i = 0; i < samples.size(); ++i) {
    std::vector<std::pair<double, double>> others;   // (distance, z)
    for (size_t j = 0; j < samples.size(); ++j) {
      if (j == i) continue;
      double d = std::hypot(samples[j].x - samples[i].x, samples[j].y - samples[i].y);
      others.push_back({d, samples[j].z});
    }
    size_t k = std::min<size_t>(8, others.size());
    std::partial_sort(others.begin(), others.begin() + k, others.end());
    std::vector<double> zs;
    for (size_t j = 0; j < k; ++j) zs.push_back(others[j].second);
    std::sort(zs.begin(), zs.end());
    double median = zs.size() % 2 ? zs[zs.size() / 2]
                                  : 0.5 * (zs[zs.size() / 2 - 1] + zs[zs.size() / 2]);
    if (std::abs(samples[i].z - median) <= kOutlierThreshold) kept.push_back(samples[i]);
  }
  return kept;
}

Heightfield build_heightfield(std::vector<ElevationSample> samples, double cell_size) {
  if (cell_size <= 0.0) throw ValidationError("heightfield cell_size must be > 0");
  if (samples.size() < 4) throw ValidationError("heightfield needs >= 4 samples");
  for (const auto& s : samples)
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z))
      throw ValidationError("non-finite elevation sample");

  samples = filter_outliers(std::move(samples));
  if (samples.size() < 4) throw ValidationError("too few samples after outlier filter");

  double minx = samples[0].x, maxx = minx, miny = samples[0].y, maxy = miny;
  for (const auto& s : samples) {
    minx = std::min(minx, s.x);
    maxx = std::max(maxx, s.x);
    miny = std::min(miny, s.y);
    maxy = std::max(maxy, s.y);
  }
  if (maxx - minx < 1e-9 || maxy - miny < 1e-9)
    throw ValidationError("degenerate sample bounding box");

  Heightfield h;
  h.origin = {minx, miny};
  h.cell_size = cell_size;
  h.cols = std::max(2, static_cast<int>(std::ceil((maxx - minx) / cell_size)) + 1);
  h.rows = std::max(2, static_cast<int>(std::ceil((maxy - miny) / cell_size)) + 1);
  h.elevations.assign(static_cast<size_t>(h.rows) * h.cols,
                      std::numeric_limits<double>::quiet_NaN());

  const double radius = 1.5 * cell_size;
  for (int r = 0; r < h.rows; ++r) {
    for (int c = 0; c < h.cols; ++c) {
      Vec2 node{minx + c * cell_size, miny + r * cell_size};
      double wsum = 0.0, zsum = 0.0;
      bool exact = false;
      for (const auto& s : samples) {
        double d = std::hypot(s.x - node.x, s.y - node.y);
        if (d < 1e-9) {
          h.at(r, c) = s.z;
          exact = true;
          break;
        }
        if (d <= radius) {
          double w = 1.0 / (d * d);
          wsum += w;
          zsum += w * s.z;
        }
      }
      if (!exact && wsum > 0.0) h.at(r, c) = zsum / wsum;
    }
  }

  // fill empty nodes from nearest filled node
  std::vector<std::tuple<int, int, double>> filled;
  for (int r = 0; r < h.rows; ++r)
    for (int c = 0; c < h.cols; ++c)
      if (!std::isnan(h.at(r, c))) filled.push_back({r, c, h.at(r, c)});
  if (filled.empty()) throw ValidationError("no heightfield node received a sample");
  for (int r = 0; r < h.rows; ++r) {
    for (int c = 0; c < h.cols; ++c) {
      if (!std::isnan(h.at(r, c))) continue;
      double best_d = std::numeric_limits<double>::infinity();
      double best_z = 0.0;
      for (const auto& [fr, fc, fz] : filled) {
        double d = std::hypot(static_cast<double>(fr - r), static_cast<double>(fc - c));
        if (d < best_d) {
          best_d = d;
          best_z = fz;
        }
      }
      h.at(r, c) = best_z;
    }
  }
  return h;
}

// ------------------------------------------------------------------ transit

TransitResult annotate_transit(const std::vector<Place>& places,
                               const std::vector<RoadSegment>& roads,
                               const TransitParams& params, uint64_t seed) {
  if (params.n_stops < 2) throw ValidationError("n_stops must be >= 2");
  if (static_cast<size_t>(params.n_stops) > places.size())
    throw ValidationError("not enough places for requested stops");

  std::mt19937_64 rng(seed);
  std::vector<size_t> order(places.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<size_t>(params.n_stops));

  // nearest-neighbor loop tour starting from the lowest-id stop
  std::vector<size_t> remaining = order;
  std::sort(remaining.begin(), remaining.end(),
            [&](size_t a, size_t b) { return places[a].id < places[b].id; });
  std::vector<size_t> tour = {remaining.front()};
  remaining.erase(remaining.begin());
  while (!remaining.empty()) {
    const Vec2& cur = places[tour.back()].door;
    auto best = remaining.begin();
    double best_d = std::numeric_limits<double>::infinity();
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      double d = distance(cur, places[*it].door);
      if (d < best_d) {
        best_d = d;
        best = it;
      }
    }
    tour.push_back(*best);
    remaining.erase(best);
  }

  RoadGraph graph(roads);
  BusLine line;
  line.id = "bus0";
  for (size_t idx : tour) line.stops.push_back(places[idx].id);
  for (size_t i = 0; i < tour.size(); ++i) {
    const Vec2& a = places[tour[i]].door;
    const Vec2& b = places[tour[(i + 1) % tour.size()]].door;
    auto len = graph.path_length(a, b, 200.0);
    if (!len)
      throw ValidationError("bus stops unreachable on road graph: " +
                            places[tour[i]].id + " -> " +
                            places[tour[(i + 1) % tour.size()]].id);
    line.offsets_s.push_back(*len / params.bus_speed);
  }
  for (double o : line.offsets_s) line.loop_period_s += o;

  TransitResult result;
  result.bus_lines.push_back(std::move(line));

  // greedy max-min-distance spread over road graph vertices
  if (params.n_stations > 0 && graph.vertex_count() > 0) {
    std::vector<int> chosen;
    Vec2 centroid;
    for (int i = 0; i < graph.vertex_count(); ++i) centroid = centroid + graph.vertex(i);
    centroid = centroid * (1.0 / graph.vertex_count());
    int first = 0;
    double best_d = -1.0;
    for (int i = 0; i < graph.vertex_count(); ++i) {
      double d = distance(graph.vertex(i), centroid);
      if (d > best_d) {
        best_d = d;
        first = i;
      }
    }
    chosen.push_back(first);
    while (static_cast<int>(chosen.size()) < params.n_stations &&
           static_cast<int>(chosen.size()) < graph.vertex_count()) {
      int best = -1;
      double best_min = -1.0;
      for (int i = 0; i < graph.vertex_count(); ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
        double mind = std::numeric_limits<double>::infinity();
        for (int c : chosen) mind = std::min(mind, distance(graph.vertex(i), graph.vertex(c)));
        if (mind > best_min) {
          best_min = mind;
          best = i;
        }
      }
      if (best < 0) break;
      chosen.push_back(best);
    }
    int idx = 0;
    for (int v : chosen) {
      BikeStation s;
      s.id = "bike" + std::to_string(idx++);
      s.location = graph.vertex(v);
      s.capacity = params.station_capacity;
      s.initial_count = params.station_initial;
      result.bike_stations.push_back(std::move(s));
    }
  }
  return result;
}

// --------------------------------------------------------------- synthesis

namespace {
double next_unit(std::mt19937_64& rng) {
  return std::ldexp(static_cast<double>(rng() >> 11), -53);
}
double next_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * next_unit(rng);
}
int next_int(std::mt19937_64& rng, int n) {
  return static_cast<int>(rng() % static_cast<uint64_t>(n));
}
}  // namespace

SceneBundle synth_scene(uint64_t seed, const SynthParams& params) {
  if (params.extent < 100.0 || params.extent > 10000.0)
    throw ValidationError("extent out of range [100, 10000]");
  if (params.buildings < 1 || params.places < 1)
    throw ValidationError("buildings/places must be >= 1");
  if (params.h_streets < 2 || params.v_streets < 2)
    throw ValidationError("need at least 2 streets each way");

  std::mt19937_64 rng(seed);
  SceneBundle scene;
  const double E = params.extent;

  // jittered street grid; shared crossing nodes become junctions
  std::vector<double> ys(params.h_streets), xs(params.v_streets);
  for (int i = 0; i < params.h_streets; ++i)
    ys[i] = E * (i + 0.5) / params.h_streets + next_range(rng, -5.0, 5.0);
  for (int i = 0; i < params.v_streets; ++i)
    xs[i] = E * (i + 0.5) / params.v_streets + next_range(rng, -5.0, 5.0);

  std::map<std::string, std::vector<std::string>> incident;
  auto node_key = [](const Vec2& p) {
    return std::to_string(std::llround(p.x * 100)) + ":" +
           std::to_string(std::llround(p.y * 100));
  };
  int seg_id = 0;
  auto add_segment = [&](Vec2 a, Vec2 b) {
    RoadSegment s;
    s.id = "r" + std::to_string(seg_id++);
    s.centerline = {a, b};
    incident[node_key(a)].push_back(s.id);
    incident[node_key(b)].push_back(s.id);
    scene.roads.push_back(std::move(s));
  };
  for (double y : ys) {
    std::vector<double> cuts = {0.0};
    for (double x : xs) cuts.push_back(x);
    cuts.push_back(E);
    for (size_t i = 1; i < cuts.size(); ++i)
      add_segment({cuts[i - 1], y}, {cuts[i], y});
  }
  for (double x : xs) {
    std::vector<double> cuts = {0.0};
    for (double y : ys) cuts.push_back(y);
    cuts.push_back(E);
    for (size_t i = 1; i < cuts.size(); ++i)
      add_segment({x, cuts[i - 1]}, {x, cuts[i]});
  }
  std::map<std::string, Vec2> node_pos;
  for (const auto& r : scene.roads) {
    node_pos[node_key(r.centerline.front())] = r.centerline.front();
    node_pos[node_key(r.centerline.back())] = r.centerline.back();
  }
  int jid = 0;
  for (const auto& [key, segs] : incident) {
    if (segs.size() >= 2) {
      Junction j;
      j.id = "j" + std::to_string(jid++);
      j.center = node_pos[key];
      j.incident_segments = segs;
      std::sort(j.incident_segments.begin(), j.incident_segments.end());
      scene.junctions.push_back(std::move(j));
    }
  }

  // rectangular buildings inside blocks, clear of streets
  for (int i = 0; i < params.buildings; ++i) {
    int bi = next_int(rng, params.h_streets - 1);
    int bj = next_int(rng, params.v_streets - 1);
    double y0 = ys[bi] + 8.0, y1 = ys[bi + 1] - 8.0;
    double x0 = xs[bj] + 8.0, x1 = xs[bj + 1] - 8.0;
    double w = next_range(rng, 10.0, std::max(11.0, (x1 - x0) * 0.45));
    double h = next_range(rng, 10.0, std::max(11.0, (y1 - y0) * 0.45));
    double cx = next_range(rng, x0 + w / 2, std::max(x0 + w / 2 + 1.0, x1 - w / 2));
    double cy = next_range(rng, y0 + h / 2, std::max(y0 + h / 2 + 1.0, y1 - h / 2));
    Building b;
    b.id = "b" + std::to_string(i);
    b.name = "Building " + std::to_string(i);
    b.footprint = {{cx - w / 2, cy - h / 2},
                   {cx + w / 2, cy - h / 2},
                   {cx + w / 2, cy + h / 2},
                   {cx - w / 2, cy + h / 2}};
    b.height = next_range(rng, 6.0, 30.0);
    scene.buildings.push_back(std::move(b));
  }

  // category mix loosely follows observed per-scene tallies
  const std::vector<std::pair<PlaceCategory, int>> mix = {
      {PlaceCategory::food, 25},          {PlaceCategory::stores, 21},
      {PlaceCategory::accommodation, 16}, {PlaceCategory::office, 8},
      {PlaceCategory::entertainment, 5},  {PlaceCategory::open, 10}};
  int total_mix = 0;
  for (const auto& [c, n] : mix) total_mix += n;
  int pid = 0;
  for (int i = 0; i < params.places; ++i) {
    int pick = next_int(rng, total_mix);
    PlaceCategory cat = PlaceCategory::open;
    for (const auto& [c, n] : mix) {
      if (pick < n) {
        cat = c;
        break;
      }
      pick -= n;
    }
    Place p;
    p.id = "p" + std::to_string(pid++);
    p.name = to_string(cat) + " " + std::to_string(i);
    p.category = cat;
    if (cat == PlaceCategory::open) {
      p.door = {next_range(rng, 0.0, E), next_range(rng, 0.0, E)};
      // keep open places off footprints
      for (int tries = 0; tries < 100; ++tries) {
        bool clear = true;
        for (const auto& b : scene.buildings)
          if (point_in_polygon(p.door, b.footprint)) {
            clear = false;
            break;
          }
        if (clear) break;
        p.door = {next_range(rng, 0.0, E), next_range(rng, 0.0, E)};
      }
    } else {
      const Building& host = scene.buildings[next_int(rng, static_cast<int>(scene.buildings.size()))];
      p.building_id = host.id;
      p.door = door_point(host, scene.roads);
    }
    scene.places.push_back(std::move(p));
  }

  TransitParams tp;
  tp.n_stops = std::min(params.n_stops, static_cast<int>(scene.places.size()));
  tp.n_stations = params.n_stations;
  auto transit = annotate_transit(scene.places, scene.roads, tp, rng());
  scene.bus_lines = std::move(transit.bus_lines);
  scene.bike_stations = std::move(transit.bike_stations);

  // gentle rolling terrain
  Heightfield h;
  h.origin = {0.0, 0.0};
  h.cell_size = params.heightfield_cell;
  h.cols = static_cast<int>(E / params.heightfield_cell) + 1;
  h.rows = h.cols;
  double phase1 = next_range(rng, 0.0, 2 * M_PI);
  double phase2 = next_range(rng, 0.0, 2 * M_PI);
  h.elevations.resize(static_cast<size_t>(h.rows) * h.cols);
  for (int r = 0; r < h.rows; ++r)
    for (int c = 0; c < h.cols; ++c)
      h.at(r, c) = 2.0 * std::sin(c * 0.25 + phase1) + 1.5 * std::cos(r * 0.2 + phase2);
  scene.heightfield = std::move(h);

  scene.validate();
  return scene;
}

SceneBundle ingest(const std::string& osm_xml, const std::string& elevation_csv,
                   const TransitParams& transit, uint64_t seed) {
  RawGeo geo = parse_osm(osm_xml);
  auto rg = build_road_graph(geo);
  SceneBundle scene;
  scene.roads = std::move(rg.roads);
  scene.junctions = std::move(rg.junctions);
  scene.buildings = build_buildings(geo);
  scene.places = annotate_places(geo, scene.buildings, scene.roads).places;
  if (!elevation_csv.empty()) {
    auto samples = read_elevation_csv(elevation_csv);
    scene.heightfield = build_heightfield(std::move(samples), 10.0);
  }
  if (static_cast<int>(scene.places.size()) >= transit.n_stops && transit.n_stops >= 2) {
    try {
      auto t = annotate_transit(scene.places, scene.roads, transit, seed);
      scene.bus_lines = std::move(t.bus_lines);
      scene.bike_stations = std::move(t.bike_stations);
    } catch (const ValidationError&) {
      // scene without transit is still valid
    }
  }
  scene.validate();
  return scene;
}

}  // namespace ocs::geodata
