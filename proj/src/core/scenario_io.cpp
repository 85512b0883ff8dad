#include "rssfp/scenario_io.hpp"

#include <filesystem>
#include <set>

#include <json.hpp>

#include "rssfp/database_io.hpp"
#include "rssfp/error.hpp"

namespace rssfp {

using nlohmann::json;

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kParse, "scenario field '" + path + "': " + what);
}

void check_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) bad_field(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) bad_field(path + "." + key, "unknown key");
  }
}

double num(const json& v, const std::string& path) {
  if (!v.is_number()) bad_field(path, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad_field(path, "expected an integer");
  return v.get<int>();
}

Point point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) bad_field(path, "expected [x, y]");
  return Point{num(v[0], path + "[0]"), num(v[1], path + "[1]")};
}

Rect rect(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) bad_field(path, "expected [x0, y0, x1, y1]");
  return Rect{num(v[0], path), num(v[1], path), num(v[2], path), num(v[3], path)};
}

template <typename F>
void each(const json& v, const std::string& path, F f) {
  if (!v.is_array()) bad_field(path, "expected an array");
  for (std::size_t i = 0; i < v.size(); ++i) f(v[i], path + "[" + std::to_string(i) + "]");
}

json rect_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

}  // namespace

Scenario preset_by_name(const std::string& name) {
  if (name == "office") return preset_office();
  if (name == "hall") return preset_hall();
  throw Error(ErrorCode::kInvalidInput, "unknown scenario preset '" + name + "'");
}

namespace {

Scenario parse_scenario_impl(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("scenario document: ") + e.what());
  }
  check_keys(doc, "$", {"preset", "name", "floorplan", "beacons", "propagation", "reference_grid",
                        "test_points", "seed", "segmentation", "manual_subareas"});

  Scenario sc;
  if (auto it = doc.find("preset"); it != doc.end()) {
    if (!it->is_string()) bad_field("$.preset", "expected a string");
    sc = preset_by_name(it->get<std::string>());
  }
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) bad_field("$.name", "expected a string");
    sc.name = it->get<std::string>();
  }
  if (auto it = doc.find("floorplan"); it != doc.end()) {
    check_keys(*it, "$.floorplan", {"name", "bounds", "walls"});
    if (auto n = it->find("name"); n != it->end()) sc.floorplan.name = n->get<std::string>();
    if (auto b = it->find("bounds"); b != it->end()) sc.floorplan.bounds = rect(*b, "$.floorplan.bounds");
    if (auto w = it->find("walls"); w != it->end()) {
      sc.floorplan.walls.clear();
      each(*w, "$.floorplan.walls", [&](const json& e, const std::string& p) {
        check_keys(e, p, {"a", "b", "attenuation"});
        sc.floorplan.walls.push_back(Wall{Segment{point(e.at("a"), p + ".a"), point(e.at("b"), p + ".b")},
                                          num(e.at("attenuation"), p + ".attenuation")});
      });
    }
  }
  if (auto it = doc.find("beacons"); it != doc.end()) {
    sc.beacons.clear();
    each(*it, "$.beacons", [&](const json& e, const std::string& p) {
      check_keys(e, p, {"id", "x", "y", "tx_label"});
      if (!e.contains("id") || !e["id"].is_string()) bad_field(p + ".id", "expected a string");
      BeaconNode b;
      b.id = e["id"].get<std::string>();
      b.position = Point{num(e.value("x", json()), p + ".x"), num(e.value("y", json()), p + ".y")};
      if (e.contains("tx_label")) b.tx_label = e["tx_label"].get<std::string>();
      sc.beacons.push_back(std::move(b));
    });
  }
  if (auto it = doc.find("propagation"); it != doc.end()) {
    check_keys(*it, "$.propagation", {"rss_at_d0", "path_loss_exponent", "shadowing_sigma",
                                      "floor_value", "samples_per_reading"});
    auto& p = sc.propagation;
    const std::string base = "$.propagation.";
    if (it->contains("rss_at_d0")) p.rss_at_d0 = num((*it)["rss_at_d0"], base + "rss_at_d0");
    if (it->contains("path_loss_exponent"))
      p.path_loss_exponent = num((*it)["path_loss_exponent"], base + "path_loss_exponent");
    if (it->contains("shadowing_sigma"))
      p.shadowing_sigma = num((*it)["shadowing_sigma"], base + "shadowing_sigma");
    if (it->contains("floor_value")) p.floor_value = num((*it)["floor_value"], base + "floor_value");
    if (it->contains("samples_per_reading"))
      p.samples_per_reading = integer((*it)["samples_per_reading"], base + "samples_per_reading");
  }
  if (auto it = doc.find("reference_grid"); it != doc.end()) {
    check_keys(*it, "$.reference_grid", {"count", "points"});
    if (it->contains("count")) sc.reference_count = integer((*it)["count"], "$.reference_grid.count");
    if (it->contains("points")) {
      sc.reference_points.clear();
      each((*it)["points"], "$.reference_grid.points",
           [&](const json& e, const std::string& p) { sc.reference_points.push_back(point(e, p)); });
    }
  }
  if (auto it = doc.find("test_points"); it != doc.end()) {
    check_keys(*it, "$.test_points", {"count"});
    if (it->contains("count")) sc.test_point_count = integer((*it)["count"], "$.test_points.count");
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) bad_field("$.seed", "expected a non-negative integer");
    sc.seed = it->get<std::uint64_t>();
  }
  if (auto it = doc.find("segmentation"); it != doc.end()) {
    check_keys(*it, "$.segmentation", {"margin", "max_range_width", "min_cell_size",
                                       "max_iterations", "min_points_per_subarea"});
    auto& s = sc.segmentation;
    const std::string base = "$.segmentation.";
    if (it->contains("margin")) s.margin = num((*it)["margin"], base + "margin");
    if (it->contains("max_range_width")) s.max_range_width = num((*it)["max_range_width"], base + "max_range_width");
    if (it->contains("min_cell_size")) s.min_cell_size = num((*it)["min_cell_size"], base + "min_cell_size");
    if (it->contains("max_iterations")) s.max_iterations = integer((*it)["max_iterations"], base + "max_iterations");
    if (it->contains("min_points_per_subarea"))
      s.min_points_per_subarea = integer((*it)["min_points_per_subarea"], base + "min_points_per_subarea");
  }
  if (auto it = doc.find("manual_subareas"); it != doc.end()) {
    sc.manual_subareas.clear();
    each(*it, "$.manual_subareas",
         [&](const json& e, const std::string& p) { sc.manual_subareas.push_back(rect(e, p)); });
  }
  sc.validate();
  return sc;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  try {
    return parse_scenario_impl(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("scenario document: ") + e.what());
  }
}

std::string scenario_to_json(const Scenario& sc) {
  json doc;
  doc["name"] = sc.name;
  json walls = json::array();
  for (const auto& w : sc.floorplan.walls) {
    walls.push_back({{"a", {w.segment.a.x, w.segment.a.y}},
                     {"b", {w.segment.b.x, w.segment.b.y}},
                     {"attenuation", w.attenuation}});
  }
  doc["floorplan"] = {{"name", sc.floorplan.name}, {"bounds", rect_json(sc.floorplan.bounds)},
                      {"walls", std::move(walls)}};
  json beacons = json::array();
  for (const auto& b : sc.beacons) {
    beacons.push_back({{"id", b.id}, {"x", b.position.x}, {"y", b.position.y}, {"tx_label", b.tx_label}});
  }
  doc["beacons"] = std::move(beacons);
  const auto& p = sc.propagation;
  doc["propagation"] = {{"rss_at_d0", p.rss_at_d0},
                        {"path_loss_exponent", p.path_loss_exponent},
                        {"shadowing_sigma", p.shadowing_sigma},
                        {"floor_value", p.floor_value},
                        {"samples_per_reading", p.samples_per_reading}};
  json grid = {{"count", sc.reference_count}};
  if (!sc.reference_points.empty()) {
    json pts = json::array();
    for (const auto& r : sc.reference_points) pts.push_back({r.x, r.y});
    grid["points"] = std::move(pts);
  }
  doc["reference_grid"] = std::move(grid);
  doc["test_points"] = {{"count", sc.test_point_count}};
  doc["seed"] = sc.seed;
  const auto& s = sc.segmentation;
  doc["segmentation"] = {{"margin", s.margin},
                         {"max_range_width", s.max_range_width},
                         {"min_cell_size", s.min_cell_size},
                         {"max_iterations", s.max_iterations},
                         {"min_points_per_subarea", s.min_points_per_subarea}};
  json manual = json::array();
  for (const auto& r : sc.manual_subareas) manual.push_back(rect_json(r));
  doc["manual_subareas"] = std::move(manual);
  return doc.dump(2) + "\n";
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (name_or_path == "office" || name_or_path == "hall") return preset_by_name(name_or_path);
  if (!std::filesystem::exists(name_or_path)) {
    throw Error(ErrorCode::kInvalidInput,
                "scenario '" + name_or_path + "' is neither a preset nor an existing file");
  }
  return parse_scenario(read_text_file(name_or_path));
}

}  // namespace rssfp
