#include "rssfp/database_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rssfp/error.hpp"

namespace rssfp {

using nlohmann::json;

namespace {

json point_pair(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

// Byte offset -> 1-based line number for parse diagnostics.
std::size_t line_of(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kParse, "field '" + path + "': " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(path + "." + key, "missing");
  return *it;
}

double get_number(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) field_error(path + "." + key, "expected a number");
  return v.get<double>();
}

std::string get_string(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) field_error(path + "." + key, "expected a string");
  return v.get<std::string>();
}

Rect get_rect(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) field_error(path, "expected [x0, y0, x1, y1]");
  for (const auto& e : v) {
    if (!e.is_number()) field_error(path, "rectangle entries must be numbers");
  }
  return Rect{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
}

const json& get_array(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_array()) field_error(path + "." + key, "expected an array");
  return v;
}

}  // namespace

std::string save_database(const FingerprintDatabase& db) {
  json doc;
  doc["version"] = kDatabaseFormatVersion;
  doc["meta"] = {{"scenario", db.meta().scenario}, {"created", db.meta().created}};
  doc["bounds"] = db.bounds() ? point_pair(*db.bounds()) : json(nullptr);

  json beacons = json::array();
  for (const auto& b : db.beacons()) {
    beacons.push_back({{"id", b.id}, {"x", b.position.x}, {"y", b.position.y}, {"tx_label", b.tx_label}});
  }
  doc["beacons"] = std::move(beacons);

  json points = json::array();
  for (const auto& p : db.reference_points()) {
    json readings = json::array();
    for (const auto& [id, value] : p.vector.readings()) {
      readings.push_back({{"beacon", id}, {"rss", value}});
    }
    points.push_back({{"id", p.id},
                      {"x", p.position.x},
                      {"y", p.position.y},
                      {"readings", std::move(readings)},
                      {"subarea", p.subarea ? json(*p.subarea) : json(nullptr)}});
  }
  doc["reference_points"] = std::move(points);

  json subareas = json::array();
  for (const auto& s : db.subareas()) {
    json feature = json::array();
    for (const auto& [id, range] : s.feature.ranges) {
      feature.push_back({{"beacon", id}, {"lo", range.lo}, {"hi", range.hi}});
    }
    subareas.push_back({{"id", s.id}, {"rect", point_pair(s.region)}, {"feature", std::move(feature)}});
  }
  doc["subareas"] = std::move(subareas);

  // One array element per line keeps per-row diffs readable.
  return doc.dump(1) + "\n";
}

FingerprintDatabase load_database(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line_of(text, e.byte)) + ": " +
                                       std::string(e.what()));
  }
  if (!doc.is_object()) field_error("$", "expected an object");
  const json& version = require(doc, "version", "$");
  if (!version.is_number_integer()) field_error("$.version", "expected an integer");
  if (version.get<int>() != kDatabaseFormatVersion) {
    throw Error(ErrorCode::kVersion, "unsupported database format version " +
                                         std::to_string(version.get<int>()) + " (expected " +
                                         std::to_string(kDatabaseFormatVersion) + ")");
  }

  DatabaseMeta meta;
  if (auto it = doc.find("meta"); it != doc.end() && !it->is_null()) {
    meta.scenario = get_string(*it, "scenario", "$.meta");
    meta.created = get_string(*it, "created", "$.meta");
  }

  std::optional<Rect> bounds;
  if (auto it = doc.find("bounds"); it != doc.end() && !it->is_null()) {
    bounds = get_rect(*it, "$.bounds");
  }

  std::vector<BeaconNode> beacons;
  const json& jb = get_array(doc, "beacons", "$");
  for (std::size_t i = 0; i < jb.size(); ++i) {
    const std::string path = "$.beacons[" + std::to_string(i) + "]";
    BeaconNode b;
    b.id = get_string(jb[i], "id", path);
    b.position = {get_number(jb[i], "x", path), get_number(jb[i], "y", path)};
    if (auto it = jb[i].find("tx_label"); it != jb[i].end()) {
      b.tx_label = get_string(jb[i], "tx_label", path);
    }
    beacons.push_back(std::move(b));
  }

  std::vector<ReferencePoint> points;
  const json& jp = get_array(doc, "reference_points", "$");
  for (std::size_t i = 0; i < jp.size(); ++i) {
    const std::string path = "$.reference_points[" + std::to_string(i) + "]";
    ReferencePoint p;
    p.id = get_string(jp[i], "id", path);
    p.position = {get_number(jp[i], "x", path), get_number(jp[i], "y", path)};
    const json& readings = get_array(jp[i], "readings", path);
    RssVector::Map map;
    for (std::size_t k = 0; k < readings.size(); ++k) {
      const std::string rpath = path + ".readings[" + std::to_string(k) + "]";
      const std::string beacon = get_string(readings[k], "beacon", rpath);
      if (!map.emplace(beacon, get_number(readings[k], "rss", rpath)).second) {
        field_error(rpath, "duplicate beacon '" + beacon + "'");
      }
    }
    try {
      p.vector = RssVector(std::move(map));
    } catch (const Error& e) {
      field_error(path + ".readings", e.what());
    }
    if (auto it = jp[i].find("subarea"); it != jp[i].end() && !it->is_null()) {
      p.subarea = get_string(jp[i], "subarea", path);
    }
    points.push_back(std::move(p));
  }

  std::vector<Subarea> subareas;
  const json& js = get_array(doc, "subareas", "$");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string path = "$.subareas[" + std::to_string(i) + "]";
    Subarea s;
    s.id = get_string(js[i], "id", path);
    s.region = get_rect(require(js[i], "rect", path), path + ".rect");
    const json& feature = get_array(js[i], "feature", path);
    for (std::size_t k = 0; k < feature.size(); ++k) {
      const std::string fpath = path + ".feature[" + std::to_string(k) + "]";
      const std::string beacon = get_string(feature[k], "beacon", fpath);
      Interval range{get_number(feature[k], "lo", fpath), get_number(feature[k], "hi", fpath)};
      if (!s.feature.ranges.emplace(beacon, range).second) {
        field_error(fpath, "duplicate beacon '" + beacon + "'");
      }
    }
    subareas.push_back(std::move(s));
  }

  try {
    return FingerprintDatabase::from_parts(std::move(meta), bounds, std::move(beacons),
                                           std::move(points), std::move(subareas));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, std::string("inconsistent database: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

void save_database_file(const FingerprintDatabase& db, const std::string& path) {
  write_text_file(path, save_database(db));
}

FingerprintDatabase load_database_file(const std::string& path) {
  return load_database(read_text_file(path));
}

std::vector<RawSampleBatch> parse_sample_lines(std::string_view text) {
  std::vector<RawSampleBatch> batches;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    fields.clear();
    fields.str(line);

    double x = 0, y = 0, rss = 0;
    std::string beacon, extra;
    if (!(fields >> x >> y >> beacon >> rss) || (fields >> extra)) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": expected `x y beacon_id rss`");
    }
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(rss) || rss < 0.0) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                         ": coordinates must be finite and rss finite and >= 0");
    }
    const Point p{x, y};
    auto it = std::find_if(batches.begin(), batches.end(),
                           [&](const RawSampleBatch& b) { return b.point == p; });
    if (it == batches.end()) {
      batches.push_back(RawSampleBatch{p, {}});
      it = std::prev(batches.end());
    }
    it->samples[beacon].push_back(rss);
  }
  return batches;
}

}  // namespace rssfp
