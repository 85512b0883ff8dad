#include "rssfp/fingerprint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "rssfp/error.hpp"

namespace rssfp {

namespace {

void check_reading(const BeaconId& id, double value) {
  if (id.empty()) {
    throw Error(ErrorCode::kInvalidInput, "empty beacon id");
  }
  if (!std::isfinite(value) || value < 0.0) {
    throw Error(ErrorCode::kInvalidInput,
                "reading for beacon '" + id + "' must be finite and >= 0");
  }
}

}  // namespace

RssVector::RssVector(Map readings) : readings_(std::move(readings)) {
  for (const auto& [id, value] : readings_) check_reading(id, value);
}

std::optional<double> RssVector::get(const BeaconId& id) const {
  auto it = readings_.find(id);
  if (it == readings_.end()) return std::nullopt;
  return it->second;
}

void RssVector::set(const BeaconId& id, double value) {
  check_reading(id, value);
  readings_[id] = value;
}

RssVector average_samples(const RawSampleBatch& batch) {
  if (batch.samples.empty()) {
    throw Error(ErrorCode::kInvalidInput, "sample batch is empty");
  }
  RssVector::Map out;
  for (const auto& [id, list] : batch.samples) {
    if (list.empty()) {
      throw Error(ErrorCode::kInvalidInput, "no samples for beacon '" + id + "'");
    }
    double sum = 0.0;
    for (double v : list) {
      check_reading(id, v);
      sum += v;
    }
    out[id] = sum / static_cast<double>(list.size());
  }
  return RssVector(std::move(out));
}

std::set<BeaconId> common_beacons(const RssVector& a, const RssVector& b) {
  std::set<BeaconId> out;
  const auto& ra = a.readings();
  const auto& rb = b.readings();
  auto ia = ra.begin();
  auto ib = rb.begin();
  while (ia != ra.end() && ib != rb.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      out.insert(ia->first);
      ++ia;
      ++ib;
    }
  }
  return out;
}

double rss_distance(const RssVector& a, const RssVector& b) {
  const auto& ra = a.readings();
  const auto& rb = b.readings();
  auto ia = ra.begin();
  auto ib = rb.begin();
  double sum = 0.0;
  std::size_t shared = 0;
  while (ia != ra.end() && ib != rb.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      const double d = ia->second - ib->second;
      sum += d * d;
      ++shared;
      ++ia;
      ++ib;
    }
  }
  if (shared == 0) {
    throw Error(ErrorCode::kNoOverlap, "vectors share no beacon");
  }
  return std::sqrt(sum);
}

// --- FingerprintDatabase ----------------------------------------------------

void FingerprintDatabase::check_in_bounds(const Point& p, const char* what) const {
  if (!is_finite(p)) {
    throw Error(ErrorCode::kInvalidInput, std::string(what) + " position is not finite");
  }
  if (bounds_ && !bounds_->contains_closed(p)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s position (%g, %g) is outside the floor bounds", what,
                  p.x, p.y);
    throw Error(ErrorCode::kInvalidInput, buf);
  }
}

void FingerprintDatabase::set_bounds(std::optional<Rect> bounds) {
  if (bounds && !bounds->valid()) {
    throw Error(ErrorCode::kInvalidInput, "floor bounds must have positive area");
  }
  auto saved = bounds_;
  bounds_ = bounds;
  try {
    for (const auto& b : beacons_) check_in_bounds(b.position, "beacon");
    for (const auto& p : points_) check_in_bounds(p.position, "reference point");
  } catch (...) {
    bounds_ = saved;
    throw;
  }
  ++revision_;
}

void FingerprintDatabase::add_beacon(BeaconNode beacon) {
  if (beacon.id.empty()) throw Error(ErrorCode::kInvalidInput, "empty beacon id");
  if (find_beacon(beacon.id)) {
    throw Error(ErrorCode::kConflict, "duplicate beacon id '" + beacon.id + "'");
  }
  check_in_bounds(beacon.position, "beacon");
  beacons_.push_back(std::move(beacon));
  std::sort(beacons_.begin(), beacons_.end(),
            [](const BeaconNode& a, const BeaconNode& b) { return a.id < b.id; });
  ++revision_;
}

const ReferencePoint* FingerprintDatabase::find_point(const ReferencePointId& id) const {
  for (const auto& p : points_) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

const Subarea* FingerprintDatabase::find_subarea(const SubareaId& id) const {
  for (const auto& s : subareas_) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const BeaconNode* FingerprintDatabase::find_beacon(const BeaconId& id) const {
  for (const auto& b : beacons_) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

std::vector<const ReferencePoint*> FingerprintDatabase::members_of(const SubareaId& id) const {
  std::vector<const ReferencePoint*> out;
  for (const auto& p : points_) {
    if (p.subarea && *p.subarea == id) out.push_back(&p);
  }
  return out;
}

std::string FingerprintDatabase::next_id(char prefix, std::uint64_t& counter) const {
  for (;;) {
    ++counter;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%04llu", prefix, static_cast<unsigned long long>(counter));
    std::string id(buf);
    const bool taken = prefix == 'r' ? find_point(id) != nullptr : find_subarea(id) != nullptr;
    if (!taken) return id;
  }
}

ReferencePointId FingerprintDatabase::insert_point(Point position, RssVector vector,
                                                   std::optional<ReferencePointId> id) {
  check_in_bounds(position, "reference point");
  if (vector.empty()) {
    throw Error(ErrorCode::kInvalidInput, "reference point vector is empty");
  }
  for (const auto& [beacon, value] : vector.readings()) {
    (void)value;
    if (!find_beacon(beacon)) {
      throw Error(ErrorCode::kInvalidInput, "reading references unknown beacon '" + beacon + "'");
    }
  }
  for (const auto& p : points_) {
    if (p.position == position) {
      throw Error(ErrorCode::kConflict, "a reference point already exists at this position");
    }
  }
  ReferencePointId new_id;
  if (id) {
    if (id->empty() || find_point(*id)) {
      throw Error(ErrorCode::kConflict, "reference point id '" + *id + "' is taken");
    }
    new_id = *id;
  } else {
    new_id = next_id('r', point_counter_);
  }
  points_.push_back(ReferencePoint{new_id, position, std::move(vector), std::nullopt});
  sort_all();
  ++revision_;
  return new_id;
}

void FingerprintDatabase::remove_point(const ReferencePointId& id) {
  auto it = std::find_if(points_.begin(), points_.end(),
                         [&](const ReferencePoint& p) { return p.id == id; });
  if (it == points_.end()) {
    throw Error(ErrorCode::kInvalidInput, "unknown reference point '" + id + "'");
  }
  points_.erase(it);
  ++revision_;
}

SubareaId FingerprintDatabase::insert_subarea(Rect region, FeatureSet feature,
                                              const std::vector<ReferencePointId>& members,
                                              std::optional<SubareaId> id) {
  if (!region.valid()) {
    throw Error(ErrorCode::kInvalidInput, "subarea region must have positive area");
  }
  for (const auto& [beacon, range] : feature.ranges) {
    if (!find_beacon(beacon)) {
      throw Error(ErrorCode::kInvalidInput, "feature references unknown beacon '" + beacon + "'");
    }
    if (!(range.lo <= range.hi)) {
      throw Error(ErrorCode::kInvalidInput, "feature interval for '" + beacon + "' has lo > hi");
    }
  }
  for (const auto& m : members) {
    const ReferencePoint* p = find_point(m);
    if (!p) throw Error(ErrorCode::kInvalidInput, "unknown reference point '" + m + "'");
    if (!region.contains_closed(p->position)) {
      throw Error(ErrorCode::kInvalidInput, "member '" + m + "' lies outside the region");
    }
  }
  SubareaId new_id;
  if (id) {
    if (id->empty() || find_subarea(*id)) {
      throw Error(ErrorCode::kConflict, "subarea id '" + *id + "' is taken");
    }
    new_id = *id;
  } else {
    new_id = next_id('A', subarea_counter_);
  }
  subareas_.push_back(Subarea{new_id, region, std::move(feature)});
  for (auto& p : points_) {
    if (std::find(members.begin(), members.end(), p.id) != members.end()) p.subarea = new_id;
  }
  sort_all();
  ++revision_;
  return new_id;
}

void FingerprintDatabase::replace_subarea_feature(const SubareaId& id, FeatureSet feature) {
  for (auto& s : subareas_) {
    if (s.id == id) {
      s.feature = std::move(feature);
      ++revision_;
      return;
    }
  }
  throw Error(ErrorCode::kInvalidInput, "unknown subarea '" + id + "'");
}

std::vector<ReferencePointId> FingerprintDatabase::replace_subarea_members(
    const SubareaId& id, const std::vector<std::pair<Point, RssVector>>& fresh,
    FeatureSet feature) {
  const Subarea* target = find_subarea(id);
  if (!target) throw Error(ErrorCode::kStaleState, "unknown subarea '" + id + "'");
  const Rect region = target->region;
  for (const auto& [pos, vec] : fresh) {
    (void)vec;
    if (!region.contains_closed(pos)) {
      throw Error(ErrorCode::kInvalidInput, "fresh reference point lies outside the subarea region");
    }
  }

  FingerprintDatabase work = *this;
  work.points_.erase(std::remove_if(work.points_.begin(), work.points_.end(),
                                    [&](const ReferencePoint& p) { return p.subarea == id; }),
                     work.points_.end());
  std::vector<ReferencePointId> ids;
  for (const auto& [pos, vec] : fresh) ids.push_back(work.insert_point(pos, vec));
  for (auto& p : work.points_) {
    if (std::find(ids.begin(), ids.end(), p.id) != ids.end()) p.subarea = id;
  }
  for (const auto& [beacon, range] : feature.ranges) {
    if (!work.find_beacon(beacon) || !(range.lo <= range.hi)) {
      throw Error(ErrorCode::kInvalidInput, "invalid feature for beacon '" + beacon + "'");
    }
  }
  for (auto& s : work.subareas_) {
    if (s.id == id) s.feature = std::move(feature);
  }
  work.revision_ = revision_ + 1;
  *this = std::move(work);
  return ids;
}

void FingerprintDatabase::clear_subareas() {
  subareas_.clear();
  for (auto& p : points_) p.subarea.reset();
  ++revision_;
}

void FingerprintDatabase::sort_all() {
  std::sort(points_.begin(), points_.end(),
            [](const ReferencePoint& a, const ReferencePoint& b) { return a.id < b.id; });
  std::sort(subareas_.begin(), subareas_.end(),
            [](const Subarea& a, const Subarea& b) { return a.id < b.id; });
}

FingerprintDatabase FingerprintDatabase::from_parts(DatabaseMeta meta, std::optional<Rect> bounds,
                                                    std::vector<BeaconNode> beacons,
                                                    std::vector<ReferencePoint> points,
                                                    std::vector<Subarea> subareas) {
  FingerprintDatabase db;
  db.meta_ = std::move(meta);
  if (bounds && !bounds->valid()) {
    throw Error(ErrorCode::kInvalidInput, "floor bounds must have positive area");
  }
  db.bounds_ = bounds;
  for (auto& b : beacons) db.add_beacon(std::move(b));

  std::unordered_set<std::string> subarea_ids;
  for (const auto& s : subareas) {
    if (!subarea_ids.insert(s.id).second) {
      throw Error(ErrorCode::kConflict, "duplicate subarea id '" + s.id + "'");
    }
  }
  for (auto& p : points) {
    auto subarea = p.subarea;
    if (subarea && !subarea_ids.count(*subarea)) {
      throw Error(ErrorCode::kInvalidInput,
                  "reference point '" + p.id + "' references unknown subarea '" + *subarea + "'");
    }
    const auto id = db.insert_point(p.position, std::move(p.vector), p.id);
    for (auto& stored : db.points_) {
      if (stored.id == id) stored.subarea = subarea;
    }
  }
  for (auto& s : subareas) {
    std::vector<ReferencePointId> members;
    for (const auto& p : db.points_) {
      if (p.subarea && *p.subarea == s.id) members.push_back(p.id);
    }
    // insert_subarea re-assigns the same members; ids are preserved.
    auto id = s.id;
    db.insert_subarea(s.region, std::move(s.feature), members, id);
  }
  // Keep generated ids clear of the loaded ones.
  auto numeric_suffix = [](const std::string& id) -> std::uint64_t {
    if (id.size() < 2) return 0;
    std::uint64_t v = 0;
    for (std::size_t i = 1; i < id.size(); ++i) {
      if (id[i] < '0' || id[i] > '9') return 0;
      v = v * 10 + static_cast<std::uint64_t>(id[i] - '0');
    }
    return v;
  };
  for (const auto& p : db.points_) db.point_counter_ = std::max(db.point_counter_, numeric_suffix(p.id));
  for (const auto& s : db.subareas_) db.subarea_counter_ = std::max(db.subarea_counter_, numeric_suffix(s.id));
  db.revision_ = 0;
  return db;
}

ReferencePointId add_reference_point(FingerprintDatabase& db, Point position,
                                     const RawSampleBatch& batch) {
  RssVector vector = average_samples(batch);
  return db.insert_point(position, std::move(vector));
}

}  // namespace rssfp
