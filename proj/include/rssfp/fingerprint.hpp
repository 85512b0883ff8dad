#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rssfp/geometry.hpp"

namespace rssfp {

using BeaconId = std::string;
using ReferencePointId = std::string;
using SubareaId = std::string;

/// Fixed transmitter with known coordinates.
struct BeaconNode {
  BeaconId id;
  Point position;
  std::string tx_label;

  friend bool operator==(const BeaconNode&, const BeaconNode&) = default;
};

/// Averaged signal-strength readings at one physical point, keyed by beacon.
/// Readings are non-negative magnitudes where larger means stronger. A beacon
/// that was out of range is simply absent.
class RssVector {
 public:
  using Map = std::map<BeaconId, double>;

  RssVector() = default;
  /// Throws kInvalidInput on a negative or non-finite reading.
  explicit RssVector(Map readings);

  const Map& readings() const { return readings_; }
  bool empty() const { return readings_.empty(); }
  std::size_t size() const { return readings_.size(); }
  bool contains(const BeaconId& id) const { return readings_.count(id) != 0; }
  std::optional<double> get(const BeaconId& id) const;

  /// Replaces or inserts one reading; same validation as the constructor.
  void set(const BeaconId& id, double value);

  friend bool operator==(const RssVector&, const RssVector&) = default;

 private:
  Map readings_;
};

/// Surveyed coordinate with its averaged vector and optional subarea.
struct ReferencePoint {
  ReferencePointId id;
  Point position;
  RssVector vector;
  std::optional<SubareaId> subarea;

  friend bool operator==(const ReferencePoint&, const ReferencePoint&) = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v, double margin = 0.0) const {
    return v >= lo - margin && v <= hi + margin;
  }
  double width() const { return hi - lo; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Per-beacon RSS ranges that characterize one subarea.
struct FeatureSet {
  std::map<BeaconId, Interval> ranges;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

struct Subarea {
  SubareaId id;
  Rect region;
  FeatureSet feature;

  friend bool operator==(const Subarea&, const Subarea&) = default;
};

/// Individual readings collected at one point before averaging.
struct RawSampleBatch {
  Point point;
  std::map<BeaconId, std::vector<double>> samples;
};

struct DatabaseMeta {
  std::string scenario;
  std::string created;
  int format_version = 1;

  friend bool operator==(const DatabaseMeta&, const DatabaseMeta&) = default;
};

/// The offline-phase product: beacons, reference points, subareas.
///
/// Mutations go through member functions so the revision counter advances
/// exactly once per change. The revision is session state and takes no part
/// in equality or persistence. Single writer; readers work on copies.
class FingerprintDatabase {
 public:
  FingerprintDatabase() = default;

  const std::vector<BeaconNode>& beacons() const { return beacons_; }
  const std::vector<ReferencePoint>& reference_points() const { return points_; }
  const std::vector<Subarea>& subareas() const { return subareas_; }
  const DatabaseMeta& meta() const { return meta_; }
  const std::optional<Rect>& bounds() const { return bounds_; }
  std::uint64_t revision() const { return revision_; }

  void set_meta(DatabaseMeta meta) { meta_ = std::move(meta); }
  /// Attaches floor bounds; existing beacons and points must lie inside.
  void set_bounds(std::optional<Rect> bounds);

  void add_beacon(BeaconNode beacon);

  const ReferencePoint* find_point(const ReferencePointId& id) const;
  const Subarea* find_subarea(const SubareaId& id) const;
  const BeaconNode* find_beacon(const BeaconId& id) const;
  std::vector<const ReferencePoint*> members_of(const SubareaId& id) const;

  /// Inserts a point with a fresh id (or the given one). Throws kConflict on a
  /// duplicate position or id, kInvalidInput when out of bounds, empty, or
  /// referencing an unknown beacon.
  ReferencePointId insert_point(Point position, RssVector vector,
                                std::optional<ReferencePointId> id = std::nullopt);
  void remove_point(const ReferencePointId& id);

  /// Stores a subarea and assigns every listed point to it in one revision.
  SubareaId insert_subarea(Rect region, FeatureSet feature,
                           const std::vector<ReferencePointId>& members,
                           std::optional<SubareaId> id = std::nullopt);
  void replace_subarea_feature(const SubareaId& id, FeatureSet feature);
  /// Drops the subarea's current members, inserts the fresh points as its new
  /// members and installs the new feature. All-or-nothing, one revision.
  std::vector<ReferencePointId> replace_subarea_members(
      const SubareaId& id, const std::vector<std::pair<Point, RssVector>>& fresh,
      FeatureSet feature);
  void clear_subareas();

  /// Rebuilds a database from parsed parts, validating referential integrity.
  static FingerprintDatabase from_parts(DatabaseMeta meta, std::optional<Rect> bounds,
                                        std::vector<BeaconNode> beacons,
                                        std::vector<ReferencePoint> points,
                                        std::vector<Subarea> subareas);

  /// Value equality ignoring the revision counter.
  friend bool operator==(const FingerprintDatabase& a, const FingerprintDatabase& b) {
    return a.meta_ == b.meta_ && a.bounds_ == b.bounds_ && a.beacons_ == b.beacons_ &&
           a.points_ == b.points_ && a.subareas_ == b.subareas_;
  }

 private:
  void check_in_bounds(const Point& p, const char* what) const;
  std::string next_id(char prefix, std::uint64_t& counter) const;
  void sort_all();

  DatabaseMeta meta_;
  std::optional<Rect> bounds_;
  std::vector<BeaconNode> beacons_;
  std::vector<ReferencePoint> points_;
  std::vector<Subarea> subareas_;
  std::uint64_t revision_ = 0;
  std::uint64_t point_counter_ = 0;
  std::uint64_t subarea_counter_ = 0;
};

/// Arithmetic mean per beacon. Throws kInvalidInput on an empty batch, an
/// empty sample list, or a negative/non-finite sample.
RssVector average_samples(const RawSampleBatch& batch);

std::set<BeaconId> common_beacons(const RssVector& a, const RssVector& b);

/// Euclidean distance over the beacons both vectors observed. Throws
/// kNoOverlap when they share none.
double rss_distance(const RssVector& a, const RssVector& b);

/// Surveys a point and stores it, returning the new id.
ReferencePointId add_reference_point(FingerprintDatabase& db, Point position,
                                     const RawSampleBatch& batch);

}  // namespace rssfp
