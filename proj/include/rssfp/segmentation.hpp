#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rssfp/fingerprint.hpp"

namespace rssfp {

struct SegmentationParams {
  double margin = 2.0;
  double max_range_width = 15.0;
  double min_cell_size = 2.0;
  int max_iterations = 256;
  int min_points_per_subarea = 3;

  /// Throws kInvalidInput unless every threshold is positive.
  void validate() const;

  friend bool operator==(const SegmentationParams&, const SegmentationParams&) = default;
};

enum class VerdictReason { kOk, kNotCohesive, kNotDistinct, kTooFewPoints };

struct SegmentationVerdict {
  bool accepted = false;
  VerdictReason reason = VerdictReason::kTooFewPoints;
  std::optional<SubareaId> conflicting;  // set for kNotDistinct
  Rect region;
  std::vector<ReferencePointId> members;
  FeatureSet feature;  // computed whenever members is non-empty
  std::uint64_t revision = 0;  // database revision the check ran against

  /// "ok", "not-cohesive", "too-few-points" or "not-distinct-from:<id>".
  std::string reason_text() const;
};

FeatureSet feature_of(const std::vector<ReferencePoint>& points);
FeatureSet feature_of(const std::vector<const ReferencePoint*>& points);

/// True iff v shares a beacon with f and every shared reading lies in its
/// margin-inflated interval.
bool matches_feature(const RssVector& v, const FeatureSet& f, double margin);

/// Root of summed squared interval violations over shared beacons. Throws
/// kNoOverlap when v and f share none.
double box_distance(const RssVector& v, const FeatureSet& f);

/// True iff some shared beacon has disjoint margin-inflated intervals.
bool is_distinct(const FeatureSet& a, const FeatureSet& b, double margin);

bool is_cohesive(const FeatureSet& f, double max_range_width);

/// Floor rectangle used for membership tests: the attached bounds, else the
/// points' bounding box padded by half a meter.
Rect effective_floor(const FingerprintDatabase& db);

/// Reference points of db that fall in region under half-open membership.
std::vector<const ReferencePoint*> points_in(const FingerprintDatabase& db, const Rect& region);

/// Pure check of a proposed subarea against the current database. A region
/// overlapping an existing subarea is reported as not distinct from it.
/// Throws kInvalidInput for a degenerate region or one outside the floor.
SegmentationVerdict segment_manual_check(const FingerprintDatabase& db, const Rect& region,
                                         const SegmentationParams& params);

/// Stores an accepted verdict. Throws kConflict when the database changed
/// since the check, kInvalidInput when the verdict was not accepted.
SubareaId commit_subarea(FingerprintDatabase& db, const SegmentationVerdict& verdict);

/// Re-runs the check at the caller's observed revision and commits on
/// acceptance. Throws kConflict on a revision mismatch and returns the
/// rejecting verdict otherwise.
struct CommitResult {
  std::optional<SubareaId> id;
  SegmentationVerdict verdict;
};
CommitResult commit_region(FingerprintDatabase& db, const Rect& region,
                           std::uint64_t observed_revision, const SegmentationParams& params);

/// Operator override: stores the region with the feature of whatever points
/// it contains, skipping cohesion and distinctness. Returns nullopt for an
/// empty region.
std::optional<SubareaId> commit_region_unchecked(FingerprintDatabase& db, const Rect& region);

struct FailedLeaf {
  Rect region;
  std::string reason;  // too-few-points | below-min-cell | budget-exhausted
  std::size_t point_count = 0;
};

struct SegmentationOutcome {
  bool success = false;
  std::vector<Subarea> subareas;  // committed subareas on success
  std::vector<FailedLeaf> failures;
  int iterations = 0;
};

/// Seeded recursive bisection followed by a global distinctness pass. On
/// success every existing subarea is replaced; on failure nothing changes.
SegmentationOutcome segment_auto(FingerprintDatabase& db, const SegmentationParams& params,
                                 std::uint64_t seed);

/// Replaces one subarea's members by freshly collected points and recomputes
/// only its feature.
Subarea resegment_subarea(FingerprintDatabase& db, const SubareaId& id,
                          const std::vector<std::pair<Point, RssVector>>& fresh);

}  // namespace rssfp
