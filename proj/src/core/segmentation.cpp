#include "rssfp/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "rssfp/error.hpp"
#include "rssfp/rng.hpp"

namespace rssfp {

void SegmentationParams::validate() const {
  if (!(margin > 0) || !(max_range_width > 0) || !(min_cell_size > 0) || max_iterations <= 0 ||
      min_points_per_subarea < 1) {
    throw Error(ErrorCode::kInvalidInput,
                "segmentation thresholds must be positive and min_points_per_subarea >= 1");
  }
}

std::string SegmentationVerdict::reason_text() const {
  switch (reason) {
    case VerdictReason::kOk: return "ok";
    case VerdictReason::kNotCohesive: return "not-cohesive";
    case VerdictReason::kTooFewPoints: return "too-few-points";
    case VerdictReason::kNotDistinct: return "not-distinct-from:" + conflicting.value_or("");
  }
  return "unknown";
}

namespace {

template <typename Range, typename Get>
FeatureSet feature_from(const Range& points, Get get) {
  if (points.empty()) {
    throw Error(ErrorCode::kInvalidInput, "feature of an empty point set");
  }
  FeatureSet f;
  for (const auto& item : points) {
    for (const auto& [id, value] : get(item).vector.readings()) {
      auto [it, inserted] = f.ranges.try_emplace(id, Interval{value, value});
      if (!inserted) {
        it->second.lo = std::min(it->second.lo, value);
        it->second.hi = std::max(it->second.hi, value);
      }
    }
  }
  return f;
}

}  // namespace

FeatureSet feature_of(const std::vector<ReferencePoint>& points) {
  return feature_from(points, [](const ReferencePoint& p) -> const ReferencePoint& { return p; });
}

FeatureSet feature_of(const std::vector<const ReferencePoint*>& points) {
  return feature_from(points, [](const ReferencePoint* p) -> const ReferencePoint& { return *p; });
}

bool matches_feature(const RssVector& v, const FeatureSet& f, double margin) {
  bool shared = false;
  for (const auto& [id, value] : v.readings()) {
    auto it = f.ranges.find(id);
    if (it == f.ranges.end()) continue;
    shared = true;
    if (!it->second.contains(value, margin)) return false;
  }
  return shared;
}

double box_distance(const RssVector& v, const FeatureSet& f) {
  bool shared = false;
  double sum = 0.0;
  for (const auto& [id, value] : v.readings()) {
    auto it = f.ranges.find(id);
    if (it == f.ranges.end()) continue;
    shared = true;
    double gap = 0.0;
    if (value < it->second.lo) gap = it->second.lo - value;
    else if (value > it->second.hi) gap = value - it->second.hi;
    sum += gap * gap;
  }
  if (!shared) throw Error(ErrorCode::kNoOverlap, "vector and feature share no beacon");
  return std::sqrt(sum);
}

bool is_distinct(const FeatureSet& a, const FeatureSet& b, double margin) {
  for (const auto& [id, ra] : a.ranges) {
    auto it = b.ranges.find(id);
    if (it == b.ranges.end()) continue;
    const Interval& rb = it->second;
    if (ra.hi + margin < rb.lo - margin || rb.hi + margin < ra.lo - margin) return true;
  }
  return false;
}

bool is_cohesive(const FeatureSet& f, double max_range_width) {
  return std::all_of(f.ranges.begin(), f.ranges.end(),
                     [&](const auto& kv) { return kv.second.width() <= max_range_width; });
}

Rect effective_floor(const FingerprintDatabase& db) {
  if (db.bounds()) return *db.bounds();
  const auto& pts = db.reference_points();
  if (pts.empty()) return Rect{0, 0, 1, 1};
  Rect r{pts[0].position.x, pts[0].position.y, pts[0].position.x, pts[0].position.y};
  for (const auto& p : pts) {
    r.x0 = std::min(r.x0, p.position.x);
    r.y0 = std::min(r.y0, p.position.y);
    r.x1 = std::max(r.x1, p.position.x);
    r.y1 = std::max(r.y1, p.position.y);
  }
  return Rect{r.x0 - 0.5, r.y0 - 0.5, r.x1 + 0.5, r.y1 + 0.5};
}

std::vector<const ReferencePoint*> points_in(const FingerprintDatabase& db, const Rect& region) {
  const Rect floor = effective_floor(db);
  std::vector<const ReferencePoint*> out;
  for (const auto& p : db.reference_points()) {
    if (region.contains_partition(p.position, floor)) out.push_back(&p);
  }
  return out;
}

SegmentationVerdict segment_manual_check(const FingerprintDatabase& db, const Rect& region,
                                         const SegmentationParams& params) {
  params.validate();
  if (!region.valid()) {
    throw Error(ErrorCode::kInvalidInput, "region must be a finite rectangle of positive area");
  }
  if (!region.intersects(effective_floor(db))) {
    throw Error(ErrorCode::kInvalidInput, "region does not intersect the floor");
  }

  SegmentationVerdict v;
  v.region = region;
  v.revision = db.revision();
  const auto members = points_in(db, region);
  for (const auto* p : members) v.members.push_back(p->id);
  if (!members.empty()) v.feature = feature_of(members);

  if (members.size() < static_cast<std::size_t>(params.min_points_per_subarea)) {
    v.reason = VerdictReason::kTooFewPoints;
    return v;
  }
  if (!is_cohesive(v.feature, params.max_range_width)) {
    v.reason = VerdictReason::kNotCohesive;
    return v;
  }
  for (const auto& s : db.subareas()) {
    if (s.region.intersects(region) || !is_distinct(v.feature, s.feature, params.margin)) {
      v.reason = VerdictReason::kNotDistinct;
      v.conflicting = s.id;
      return v;
    }
  }
  v.accepted = true;
  v.reason = VerdictReason::kOk;
  return v;
}

SubareaId commit_subarea(FingerprintDatabase& db, const SegmentationVerdict& verdict) {
  if (!verdict.accepted) {
    throw Error(ErrorCode::kInvalidInput, "cannot commit a rejected region (" +
                                              verdict.reason_text() + ")");
  }
  if (verdict.revision != db.revision()) {
    throw Error(ErrorCode::kConflict, "database changed since the region was checked (revision " +
                                          std::to_string(verdict.revision) + " vs " +
                                          std::to_string(db.revision()) + ")");
  }
  return db.insert_subarea(verdict.region, verdict.feature, verdict.members);
}

CommitResult commit_region(FingerprintDatabase& db, const Rect& region,
                           std::uint64_t observed_revision, const SegmentationParams& params) {
  if (observed_revision != db.revision()) {
    throw Error(ErrorCode::kConflict, "stale revision " + std::to_string(observed_revision) +
                                          " (current " + std::to_string(db.revision()) + ")");
  }
  CommitResult r;
  r.verdict = segment_manual_check(db, region, params);
  if (r.verdict.accepted) r.id = commit_subarea(db, r.verdict);
  return r;
}

std::optional<SubareaId> commit_region_unchecked(FingerprintDatabase& db, const Rect& region) {
  const auto members = points_in(db, region);
  if (members.empty()) return std::nullopt;
  std::vector<ReferencePointId> ids;
  for (const auto* p : members) ids.push_back(p->id);
  FeatureSet f = feature_of(members);
  return db.insert_subarea(region, std::move(f), ids);
}

namespace {

struct Leaf {
  Rect region;
  std::vector<const ReferencePoint*> members;
  FeatureSet feature;
};

class AutoSegmenter {
 public:
  AutoSegmenter(const FingerprintDatabase& db, const SegmentationParams& params, std::uint64_t seed)
      : db_(db), params_(params), rng_(seed, StreamPurpose::kSegmentation) {}

  SegmentationOutcome run() {
    SegmentationOutcome out;
    try {
      process(effective_floor(db_), false);
      if (failures_.empty()) distinctness_pass();
    } catch (const BudgetExhausted&) {
    }
    out.iterations = iterations_;
    out.failures = std::move(failures_);
    out.success = out.failures.empty();
    return out;
  }

  std::vector<Leaf>& leaves() { return leaves_; }

 private:
  struct BudgetExhausted {};

  void fail(const Rect& r, const char* reason, std::size_t count) {
    failures_.push_back(FailedLeaf{r, reason, count});
  }

  void process(const Rect& r, bool force_split) {
    if (++iterations_ > params_.max_iterations) {
      fail(r, "budget-exhausted", points_in(db_, r).size());
      throw BudgetExhausted{};
    }
    auto members = points_in(db_, r);
    // A region without reference points carries no fingerprint; it is left
    // out of the partition.
    if (members.empty()) return;
    if (members.size() < static_cast<std::size_t>(params_.min_points_per_subarea)) {
      fail(r, "too-few-points", members.size());
      return;
    }
    FeatureSet f = feature_of(members);
    if (!force_split && is_cohesive(f, params_.max_range_width)) {
      leaves_.push_back(Leaf{r, std::move(members), std::move(f)});
      return;
    }
    const double t = 1.0 / 3.0 + rng_.uniform() / 3.0;
    Rect a = r, b = r;
    double smaller;
    if (r.width() >= r.height()) {
      const double xs = r.x0 + t * r.width();
      a.x1 = xs;
      b.x0 = xs;
      smaller = std::min(xs - r.x0, r.x1 - xs);
    } else {
      const double ys = r.y0 + t * r.height();
      a.y1 = ys;
      b.y0 = ys;
      smaller = std::min(ys - r.y0, r.y1 - ys);
    }
    if (smaller < params_.min_cell_size) {
      fail(r, "below-min-cell", members.size());
      return;
    }
    process(a, false);
    process(b, false);
  }

  void distinctness_pass() {
    for (;;) {
      std::optional<std::pair<std::size_t, std::size_t>> bad;
      for (std::size_t i = 0; i < leaves_.size() && !bad; ++i) {
        for (std::size_t j = i + 1; j < leaves_.size(); ++j) {
          if (!is_distinct(leaves_[i].feature, leaves_[j].feature, params_.margin)) {
            bad = {i, j};
            break;
          }
        }
      }
      if (!bad) return;
      const auto [i, j] = *bad;
      const std::size_t k = leaves_[i].members.size() >= leaves_[j].members.size() ? i : j;
      const Rect r = leaves_[k].region;
      leaves_.erase(leaves_.begin() + static_cast<std::ptrdiff_t>(k));
      process(r, true);
      if (!failures_.empty()) return;
    }
  }

  const FingerprintDatabase& db_;
  const SegmentationParams& params_;
  Rng rng_;
  int iterations_ = 0;
  std::vector<Leaf> leaves_;
  std::vector<FailedLeaf> failures_;
};

}  // namespace

SegmentationOutcome segment_auto(FingerprintDatabase& db, const SegmentationParams& params,
                                 std::uint64_t seed) {
  params.validate();
  if (db.reference_points().size() < static_cast<std::size_t>(params.min_points_per_subarea)) {
    throw Error(ErrorCode::kInvalidInput, "not enough reference points to segment");
  }
  AutoSegmenter seg(db, params, seed);
  SegmentationOutcome out = seg.run();
  if (!out.success) return out;

  auto leaves = std::move(seg.leaves());
  std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) {
    return std::tie(a.region.x0, a.region.y0, a.region.x1, a.region.y1) <
           std::tie(b.region.x0, b.region.y0, b.region.x1, b.region.y1);
  });
  FingerprintDatabase work = db;
  work.clear_subareas();
  for (const auto& leaf : leaves) {
    std::vector<ReferencePointId> ids;
    for (const auto* p : leaf.members) ids.push_back(p->id);
    const SubareaId id = work.insert_subarea(leaf.region, leaf.feature, ids);
    out.subareas.push_back(*work.find_subarea(id));
  }
  db = std::move(work);
  return out;
}

Subarea resegment_subarea(FingerprintDatabase& db, const SubareaId& id,
                          const std::vector<std::pair<Point, RssVector>>& fresh) {
  if (!db.find_subarea(id)) throw Error(ErrorCode::kInvalidInput, "unknown subarea '" + id + "'");
  if (fresh.empty()) {
    throw Error(ErrorCode::kInvalidInput, "re-segmentation needs at least one fresh point");
  }
  std::vector<ReferencePoint> pts;
  for (const auto& [pos, vec] : fresh) pts.push_back(ReferencePoint{"", pos, vec, std::nullopt});
  db.replace_subarea_members(id, fresh, feature_of(pts));
  return *db.find_subarea(id);
}

}  // namespace rssfp
