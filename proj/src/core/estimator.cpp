#include "rssfp/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "rssfp/error.hpp"
#include "rssfp/segmentation.hpp"

namespace rssfp {

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::k3NNF: return "3NNF";
    case Method::kKNN: return "KNN";
    case Method::kRBF: return "RBF";
  }
  return "?";
}

namespace {

constexpr double kDelta = 1e-6;

// Distances from v to the given points, skipping points without a common
// beacon, sorted by (distance, id).
std::vector<std::pair<double, const ReferencePoint*>> ranked(
    const std::vector<const ReferencePoint*>& pts, const RssVector& v) {
  std::vector<std::pair<double, const ReferencePoint*>> out;
  out.reserve(pts.size());
  for (const auto* p : pts) {
    if (common_beacons(v, p->vector).empty()) continue;
    out.emplace_back(rss_distance(v, p->vector), p);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second->id) < std::tie(b.first, b.second->id);
  });
  return out;
}

double mean_member_distance(const FingerprintDatabase& db, const SubareaId& id,
                            const RssVector& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto* p : db.members_of(id)) {
    if (common_beacons(v, p->vector).empty()) continue;
    sum += rss_distance(v, p->vector);
    ++n;
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::infinity();
}

SubareaMatch identify_among(const FingerprintDatabase& db, const RssVector& v, double margin,
                            const std::vector<const Subarea*>& pool) {
  std::vector<const Subarea*> matching;
  std::vector<const Subarea*> comparable;
  for (const auto* s : pool) {
    bool shared = false;
    for (const auto& [id, value] : v.readings()) {
      (void)value;
      if (s->feature.ranges.count(id)) {
        shared = true;
        break;
      }
    }
    if (!shared) continue;
    comparable.push_back(s);
    if (matches_feature(v, s->feature, margin)) matching.push_back(s);
  }
  if (comparable.empty()) {
    throw Error(ErrorCode::kUnlocatable, "reading shares no beacon with any subarea feature");
  }
  if (matching.size() == 1) return SubareaMatch{matching.front()->id, false};

  const auto& ranked_pool = matching.empty() ? comparable : matching;
  const Subarea* best = nullptr;
  std::tuple<double, double, std::string> best_key;
  for (const auto* s : ranked_pool) {
    std::tuple<double, double, std::string> key{box_distance(v, s->feature),
                                                mean_member_distance(db, s->id, v), s->id};
    if (!best || key < best_key) {
      best = s;
      best_key = std::move(key);
    }
  }
  return SubareaMatch{best->id, true};
}

EstimationResult weighted_estimate(const std::vector<std::pair<double, const ReferencePoint*>>& r) {
  EstimationResult res;
  const std::size_t k = std::min<std::size_t>(3, r.size());
  for (std::size_t i = 0; i < k; ++i) res.neighbors.push_back(Neighbor{r[i].second->id, r[i].first});
  for (std::size_t i = 0; i < k; ++i) {
    if (r[i].first == 0.0) {
      res.position = r[i].second->position;
      return res;
    }
  }
  double wsum = 0.0, x = 0.0, y = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = 1.0 / (r[i].first + kDelta);
    wsum += w;
    x += w * r[i].second->position.x;
    y += w * r[i].second->position.y;
  }
  res.position = Point{x / wsum, y / wsum};
  return res;
}

std::vector<const Subarea*> all_subareas(const FingerprintDatabase& db) {
  std::vector<const Subarea*> out;
  for (const auto& s : db.subareas()) out.push_back(&s);
  return out;
}

EstimationResult nnf_in(const FingerprintDatabase& db, const RssVector& v, const SubareaMatch& m) {
  const auto members = db.members_of(m.id);
  const auto r = ranked(members, v);
  if (r.empty()) {
    throw Error(ErrorCode::kUnlocatable, "identified subarea '" + m.id + "' has no comparable member");
  }
  EstimationResult res = weighted_estimate(r);
  res.subarea = m.id;
  res.method = Method::k3NNF;
  res.fallback_used = m.fallback;
  return res;
}

}  // namespace

SubareaMatch identify_subarea(const FingerprintDatabase& db, const RssVector& v, double margin) {
  if (db.subareas().empty()) {
    throw Error(ErrorCode::kInvalidInput, "database has no subareas");
  }
  return identify_among(db, v, margin, all_subareas(db));
}

EstimationResult estimate_3nnf(const FingerprintDatabase& db, const RssVector& v,
                               const EstimatorParams& params) {
  EstimationResult res = nnf_in(db, v, identify_subarea(db, v, params.margin));
  res.candidates = db.reference_points().size();
  return res;
}

EstimationResult estimate_knn(const FingerprintDatabase& db, const RssVector& v, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidInput, "k must be >= 1");
  std::vector<const ReferencePoint*> all;
  for (const auto& p : db.reference_points()) all.push_back(&p);
  const auto r = ranked(all, v);
  if (r.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kInvalidInput, "fewer than k reference points share a beacon with the query");
  }
  EstimationResult res;
  res.method = Method::kKNN;
  res.candidates = all.size();
  double x = 0.0, y = 0.0;
  for (int i = 0; i < k; ++i) {
    res.neighbors.push_back(Neighbor{r[i].second->id, r[i].first});
    x += r[i].second->position.x;
    y += r[i].second->position.y;
  }
  res.position = Point{x / k, y / k};
  return res;
}

double default_reacquire_threshold(const FingerprintDatabase& db) {
  const auto& pts = db.reference_points();
  std::vector<double> nearest;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j || common_beacons(pts[i].vector, pts[j].vector).empty()) continue;
      best = std::min(best, rss_distance(pts[i].vector, pts[j].vector));
    }
    if (std::isfinite(best)) nearest.push_back(best);
  }
  if (nearest.empty()) return std::numeric_limits<double>::infinity();
  std::sort(nearest.begin(), nearest.end());
  const std::size_t n = nearest.size();
  const double median = n % 2 ? nearest[n / 2] : 0.5 * (nearest[n / 2 - 1] + nearest[n / 2]);
  return 3.0 * median;
}

EstimationResult estimate_tracked(const FingerprintDatabase& db, const RssVector& v,
                                  const EstimationResult& previous, const EstimatorParams& params) {
  if (!previous.subarea) {
    throw Error(ErrorCode::kInvalidInput, "previous estimate carries no subarea");
  }
  const Subarea* prev = db.find_subarea(*previous.subarea);
  if (!prev) {
    throw Error(ErrorCode::kStaleState, "previous subarea '" + *previous.subarea + "' no longer exists");
  }
  std::vector<const Subarea*> pool{prev};
  for (const auto& s : db.subareas()) {
    if (s.id != prev->id && s.region.shares_boundary(prev->region)) pool.push_back(&s);
  }
  std::size_t candidates = 0;
  for (const auto* s : pool) candidates += db.members_of(s->id).size();

  const double threshold =
      params.reacquire_threshold ? *params.reacquire_threshold : default_reacquire_threshold(db);

  try {
    const SubareaMatch m = identify_among(db, v, params.margin, pool);
    EstimationResult res = nnf_in(db, v, m);
    if (!res.neighbors.empty() && res.neighbors.front().distance <= threshold) {
      res.fallback_used = false;
      res.candidates = candidates;
      return res;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnlocatable) throw;
  }
  EstimationResult res = estimate_3nnf(db, v, params);
  res.fallback_used = true;
  return res;
}

Eigen::VectorXd RbfModel::encode(const RssVector& v) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(beacons.size()));
  for (std::size_t i = 0; i < beacons.size(); ++i) {
    x(static_cast<Eigen::Index>(i)) = v.get(beacons[i]).value_or(0.0);
  }
  return x;
}

Eigen::VectorXd RbfModel::activations(const RssVector& v) const {
  const Eigen::VectorXd x = encode(v);
  const Eigen::Index m = centers.rows();
  Eigen::VectorXd phi(m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d2 = (centers.row(i).transpose() - x).squaredNorm();
    phi(i) = std::exp(-d2 / (2.0 * widths(i) * widths(i)));
  }
  phi(m) = 1.0;
  return phi;
}

RbfModel train_rbf(const FingerprintDatabase& db, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidInput, "ridge parameter must be finite and >= 0");
  }
  const auto& pts = db.reference_points();
  if (pts.size() < 4) throw Error(ErrorCode::kInvalidInput, "RBF training needs >= 4 reference points");

  RbfModel model;
  model.regularization = lambda;
  for (const auto& b : db.beacons()) model.beacons.push_back(b.id);
  const auto m = static_cast<Eigen::Index>(pts.size());
  const auto z = static_cast<Eigen::Index>(model.beacons.size());

  model.centers.resize(m, z);
  Eigen::MatrixXd targets(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    model.centers.row(i) = model.encode(pts[static_cast<std::size_t>(i)].vector).transpose();
    targets(i, 0) = pts[static_cast<std::size_t>(i)].position.x;
    targets(i, 1) = pts[static_cast<std::size_t>(i)].position.y;
  }

  Eigen::MatrixXd dist(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      dist(i, j) = (model.centers.row(i) - model.centers.row(j)).norm();
    }
  }
  model.widths.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<double> d;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i) d.push_back(dist(i, j));
    }
    std::sort(d.begin(), d.end());
    // Median of the three nearest is the second nearest.
    model.widths(i) = std::max(d[1], 1.0);
  }

  Eigen::MatrixXd a(m, m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      a(i, j) = std::exp(-dist(i, j) * dist(i, j) / (2.0 * model.widths(j) * model.widths(j)));
    }
    a(i, m) = 1.0;
  }

  if (lambda > 0.0) {
    Eigen::MatrixXd normal = a.transpose() * a;
    normal.diagonal().array() += lambda;
    model.weights = normal.ldlt().solve(a.transpose() * targets);
  } else {
    // Underdetermined (one more unknown than equations): minimum-norm solve.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    if (cod.rank() < m) {
      throw Error(ErrorCode::kNumerical,
                  "kernel system is singular with lambda = 0; retry with lambda > 0");
    }
    model.weights = cod.solve(targets);
  }
  if (!model.weights.allFinite()) {
    throw Error(ErrorCode::kNumerical, "RBF solve produced non-finite weights; increase lambda");
  }

  model.bounds = effective_floor(db);
  return model;
}

EstimationResult estimate_rbf(const RbfModel& model, const RssVector& v) {
  const Eigen::VectorXd phi = model.activations(v);
  const Eigen::RowVector2d p = phi.transpose() * model.weights;
  EstimationResult res;
  res.method = Method::kRBF;
  res.candidates = static_cast<std::size_t>(model.centers.rows());
  const double x = std::clamp(p(0), model.bounds.x0, model.bounds.x1);
  const double y = std::clamp(p(1), model.bounds.y0, model.bounds.y1);
  res.fallback_used = x != p(0) || y != p(1);
  res.position = Point{x, y};
  return res;
}

}  // namespace rssfp
