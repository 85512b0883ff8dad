#include "rssfp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "rssfp/error.hpp"

namespace rssfp {

void Scenario::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidInput, what); };
  if (!floorplan.bounds.valid()) bad("floorplan bounds must have positive area");
  for (const auto& w : floorplan.walls) {
    if (!is_finite(w.segment.a) || !is_finite(w.segment.b)) bad("wall endpoints must be finite");
    if (!(w.attenuation >= 0.0) || !std::isfinite(w.attenuation)) bad("wall attenuation must be >= 0");
  }
  if (beacons.empty()) bad("scenario needs at least one beacon");
  std::unordered_set<std::string> ids;
  for (const auto& b : beacons) {
    if (b.id.empty() || !ids.insert(b.id).second) bad("beacon ids must be unique and non-empty");
    if (!floorplan.bounds.contains_closed(b.position)) bad("beacon '" + b.id + "' lies outside the floor");
  }
  const auto& p = propagation;
  if (!(p.path_loss_exponent > 0)) bad("path loss exponent must be > 0");
  if (!(p.shadowing_sigma >= 0)) bad("shadowing sigma must be >= 0");
  if (!(p.rss_at_d0 > p.floor_value) || !(p.floor_value >= 0)) bad("need rss_at_d0 > floor_value >= 0");
  if (p.samples_per_reading < 1) bad("samples_per_reading must be >= 1");
  if (reference_points.empty() && reference_count < 3) bad("reference grid needs m >= 3");
  if (!reference_points.empty() && reference_points.size() < 3) bad("reference list needs >= 3 points");
  for (const auto& r : reference_points) {
    if (!floorplan.bounds.contains_closed(r)) bad("explicit reference point outside the floor");
  }
  if (test_point_count < 0) bad("test point count must be >= 0");
  segmentation.validate();
  for (const auto& r : manual_subareas) {
    if (!r.valid()) bad("manual subarea rectangles must have positive area");
  }
}

double mean_rss(const Floorplan& fp, const PropagationParams& p, const BeaconNode& beacon,
                const Point& point) {
  const double d = std::max(distance(beacon.position, point), 0.1);
  double v = p.rss_at_d0 - 10.0 * p.path_loss_exponent * std::log10(d);
  const Segment ray{beacon.position, point};
  for (const auto& w : fp.walls) {
    if (segments_cross(ray, w.segment)) v -= w.attenuation;
  }
  return std::max(v, p.floor_value);
}

double sample_rss(const Floorplan& fp, const PropagationParams& p, const BeaconNode& beacon,
                  const Point& point, Rng& rng) {
  const double mu = mean_rss(fp, p, beacon, point);
  if (p.shadowing_sigma == 0.0) return mu;
  return std::max(rng.normal(mu, p.shadowing_sigma), p.floor_value);
}

RssVector sample_vector(const Scenario& sc, const Point& point, StreamPurpose purpose,
                        std::uint64_t index, std::uint64_t seed) {
  RssVector::Map readings;
  const auto& p = sc.propagation;
  for (std::size_t bi = 0; bi < sc.beacons.size(); ++bi) {
    Rng rng(seed, purpose, index, bi);
    double sum = 0.0;
    for (int s = 0; s < p.samples_per_reading; ++s) {
      sum += sample_rss(sc.floorplan, p, sc.beacons[bi], point, rng);
    }
    const double mean = sum / p.samples_per_reading;
    if (mean > p.floor_value) readings.emplace(sc.beacons[bi].id, mean);
  }
  return RssVector(std::move(readings));
}

std::vector<Point> grid_points(const Rect& bounds, int m) {
  if (m < 1) throw Error(ErrorCode::kInvalidInput, "grid needs m >= 1");
  const double w = bounds.width(), h = bounds.height();
  int best_nx = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int nx = 1; nx <= m; ++nx) {
    if (m % nx) continue;
    const int ny = m / nx;
    const double skew = std::abs(std::log((w / nx) / (h / ny)));
    if (skew < best) {
      best = skew;
      best_nx = nx;
    }
  }
  const int nx = best_nx, ny = m / best_nx;
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      pts.push_back(Point{bounds.x0 + (i + 0.5) * w / nx, bounds.y0 + (j + 0.5) * h / ny});
    }
  }
  return pts;
}

std::vector<Point> reference_positions(const Scenario& sc) {
  if (!sc.reference_points.empty()) return sc.reference_points;
  return grid_points(sc.floorplan.bounds, sc.reference_count);
}

std::vector<Point> test_points(const Scenario& sc, std::uint64_t seed,
                               const std::vector<Point>& excluded) {
  const Rect& b = sc.floorplan.bounds;
  std::vector<Point> out;
  for (int i = 0; i < sc.test_point_count; ++i) {
    Rng rng(seed, StreamPurpose::kTestPlacement, static_cast<std::uint64_t>(i));
    for (;;) {
      Point p{rng.uniform(b.x0, b.x1), rng.uniform(b.y0, b.y1)};
      if (std::find(excluded.begin(), excluded.end(), p) == excluded.end()) {
        out.push_back(p);
        break;
      }
    }
  }
  return out;
}

FingerprintDatabase survey(const Scenario& sc) { return survey(sc, sc.seed); }

FingerprintDatabase survey(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  FingerprintDatabase db;
  db.set_meta(DatabaseMeta{sc.name, "", 1});
  db.set_bounds(sc.floorplan.bounds);
  for (const auto& b : sc.beacons) db.add_beacon(b);
  const auto positions = reference_positions(sc);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    RssVector v = sample_vector(sc, positions[i], StreamPurpose::kSurvey, i, seed);
    if (v.empty()) continue;  // no beacon in range: nothing to fingerprint
    db.insert_point(positions[i], std::move(v));
  }
  return db;
}

std::vector<WalkSample> walk(const Scenario& sc, const std::vector<Point>& waypoints, double step,
                             std::uint64_t seed) {
  if (waypoints.empty()) throw Error(ErrorCode::kInvalidInput, "walk needs at least one waypoint");
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(ErrorCode::kInvalidInput, "walk step must be > 0");
  for (const auto& w : waypoints) {
    if (!is_finite(w) || !sc.floorplan.bounds.contains_closed(w)) {
      throw Error(ErrorCode::kInvalidInput, "waypoint outside the floor");
    }
  }

  std::vector<Point> positions{waypoints.front()};
  double carried = 0.0;  // arc length covered since the last emitted position
  for (std::size_t k = 1; k < waypoints.size(); ++k) {
    const Point a = waypoints[k - 1], b = waypoints[k];
    const double len = distance(a, b);
    double s = step - carried;
    while (s <= len + 1e-9) {
      const double f = len > 0 ? std::min(s / len, 1.0) : 1.0;
      positions.push_back(Point{a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
      s += step;
    }
    carried = len - (s - step);
  }
  if (!(positions.back() == waypoints.back()) && distance(positions.back(), waypoints.back()) > 1e-9) {
    positions.push_back(waypoints.back());
  }

  std::vector<WalkSample> out;
  out.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out.push_back(WalkSample{static_cast<double>(i), positions[i],
                             sample_vector(sc, positions[i], StreamPurpose::kWalk, i, seed)});
  }
  return out;
}

std::string export_walk_trace(const std::vector<WalkSample>& samples) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& s : samples) {
    for (const auto& [id, rss] : s.vector.readings()) {
      os << s.t << ' ' << s.position.x << ' ' << s.position.y << ' ' << id << ' ' << rss << '\n';
    }
  }
  return os.str();
}

Scenario preset_office() {
  Scenario sc;
  sc.name = "office";
  constexpr double W = 41.5, H = 11.3;
  constexpr double corridor_lo = 4.65, corridor_hi = 6.65, room = 8.3;
  sc.floorplan.name = "office";
  sc.floorplan.bounds = Rect{0, 0, W, H};
  // Corridor walls, each with a 1 m door centred on every room.
  for (double y : {corridor_lo, corridor_hi}) {
    double x = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double door = room * i + room / 2;
      sc.floorplan.walls.push_back(Wall{Segment{{x, y}, {door - 0.5, y}}, 12.0});
      x = door + 0.5;
    }
    sc.floorplan.walls.push_back(Wall{Segment{{x, y}, {W, y}}, 12.0});
  }
  for (int i = 1; i < 5; ++i) {
    const double x = room * i;
    sc.floorplan.walls.push_back(Wall{Segment{{x, 0}, {x, corridor_lo}}, 10.0});
    sc.floorplan.walls.push_back(Wall{Segment{{x, corridor_hi}, {x, H}}, 10.0});
  }
  sc.beacons = {
      {"b1", {4.15, 2.3}, "room 1 south"},
      {"b2", {37.35, 2.3}, "room 5 south"},
      {"b3", {12.45, 9.0}, "room 2 north"},
      {"b4", {29.05, 9.0}, "room 4 north"},
      {"b5", {20.75, 5.65}, "corridor centre"},
  };
  sc.propagation = PropagationParams{90.0, 3.0, 2.0, 0.0, 10};
  sc.reference_count = 70;
  sc.test_point_count = 25;
  sc.seed = 1;
  for (int i = 0; i < 4; ++i) {
    const double x0 = W * i / 4, x1 = W * (i + 1) / 4;
    sc.manual_subareas.push_back(Rect{x0, 0, x1, H / 2});
    sc.manual_subareas.push_back(Rect{x0, H / 2, x1, H});
  }
  return sc;
}

Scenario preset_hall() {
  Scenario sc;
  sc.name = "hall";
  constexpr double W = 30.5, H = 11.3;
  sc.floorplan.name = "hall";
  sc.floorplan.bounds = Rect{0, 0, W, H};
  sc.beacons = {
      {"b1", {0, 0}, "corner SW"},
      {"b2", {W, 0}, "corner SE"},
      {"b3", {0, H}, "corner NW"},
      {"b4", {W, H}, "corner NE"},
      {"b5", {W / 2, H / 2}, "centre"},
  };
  sc.propagation = PropagationParams{90.0, 2.0, 1.0, 0.0, 10};
  sc.reference_count = 60;
  sc.test_point_count = 25;
  sc.seed = 1;
  sc.segmentation = SegmentationParams{0.1, 15.0, 1.0, 256, 1};
  return sc;
}

}  // namespace rssfp
