#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rssfp/fingerprint.hpp"
#include "rssfp/rng.hpp"
#include "rssfp/segmentation.hpp"

namespace rssfp {

struct Wall {
  Segment segment;
  double attenuation = 0.0;  // dB, subtracted per crossing
};

struct Floorplan {
  std::string name;
  Rect bounds;
  std::vector<Wall> walls;
};

struct PropagationParams {
  double rss_at_d0 = 90.0;  // at d0 = 1 m
  double path_loss_exponent = 2.0;
  double shadowing_sigma = 0.0;
  double floor_value = 0.0;
  int samples_per_reading = 10;
};

struct Scenario {
  std::string name;
  Floorplan floorplan;
  std::vector<BeaconNode> beacons;
  PropagationParams propagation;
  int reference_count = 60;            // uniform grid when reference_points is empty
  std::vector<Point> reference_points;  // explicit placement overrides the grid
  int test_point_count = 25;
  std::uint64_t seed = 1;
  SegmentationParams segmentation;
  std::vector<Rect> manual_subareas;

  /// Throws kInvalidInput on any violated invariant.
  void validate() const;
};

double mean_rss(const Floorplan& fp, const PropagationParams& p, const BeaconNode& beacon,
                const Point& point);

double sample_rss(const Floorplan& fp, const PropagationParams& p, const BeaconNode& beacon,
                  const Point& point, Rng& rng);

/// Averaged reading at one point drawn from the stream (seed, purpose, index,
/// beacon index). Beacons whose mean sits at floor_value are omitted.
RssVector sample_vector(const Scenario& sc, const Point& point, StreamPurpose purpose,
                        std::uint64_t index, std::uint64_t seed);

/// Cell-centre grid with exactly m points; nx * ny = m chosen so cells are as
/// close to square as possible.
std::vector<Point> grid_points(const Rect& bounds, int m);

std::vector<Point> reference_positions(const Scenario& sc);

/// Uniform random in-bounds positions, never equal to an excluded coordinate.
std::vector<Point> test_points(const Scenario& sc, std::uint64_t seed,
                               const std::vector<Point>& excluded);

/// Surveys the scenario at its own seed.
FingerprintDatabase survey(const Scenario& sc);
FingerprintDatabase survey(const Scenario& sc, std::uint64_t seed);

struct WalkSample {
  double t = 0.0;
  Point position;
  RssVector vector;
};

/// Positions every `step` meters along the waypoint polyline (plus the final
/// waypoint), one sampled vector per position.
std::vector<WalkSample> walk(const Scenario& sc, const std::vector<Point>& waypoints, double step,
                             std::uint64_t seed);

/// Line-oriented trace: `t x y beacon_id rss` per reading.
std::string export_walk_trace(const std::vector<WalkSample>& samples);

Scenario preset_office();
Scenario preset_hall();

}  // namespace rssfp
