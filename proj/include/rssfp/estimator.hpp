#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rssfp/fingerprint.hpp"

namespace rssfp {

enum class Method { k3NNF, kKNN, kRBF };

const char* to_string(Method m) noexcept;

struct Neighbor {
  ReferencePointId id;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct EstimationResult {
  Point position;
  std::optional<SubareaId> subarea;
  std::vector<Neighbor> neighbors;  // ascending by distance
  Method method = Method::k3NNF;
  bool fallback_used = false;
  std::size_t candidates = 0;  // reference points searched
};

struct EstimatorParams {
  double margin = 2.0;
  /// Tracking re-acquisition threshold on the best rss_distance. When unset,
  /// default_reacquire_threshold(db) is used.
  std::optional<double> reacquire_threshold;
};

struct SubareaMatch {
  SubareaId id;
  bool fallback = false;
};

/// A unique margin match wins outright. Otherwise the matching subareas (or
/// every subarea when none matches) are ranked by box_distance, then by mean
/// rss_distance to members, then by id. Throws kUnlocatable when v shares no
/// beacon with any feature, kInvalidInput when db has no subareas.
SubareaMatch identify_subarea(const FingerprintDatabase& db, const RssVector& v, double margin);

EstimationResult estimate_3nnf(const FingerprintDatabase& db, const RssVector& v,
                               const EstimatorParams& params = {});

/// Unweighted centroid of the k nearest reference points over the whole
/// database; ties broken by id. Throws kInvalidInput with fewer than k
/// comparable points.
EstimationResult estimate_knn(const FingerprintDatabase& db, const RssVector& v, int k = 2);

/// 3x the median nearest-neighbour rss_distance between reference points.
double default_reacquire_threshold(const FingerprintDatabase& db);

/// 3NNF restricted to the previous subarea and those sharing a boundary with
/// it, falling back to the full search when the best distance exceeds the
/// re-acquisition threshold. Throws kStaleState when the previous subarea is
/// gone.
EstimationResult estimate_tracked(const FingerprintDatabase& db, const RssVector& v,
                                  const EstimationResult& previous,
                                  const EstimatorParams& params = {});

/// Gaussian RBF network, one center per training reference point.
struct RbfModel {
  std::vector<BeaconId> beacons;   // input dimension order
  Eigen::MatrixXd centers;         // m x z, missing readings as 0
  Eigen::VectorXd widths;          // m
  Eigen::MatrixXd weights;         // (m + 1) x 2, last row is the bias
  double regularization = 0.0;
  Rect bounds;

  Eigen::VectorXd encode(const RssVector& v) const;
  /// Kernel activations followed by the constant bias input.
  Eigen::VectorXd activations(const RssVector& v) const;
};

/// Throws kInvalidInput with fewer than 4 reference points and kNumerical
/// when lambda is 0 and the kernel system is rank deficient.
RbfModel train_rbf(const FingerprintDatabase& db, double lambda);

/// Prediction clamped to the model bounds; fallback_used marks clamping.
EstimationResult estimate_rbf(const RbfModel& model, const RssVector& v);

}  // namespace rssfp
