#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rssfp/estimator.hpp"
#include "rssfp/simulator.hpp"

namespace rssfp {

struct MethodSpec {
  Method method = Method::k3NNF;
  int k = 2;  // KNN only

  /// "3NNF", "KNN(2)", "RBF".
  std::string label() const;
  /// Accepts the labels above, case-insensitively; "KNN" alone means k = 2.
  static MethodSpec parse(const std::string& text);

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

std::vector<MethodSpec> parse_method_list(const std::string& comma_separated);

enum class SegmentationMode { kAuto, kManual, kNone };

const char* to_string(SegmentationMode mode) noexcept;
SegmentationMode parse_segmentation_mode(const std::string& text);

enum class QueryMode { kTestPoints, kReferencePoints };

struct ExperimentConfig {
  Scenario scenario;
  std::vector<MethodSpec> methods{MethodSpec{}};
  /// Unset: manual when the scenario lists rectangles, auto otherwise.
  std::optional<SegmentationMode> segmentation;
  std::vector<std::uint64_t> seeds{1};
  /// Empty: the scenario's own count.
  std::vector<int> reference_counts;
  QueryMode queries = QueryMode::kTestPoints;
  double rbf_lambda = 1e-3;

  void validate() const;
};

struct MetricsRow {
  std::string method;
  int m = 0;
  std::uint64_t seed = 0;
  std::string outcome = "ok";  // ok | segmentation-failed | unlocatable
  int subareas = 0;
  double mean_error = 0.0;
  double median_error = 0.0;
  double max_error = 0.0;
  std::vector<double> errors;
  std::optional<double> subarea_hit_rate;  // 3NNF only
  std::optional<double> candidate_mean;
};

std::vector<MetricsRow> run_experiment(const ExperimentConfig& config);

/// Requires at least two reference counts.
std::vector<MetricsRow> sweep_reference_points(const ExperimentConfig& config);

std::string rows_to_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> rows_from_csv(std::string_view text);

struct BandRow {
  std::string method;
  std::string area;  // e.g. "41.5 x 11.3 m"
  int m = 0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Pooled per-point errors per (method, m), summarized as the 10th-90th
/// percentile band.
std::vector<BandRow> compare_methods(const std::vector<MetricsRow>& rows, const Rect& area);
std::string render_comparison(const std::vector<BandRow>& bands);

struct SegmentationStudyRow {
  std::string scenario;
  std::uint64_t seed = 0;
  bool success = false;
  int subareas = 0;
  int iterations = 0;
  std::string failure;  // first failing leaf reason, empty on success
};

struct SubareaRangeRow {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string subarea;
  std::string beacon;
  double lo = 0.0;
  double hi = 0.0;
};

struct SegmentationStudy {
  std::vector<SegmentationStudyRow> outcomes;
  std::vector<SubareaRangeRow> ranges;
};

/// segment_auto over fresh surveys of each scenario, one per seed, using each
/// scenario's own segmentation parameters.
SegmentationStudy segmentation_study(const std::vector<Scenario>& scenarios,
                                     const std::vector<std::uint64_t>& seeds);

std::string study_outcomes_csv(const SegmentationStudy& study);
std::string study_ranges_csv(const SegmentationStudy& study);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

}  // namespace rssfp
