#include "rssfp/eval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "rssfp/error.hpp"
#include "rssfp/segmentation.hpp"

namespace rssfp {

std::string MethodSpec::label() const {
  if (method == Method::kKNN) return "KNN(" + std::to_string(k) + ")";
  return to_string(method);
}

MethodSpec MethodSpec::parse(const std::string& text) {
  std::string t;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  if (t == "3NNF") return MethodSpec{Method::k3NNF, 2};
  if (t == "RBF") return MethodSpec{Method::kRBF, 2};
  if (t == "KNN") return MethodSpec{Method::kKNN, 2};
  if (t.rfind("KNN(", 0) == 0 && t.back() == ')') {
    const std::string digits = t.substr(4, t.size() - 5);
    int k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 1) {
      return MethodSpec{Method::kKNN, k};
    }
  }
  throw Error(ErrorCode::kInvalidInput, "unknown method '" + text + "' (expected 3NNF, KNN(k) or RBF)");
}

std::vector<MethodSpec> parse_method_list(const std::string& comma_separated) {
  std::vector<MethodSpec> out;
  std::stringstream ss(comma_separated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(MethodSpec::parse(item));
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidInput, "method list is empty");
  return out;
}

const char* to_string(SegmentationMode mode) noexcept {
  switch (mode) {
    case SegmentationMode::kAuto: return "auto";
    case SegmentationMode::kManual: return "manual";
    case SegmentationMode::kNone: return "none";
  }
  return "?";
}

SegmentationMode parse_segmentation_mode(const std::string& text) {
  if (text == "auto") return SegmentationMode::kAuto;
  if (text == "manual") return SegmentationMode::kManual;
  if (text == "none") return SegmentationMode::kNone;
  throw Error(ErrorCode::kInvalidInput, "unknown segmentation mode '" + text + "'");
}

void ExperimentConfig::validate() const {
  scenario.validate();
  if (methods.empty()) throw Error(ErrorCode::kInvalidInput, "experiment needs at least one method");
  if (seeds.empty()) throw Error(ErrorCode::kInvalidInput, "experiment needs at least one seed");
  for (int m : reference_counts) {
    if (m < 4) throw Error(ErrorCode::kInvalidInput, "reference counts must be >= 4");
  }
  if (!(rbf_lambda >= 0.0)) throw Error(ErrorCode::kInvalidInput, "rbf lambda must be >= 0");
  if (segmentation == SegmentationMode::kManual && scenario.manual_subareas.empty()) {
    throw Error(ErrorCode::kInvalidInput, "manual segmentation needs scenario rectangles");
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

void finish_row(MetricsRow& row) {
  if (row.errors.empty()) return;
  row.mean_error = std::accumulate(row.errors.begin(), row.errors.end(), 0.0) /
                   static_cast<double>(row.errors.size());
  row.median_error = median_of(row.errors);
  row.max_error = *std::max_element(row.errors.begin(), row.errors.end());
}

struct Query {
  Point truth;
  RssVector vector;
};

// One survey + segmentation + evaluation cell of the experiment grid.
void run_cell(const ExperimentConfig& cfg, Scenario sc, std::uint64_t seed,
              const std::vector<Point>& excluded, std::vector<MetricsRow>& rows) {
  const int m = static_cast<int>(reference_positions(sc).size());
  FingerprintDatabase db = survey(sc, seed);

  const SegmentationMode mode =
      cfg.segmentation.value_or(sc.manual_subareas.empty() ? SegmentationMode::kAuto
                                                           : SegmentationMode::kManual);
  bool segmented = true;
  switch (mode) {
    case SegmentationMode::kAuto:
      segmented = segment_auto(db, sc.segmentation, seed).success;
      break;
    case SegmentationMode::kManual:
      // Operator override: every rectangle holding points becomes a subarea.
      for (const auto& r : sc.manual_subareas) commit_region_unchecked(db, r);
      break;
    case SegmentationMode::kNone:
      commit_region_unchecked(db, sc.floorplan.bounds);
      break;
  }

  std::vector<Query> queries;
  if (cfg.queries == QueryMode::kReferencePoints) {
    const auto& pts = db.reference_points();
    const auto positions = reference_positions(sc);
    for (const auto& p : pts) {
      const auto idx = static_cast<std::uint64_t>(
          std::find(positions.begin(), positions.end(), p.position) - positions.begin());
      queries.push_back(Query{p.position, sample_vector(sc, p.position, StreamPurpose::kQuery, idx, seed)});
    }
  } else {
    const auto tps = test_points(sc, seed, excluded);
    for (std::size_t i = 0; i < tps.size(); ++i) {
      queries.push_back(Query{tps[i], sample_vector(sc, tps[i], StreamPurpose::kQuery, i, seed)});
    }
  }

  std::optional<RbfModel> rbf;
  EstimatorParams params;
  params.margin = sc.segmentation.margin;

  for (const auto& spec : cfg.methods) {
    MetricsRow row;
    row.method = spec.label();
    row.m = m;
    row.seed = seed;
    row.subareas = static_cast<int>(db.subareas().size());
    if (spec.method == Method::k3NNF && !segmented) {
      row.outcome = "segmentation-failed";
      rows.push_back(std::move(row));
      continue;
    }
    if (spec.method == Method::kRBF && !rbf) rbf = train_rbf(db, cfg.rbf_lambda);

    std::size_t hits = 0, failed = 0;
    double candidates = 0.0;
    for (const auto& q : queries) {
      EstimationResult est;
      try {
        switch (spec.method) {
          case Method::k3NNF: est = estimate_3nnf(db, q.vector, params); break;
          case Method::kKNN: est = estimate_knn(db, q.vector, spec.k); break;
          case Method::kRBF: est = estimate_rbf(*rbf, q.vector); break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnlocatable && e.code() != ErrorCode::kInvalidInput &&
            e.code() != ErrorCode::kNoOverlap) {
          throw;
        }
        ++failed;
        continue;
      }
      row.errors.push_back(distance(est.position, q.truth));
      candidates += static_cast<double>(est.candidates);
      if (est.subarea) {
        const Subarea* s = db.find_subarea(*est.subarea);
        if (s && s->region.contains_closed(q.truth)) ++hits;
      }
    }
    if (failed) row.outcome = "unlocatable:" + std::to_string(failed);
    const auto located = static_cast<double>(row.errors.size());
    if (located > 0) {
      row.candidate_mean = candidates / located;
      if (spec.method == Method::k3NNF) row.subarea_hit_rate = static_cast<double>(hits) / located;
    }
    finish_row(row);
    rows.push_back(std::move(row));
  }
}

void sort_rows(std::vector<MetricsRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return std::tie(a.method, a.m, a.seed) < std::tie(b.method, b.m, b.seed);
  });
}

}  // namespace

std::vector<MetricsRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<Scenario> cells;
  if (config.reference_counts.empty() || !config.scenario.reference_points.empty()) {
    cells.push_back(config.scenario);
  } else {
    for (int m : config.reference_counts) {
      Scenario sc = config.scenario;
      sc.reference_count = m;
      cells.push_back(std::move(sc));
    }
  }
  // Test points avoid every reference coordinate of the sweep so one seed
  // queries the same places at every m.
  std::vector<Point> excluded;
  for (const auto& sc : cells) {
    const auto pos = reference_positions(sc);
    excluded.insert(excluded.end(), pos.begin(), pos.end());
  }

  std::vector<MetricsRow> rows;
  for (std::uint64_t seed : config.seeds) {
    for (const auto& sc : cells) run_cell(config, sc, seed, excluded, rows);
  }
  sort_rows(rows);
  return rows;
}

std::vector<MetricsRow> sweep_reference_points(const ExperimentConfig& config) {
  if (config.reference_counts.size() < 2) {
    throw Error(ErrorCode::kInvalidInput, "a sweep needs at least two reference counts");
  }
  return run_experiment(config);
}

namespace {

const char* kCsvHeader =
    "method,m,seed,outcome,subareas,mean_error,median_error,max_error,subarea_hit_rate,"
    "candidate_mean,errors";

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

double parse_num(const std::string& s, std::size_t line, const char* field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "csv line " + std::to_string(line) + ": bad " + field + " '" + s + "'");
  }
  return v;
}

template <typename T>
T parse_int(const std::string& s, std::size_t line, const char* field) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "csv line " + std::to_string(line) + ": bad " + field + " '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string rows_to_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    std::string errs;
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      if (i) errs += ';';
      errs += format_double(r.errors[i]);
    }
    const bool has = !r.errors.empty();
    out += r.method + ',' + std::to_string(r.m) + ',' + std::to_string(r.seed) + ',' + r.outcome + ',' +
           std::to_string(r.subareas) + ',' + (has ? format_double(r.mean_error) : "") + ',' +
           (has ? format_double(r.median_error) : "") + ',' + (has ? format_double(r.max_error) : "") +
           ',' + opt(r.subarea_hit_rate) + ',' + opt(r.candidate_mean) + ',' + errs + '\n';
  }
  return out;
}

std::vector<MetricsRow> rows_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kCsvHeader) throw Error(ErrorCode::kParse, "csv header mismatch");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) {
      throw Error(ErrorCode::kParse, "csv line " + std::to_string(line_no) + ": expected 11 fields");
    }
    MetricsRow r;
    r.method = f[0];
    r.m = parse_int<int>(f[1], line_no, "m");
    r.seed = parse_int<std::uint64_t>(f[2], line_no, "seed");
    r.outcome = f[3];
    r.subareas = parse_int<int>(f[4], line_no, "subareas");
    if (!f[10].empty()) {
      for (const auto& e : split(f[10], ';')) r.errors.push_back(parse_num(e, line_no, "error"));
    }
    if (!f[5].empty()) r.mean_error = parse_num(f[5], line_no, "mean_error");
    if (!f[6].empty()) r.median_error = parse_num(f[6], line_no, "median_error");
    if (!f[7].empty()) r.max_error = parse_num(f[7], line_no, "max_error");
    if (!f[8].empty()) r.subarea_hit_rate = parse_num(f[8], line_no, "subarea_hit_rate");
    if (!f[9].empty()) r.candidate_mean = parse_num(f[9], line_no, "candidate_mean");
    rows.push_back(std::move(r));
  }
  if (line_no == 0) throw Error(ErrorCode::kParse, "csv input is empty");
  return rows;
}

std::vector<BandRow> compare_methods(const std::vector<MetricsRow>& rows, const Rect& area) {
  std::map<std::pair<std::string, int>, std::vector<double>> pooled;
  for (const auto& r : rows) {
    auto& v = pooled[{r.method, r.m}];
    v.insert(v.end(), r.errors.begin(), r.errors.end());
  }
  char area_buf[64];
  std::snprintf(area_buf, sizeof area_buf, "%.1f x %.1f m", area.width(), area.height());
  std::vector<BandRow> out;
  for (auto& [key, errs] : pooled) {
    if (errs.empty()) continue;
    std::sort(errs.begin(), errs.end());
    out.push_back(BandRow{key.first, area_buf, key.second, percentile(errs, 0.1), percentile(errs, 0.9)});
  }
  return out;
}

std::string render_comparison(const std::vector<BandRow>& bands) {
  std::ostringstream os;
  os << "method    | area            | m    | error band (m)\n";
  os << "----------+-----------------+------+---------------\n";
  for (const auto& b : bands) {
    char line[160];
    std::snprintf(line, sizeof line, "%-9s | %-15s | %-4d | %.1f–%.1f\n", b.method.c_str(),
                  b.area.c_str(), b.m, b.lo, b.hi);
    os << line;
  }
  return os.str();
}

SegmentationStudy segmentation_study(const std::vector<Scenario>& scenarios,
                                     const std::vector<std::uint64_t>& seeds) {
  SegmentationStudy study;
  for (const auto& base : scenarios) {
    for (std::uint64_t seed : seeds) {
      Scenario sc = base;
      sc.seed = seed;
      FingerprintDatabase db = survey(sc, seed);
      const SegmentationOutcome out = segment_auto(db, sc.segmentation, seed);
      SegmentationStudyRow row;
      row.scenario = sc.name;
      row.seed = seed;
      row.success = out.success;
      row.subareas = static_cast<int>(out.subareas.size());
      row.iterations = out.iterations;
      if (!out.failures.empty()) row.failure = out.failures.front().reason;
      study.outcomes.push_back(row);
      for (const auto& s : out.subareas) {
        for (const auto& [beacon, range] : s.feature.ranges) {
          study.ranges.push_back(SubareaRangeRow{sc.name, seed, s.id, beacon, range.lo, range.hi});
        }
      }
    }
  }
  return study;
}

std::string study_outcomes_csv(const SegmentationStudy& study) {
  std::string out = "scenario,seed,success,subareas,iterations,failure\n";
  for (const auto& r : study.outcomes) {
    out += r.scenario + ',' + std::to_string(r.seed) + ',' + (r.success ? "1" : "0") + ',' +
           std::to_string(r.subareas) + ',' + std::to_string(r.iterations) + ',' + r.failure + '\n';
  }
  return out;
}

std::string study_ranges_csv(const SegmentationStudy& study) {
  std::string out = "scenario,seed,subarea,beacon,lo,hi\n";
  for (const auto& r : study.ranges) {
    out += r.scenario + ',' + std::to_string(r.seed) + ',' + r.subarea + ',' + r.beacon + ',' +
           format_double(r.lo) + ',' + format_double(r.hi) + '\n';
  }
  return out;
}

}  // namespace rssfp
