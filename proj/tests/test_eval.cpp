#include <doctest.h>

#include <cmath>

#include "rssfp/error.hpp"
#include "rssfp/eval.hpp"

using namespace rssfp;

namespace {

ExperimentConfig hall_zero(QueryMode q) {
  ExperimentConfig c;
  c.scenario = preset_hall();
  c.scenario.propagation.shadowing_sigma = 0;
  c.queries = q;
  return c;
}

}  // namespace

TEST_CASE("method labels") {
  CHECK(MethodSpec::parse("3nnf").label() == "3NNF");
  CHECK(MethodSpec::parse("KNN").label() == "KNN(2)");
  CHECK(MethodSpec::parse("knn(5)").k == 5);
  CHECK(MethodSpec::parse("RBF").method == Method::kRBF);
  CHECK_THROWS_AS(MethodSpec::parse("KNN(0)"), Error);
  CHECK_THROWS_AS(MethodSpec::parse("SVM"), Error);
  CHECK(parse_method_list("3NNF,KNN(2),RBF").size() == 3);
}

TEST_CASE("hall zero noise at reference points is exact") {
  const auto rows = run_experiment(hall_zero(QueryMode::kReferencePoints));
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].outcome == "ok");
  CHECK(rows[0].errors.size() == 60);
  CHECK(rows[0].mean_error == 0.0);
  CHECK(rows[0].max_error == 0.0);
}

TEST_CASE("full grid at zero noise keeps errors within the grid spacing") {
  auto c = hall_zero(QueryMode::kTestPoints);
  c.methods = {MethodSpec{Method::kKNN, 1}};
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 1);
  // The nearest stored vector is at most one cell diagonal away in space.
  const auto grid = grid_points(c.scenario.floorplan.bounds, 60);
  double dx = 1e9, dy = 1e9;
  for (const auto& p : grid) {
    for (const auto& q : grid) {
      if (p.y == q.y && p.x != q.x) dx = std::min(dx, std::abs(p.x - q.x));
      if (p.x == q.x && p.y != q.y) dy = std::min(dy, std::abs(p.y - q.y));
    }
  }
  CHECK(rows[0].max_error <= std::hypot(dx, dy) + 1e-9);
}

TEST_CASE("experiments are deterministic and sorted") {
  ExperimentConfig c;
  c.scenario = preset_office();
  c.methods = parse_method_list("RBF,3NNF,KNN(2)");
  c.seeds = {3, 1};
  const auto a = rows_to_csv(run_experiment(c));
  const auto b = rows_to_csv(run_experiment(c));
  CHECK(a == b);
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].method == "3NNF");
  CHECK(rows[0].seed == 1);
  CHECK(rows[1].seed == 3);
  CHECK(rows[5].method == "RBF");
  for (const auto& r : rows) {
    CHECK(r.errors.size() == 25);
    CHECK(r.subarea_hit_rate.has_value() == (r.method == "3NNF"));
  }
}

TEST_CASE("CSV round trip") {
  ExperimentConfig c;
  c.scenario = preset_office();
  c.methods = parse_method_list("3NNF,RBF");
  c.seeds = {1, 2};
  const auto rows = run_experiment(c);
  const auto text = rows_to_csv(rows);
  CHECK(text.rfind("method,m,seed,outcome,subareas,mean_error,median_error,max_error,subarea_hit_rate,candidate_mean,errors\n", 0) == 0);
  const auto back = rows_from_csv(text);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].method == rows[i].method);
    CHECK(back[i].seed == rows[i].seed);
    CHECK(back[i].m == rows[i].m);
    CHECK(std::abs(back[i].mean_error - rows[i].mean_error) <= 1e-9);
    REQUIRE(back[i].errors.size() == rows[i].errors.size());
    for (std::size_t j = 0; j < rows[i].errors.size(); ++j) {
      CHECK(std::abs(back[i].errors[j] - rows[i].errors[j]) <= 1e-9);
    }
  }
  CHECK(rows_to_csv(back) == text);
  CHECK_THROWS_AS(rows_from_csv("not,a,header\n"), Error);
}

TEST_CASE("sweep") {
  ExperimentConfig c;
  c.scenario = preset_office();
  c.methods = parse_method_list("3NNF,KNN(2)");
  c.reference_counts = {20, 70};
  const auto rows = sweep_reference_points(c);
  CHECK(rows.size() == 4);
  c.reference_counts = {70};
  CHECK_THROWS_AS(sweep_reference_points(c), Error);
}

TEST_CASE("comparison bands") {
  const Rect area{0, 0, 41.5, 11.3};
  CHECK(compare_methods({}, area).empty());
  MetricsRow r;
  r.method = "3NNF";
  r.m = 70;
  for (int i = 0; i <= 100; ++i) r.errors.push_back(i * 0.05);
  const auto bands = compare_methods({r}, area);
  REQUIRE(bands.size() == 1);
  CHECK(bands[0].area == "41.5 x 11.3 m");
  CHECK(bands[0].lo == doctest::Approx(0.5));
  CHECK(bands[0].hi == doctest::Approx(4.5));
  const auto text = render_comparison(bands);
  CHECK(text.find("0.5\xE2\x80\x93" "4.5") != std::string::npos);
}

TEST_CASE("segmentation study") {
  const auto study = segmentation_study({preset_hall(), preset_office()}, {1, 2});
  REQUIRE(study.outcomes.size() == 4);
  for (const auto& o : study.outcomes) {
    CHECK(o.success == (o.scenario == "hall"));
  }
  CHECK_FALSE(study.ranges.empty());
  CHECK(study_outcomes_csv(study).rfind("scenario,seed,success,subareas,iterations,failure\n", 0) == 0);
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
