#include <doctest.h>

#include <cstdlib>
#include <string>

#include "rssfp/rssfp.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  rssfp_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status strings and version") {
  CHECK(std::string(rssfp_status_string(RSSFP_OK)) == "ok");
  CHECK(std::string(rssfp_version()).size() > 0);
}

TEST_CASE("scenario handles") {
  rssfp_scenario* sc = nullptr;
  CHECK(rssfp_scenario_preset("castle", &sc) == RSSFP_ERR_INVALID_INPUT);
  CHECK(std::string(rssfp_last_error()).find("castle") != std::string::npos);
  REQUIRE(rssfp_scenario_preset("hall", &sc) == RSSFP_OK);
  uint64_t seed = 0;
  CHECK(rssfp_scenario_seed(sc, &seed) == RSSFP_OK);
  rssfp_segmentation_params p{};
  CHECK(rssfp_scenario_segmentation(sc, &p) == RSSFP_OK);
  CHECK(p.max_iterations > 0);
  CHECK(rssfp_scenario_set_reference_count(sc, 0) == RSSFP_ERR_INVALID_INPUT);
  CHECK(rssfp_scenario_set_sigma(sc, -1) == RSSFP_ERR_INVALID_INPUT);
  char* json = nullptr;
  CHECK(rssfp_scenario_to_json(sc, &json) == RSSFP_OK);
  CHECK(take(json).find("\"hall\"") != std::string::npos);
  rssfp_scenario_free(sc);
  CHECK(rssfp_scenario_preset(nullptr, &sc) == RSSFP_ERR_INVALID_INPUT);
}

TEST_CASE("survey, segment, estimate, persist") {
  rssfp_scenario* sc = nullptr;
  REQUIRE(rssfp_scenario_preset("hall", &sc) == RSSFP_OK);
  REQUIRE(rssfp_scenario_set_sigma(sc, 0) == RSSFP_OK);
  rssfp_database* db = nullptr;
  REQUIRE(rssfp_survey(sc, 1, &db) == RSSFP_OK);
  size_t n = 0;
  CHECK(rssfp_database_point_count(db, &n) == RSSFP_OK);
  CHECK(n == 60);

  const char* ids[] = {"b1", "b2", "b3", "b4", "b5"};
  const double rss[] = {50, 50, 50, 50, 50};
  rssfp_estimation est{};
  CHECK(rssfp_estimate(db, RSSFP_METHOD_3NNF, 0, 2.0, 5, ids, rss, &est) == RSSFP_ERR_INVALID_INPUT);

  rssfp_segmentation_params p{};
  rssfp_scenario_segmentation(sc, &p);
  int ok = 0;
  char* report = nullptr;
  REQUIRE(rssfp_segment_auto(db, &p, 1, &ok, &report) == RSSFP_OK);
  rssfp_string_free(report);
  CHECK(ok == 1);
  CHECK(rssfp_database_subarea_count(db, &n) == RSSFP_OK);
  CHECK(n >= 4);

  CHECK(rssfp_estimate(db, RSSFP_METHOD_3NNF, 0, 2.0, 5, ids, rss, &est) == RSSFP_OK);
  CHECK(std::string(est.subarea).size() > 0);
  CHECK(rssfp_estimate(db, RSSFP_METHOD_KNN, 2, 0, 5, ids, rss, &est) == RSSFP_OK);
  CHECK(est.subarea[0] == '\0');
  const char* unknown[] = {"zz"};
  CHECK(rssfp_estimate(db, RSSFP_METHOD_3NNF, 0, 2.0, 1, unknown, rss, &est) == RSSFP_ERR_UNLOCATABLE);

  rssfp_rbf_model* model = nullptr;
  REQUIRE(rssfp_rbf_train(db, 1e-3, &model) == RSSFP_OK);
  CHECK(rssfp_rbf_estimate(model, 5, ids, rss, &est) == RSSFP_OK);
  rssfp_rbf_free(model);

  char* text = nullptr;
  REQUIRE(rssfp_database_serialize(db, &text) == RSSFP_OK);
  rssfp_database* copy = nullptr;
  REQUIRE(rssfp_database_parse(text, &copy) == RSSFP_OK);
  char* text2 = nullptr;
  REQUIRE(rssfp_database_serialize(copy, &text2) == RSSFP_OK);
  CHECK(std::string(text) == std::string(text2));
  CHECK(rssfp_database_parse("{\"version\":", &copy) == RSSFP_ERR_PARSE);
  rssfp_string_free(text);
  rssfp_string_free(text2);
  rssfp_database_free(copy);
  rssfp_database_free(db);
  rssfp_scenario_free(sc);
}

TEST_CASE("building a database by hand") {
  rssfp_database* db = nullptr;
  REQUIRE(rssfp_database_new(&db) == RSSFP_OK);
  CHECK(rssfp_database_add_beacon(db, "b1", 0, 0) == RSSFP_OK);
  const char* ids[] = {"b1", "b1"};
  const double samples[] = {62, 75};
  char* id = nullptr;
  CHECK(rssfp_database_add_point(db, 3, 4, 2, ids, samples, &id) == RSSFP_OK);
  CHECK(take(id).size() > 0);
  CHECK(rssfp_database_add_point(db, 3, 4, 2, ids, samples, nullptr) == RSSFP_ERR_CONFLICT);
  const double negative[] = {-1, 3};
  CHECK(rssfp_database_add_point(db, 5, 4, 2, ids, negative, nullptr) == RSSFP_ERR_INVALID_INPUT);
  uint64_t rev = 0;
  CHECK(rssfp_database_revision(db, &rev) == RSSFP_OK);
  CHECK(rev == 2);
  CHECK(rssfp_database_load("/nonexistent/db.json", &db) == RSSFP_ERR_IO);
  rssfp_database_free(db);
}

TEST_CASE("harness entry points") {
  rssfp_scenario* sc = nullptr;
  REQUIRE(rssfp_scenario_preset("office", &sc) == RSSFP_OK);
  const uint64_t seeds[] = {1, 2};
  rssfp_experiment cfg{};
  cfg.scenario = sc;
  cfg.methods = "3NNF,KNN(2)";
  cfg.seeds = seeds;
  cfg.seed_count = 2;
  cfg.rbf_lambda = -1;
  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(rssfp_evaluate(&cfg, &a) == RSSFP_OK);
  REQUIRE(rssfp_evaluate(&cfg, &b) == RSSFP_OK);
  const std::string csv = take(a);
  CHECK(csv == take(b));

  const char* texts[] = {csv.c_str()};
  char* report = nullptr;
  REQUIRE(rssfp_compare(texts, 1, sc, &report) == RSSFP_OK);
  CHECK(take(report).find("41.5 x 11.3 m") != std::string::npos);
  REQUIRE(rssfp_compare(nullptr, 0, sc, &report) == RSSFP_OK);
  rssfp_string_free(report);

  const int ms[] = {20, 70};
  cfg.reference_counts = ms;
  cfg.reference_count_count = 2;
  REQUIRE(rssfp_sweep(&cfg, &a) == RSSFP_OK);
  rssfp_string_free(a);
  cfg.methods = "SVM";
  CHECK(rssfp_evaluate(&cfg, &a) == RSSFP_ERR_INVALID_INPUT);

  char* outcomes = nullptr;
  char* ranges = nullptr;
  REQUIRE(rssfp_segstudy(seeds, 2, &outcomes, &ranges) == RSSFP_OK);
  CHECK(take(outcomes).find("hall") != std::string::npos);
  rssfp_string_free(ranges);
  rssfp_scenario_free(sc);
}
