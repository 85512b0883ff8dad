#include <doctest.h>

#include <algorithm>
#include <random>

#include "rssfp/error.hpp"
#include "rssfp/fingerprint.hpp"
#include "support.hpp"

using namespace rssfp;
namespace ts = testsupport;

namespace {

RawSampleBatch batch(std::map<BeaconId, std::vector<double>> samples, Point p = {0, 0}) {
  return RawSampleBatch{p, std::move(samples)};
}

FingerprintDatabase small_db() {
  FingerprintDatabase db;
  db.set_bounds(Rect{0, 0, 10, 10});
  db.add_beacon(BeaconNode{"b1", {0, 0}, ""});
  db.add_beacon(BeaconNode{"b2", {10, 0}, ""});
  return db;
}

}  // namespace

TEST_CASE("average_samples") {
  CHECK(average_samples(batch({{"b1", {10, 10, 10}}})) == RssVector({{"b1", 10}}));
  const auto v = average_samples(batch({{"b1", {62, 75}}, {"b2", {50}}}));
  CHECK(v.get("b1").value() == doctest::Approx(68.5));
  CHECK(v.get("b2").value() == doctest::Approx(50));
  CHECK_FALSE(v.contains("b3"));

  CHECK_THROWS_AS(average_samples(batch({})), Error);
  CHECK_THROWS_AS(average_samples(batch({{"b1", {}}})), Error);
  CHECK_THROWS_AS(average_samples(batch({{"b1", {-1}}})), Error);
  CHECK_THROWS_AS(average_samples(batch({{"b1", {std::nan("")}}})), Error);
  try {
    average_samples(batch({}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidInput);
  }
}

TEST_CASE("average_samples is permutation invariant") {
  ts::Gen g(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s;
    const int n = ts::uniform_int(g, 1, 12);
    for (int i = 0; i < n; ++i) s.push_back(ts::uniform(g, 0, 100));
    auto shuffled = s;
    std::shuffle(shuffled.begin(), shuffled.end(), g);
    const double a = average_samples(batch({{"b1", s}})).get("b1").value();
    const double b = average_samples(batch({{"b1", shuffled}})).get("b1").value();
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("RssVector validation") {
  CHECK_THROWS_AS(RssVector({{"b1", -0.5}}), Error);
  CHECK_THROWS_AS(RssVector({{"b1", INFINITY}}), Error);
  CHECK_THROWS_AS(RssVector({{"", 1.0}}), Error);
  RssVector v({{"b1", 0.0}});
  CHECK(v.get("b1").value() == 0.0);
  CHECK_FALSE(v.get("b2").has_value());
  CHECK_THROWS_AS(v.set("b2", -1), Error);
}

TEST_CASE("common_beacons") {
  const RssVector a({{"b1", 1}, {"b2", 2}});
  const RssVector b({{"b2", 3}, {"b3", 4}});
  CHECK(common_beacons(a, b) == std::set<BeaconId>{"b2"});
  CHECK(common_beacons(a, b) == common_beacons(b, a));
  CHECK(common_beacons(a, a) == std::set<BeaconId>{"b1", "b2"});
  CHECK(common_beacons(RssVector({{"b1", 1}}), RssVector({{"b2", 1}})).empty());
}

TEST_CASE("rss_distance examples") {
  const RssVector r({{"b1", 10}, {"b2", 20}, {"b3", 30}});
  CHECK(rss_distance(r, r) == 0.0);
  CHECK(rss_distance(RssVector({{"b1", 13}, {"b2", 24}, {"b3", 30}}), r) == doctest::Approx(5.0));
  // Beacons seen by only one side are ignored.
  CHECK(rss_distance(RssVector({{"b1", 13}, {"b9", 99}}), r) == doctest::Approx(3.0));
  try {
    rss_distance(RssVector({{"b1", 5}}), RssVector({{"b2", 5}}));
    FAIL("expected no-overlap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoOverlap);
  }
}

TEST_CASE("rss_distance properties against brute force") {
  ts::Gen g(42);
  int compared = 0;
  while (compared < 1000) {
    const auto a = ts::random_vector(g, 6);
    const auto b = ts::random_vector(g, 6);
    if (!ts::share_key(a.readings(), b.readings())) {
      CHECK_THROWS_AS(rss_distance(a, b), Error);
      continue;
    }
    ++compared;
    const double d = rss_distance(a, b);
    CHECK(d == rss_distance(b, a));
    CHECK(d >= 0.0);
    CHECK(rss_distance(a, a) == 0.0);
    CHECK(std::abs(d - ts::brute_distance(a.readings(), b.readings())) <= 1e-9);
  }
}

TEST_CASE("add_reference_point") {
  auto db = small_db();
  const auto id = add_reference_point(db, {3, 4}, batch({{"b1", {50, 52}}}));
  CHECK(db.reference_points().size() == 1);
  const auto* p = db.find_point(id);
  REQUIRE(p != nullptr);
  CHECK(p->position == Point{3, 4});
  CHECK(p->vector.get("b1").value() == doctest::Approx(51));
  CHECK_FALSE(p->subarea.has_value());

  try {
    add_reference_point(db, {3, 4}, batch({{"b1", {1}}}));
    FAIL("expected conflict");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConflict);
  }
  try {
    add_reference_point(db, {30, 4}, batch({{"b1", {1}}}));
    FAIL("expected invalid input");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidInput);
  }
  CHECK_THROWS_AS(add_reference_point(db, {5, 5}, batch({{"zz", {1}}})), Error);
  CHECK(db.reference_points().size() == 1);
}

TEST_CASE("seventy points") {
  auto db = FingerprintDatabase();
  db.set_bounds(Rect{0, 0, 41.5, 11.3});
  db.add_beacon(BeaconNode{"b1", {1, 1}, ""});
  for (int i = 0; i < 70; ++i) {
    add_reference_point(db, {0.5 + (i % 14) * 2.9, 1 + (i / 14) * 2.0}, batch({{"b1", {double(i)}}}));
  }
  CHECK(db.reference_points().size() == 70);
}

TEST_CASE("revision advances once per mutation") {
  auto db = small_db();
  const auto r0 = db.revision();
  const auto id = db.insert_point({1, 1}, RssVector({{"b1", 3}}));
  CHECK(db.revision() == r0 + 1);
  db.insert_subarea(Rect{0, 0, 5, 5}, FeatureSet{{{"b1", {3, 3}}}}, {id});
  CHECK(db.revision() == r0 + 2);
  CHECK(db.find_point(id)->subarea.value() == "A0001");
  db.clear_subareas();
  CHECK(db.revision() == r0 + 3);
  CHECK_FALSE(db.find_point(id)->subarea.has_value());
}

TEST_CASE("subarea insertion validates members and features") {
  auto db = small_db();
  const auto id = db.insert_point({8, 8}, RssVector({{"b1", 3}}));
  CHECK_THROWS_AS(db.insert_subarea(Rect{0, 0, 5, 5}, FeatureSet{}, {id}), Error);
  CHECK_THROWS_AS(db.insert_subarea(Rect{0, 0, 0, 5}, FeatureSet{}, {}), Error);
  CHECK_THROWS_AS(db.insert_subarea(Rect{0, 0, 5, 5}, FeatureSet{{{"b1", {4, 3}}}}, {}), Error);
  CHECK_THROWS_AS(db.insert_subarea(Rect{0, 0, 5, 5}, FeatureSet{{{"nope", {1, 3}}}}, {}), Error);
}

TEST_CASE("from_parts rejects dangling references") {
  std::vector<BeaconNode> beacons{{"b1", {0, 0}, ""}};
  std::vector<ReferencePoint> pts{{"r1", {1, 1}, RssVector({{"b1", 1}}), SubareaId("A9")}};
  CHECK_THROWS_AS(FingerprintDatabase::from_parts({}, Rect{0, 0, 5, 5}, beacons, pts, {}), Error);
  pts[0].subarea.reset();
  pts[0].vector = RssVector({{"b7", 1}});
  CHECK_THROWS_AS(FingerprintDatabase::from_parts({}, Rect{0, 0, 5, 5}, beacons, pts, {}), Error);
}
