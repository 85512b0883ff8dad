#include <doctest.h>

#include <nlohmann/json.hpp>
#include <thread>

// Eigen must precede httplib: resolv.h defines _res as a macro.
#include "rssfp/database_io.hpp"
#include "rssfp/simulator.hpp"
#include "rssfp/workbench.hpp"

#include <httplib.h>

using namespace rssfp;
using nlohmann::json;

namespace {

struct Harness {
  Scenario scenario;
  WorkbenchSession session;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit Harness(Scenario sc)
      : scenario(sc), session(sc, sc.seed, WorkbenchOptions{std::chrono::milliseconds(2), 1.0}) {
    mount_workbench(server, session);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~Harness() {
    server.stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(10, 0);
    return c;
  }

  httplib::Result post(const std::string& path, const json& body) {
    return client().Post(path, body.dump(), "application/json");
  }
  httplib::Result post_raw(const std::string& path, const std::string& body) {
    return client().Post(path, body, "application/json");
  }
  json get_json(const std::string& path) {
    auto r = client().Get(path);
    REQUIRE(r);
    return json::parse(r->body);
  }
};

Scenario quiet_hall() {
  auto sc = preset_hall();
  sc.propagation.shadowing_sigma = 0;
  return sc;
}

std::vector<json> parse_events(const std::string& stream, std::vector<std::string>& kinds) {
  std::vector<json> out;
  std::size_t pos = 0;
  while ((pos = stream.find("event: ", pos)) != std::string::npos) {
    const auto eol = stream.find('\n', pos);
    kinds.push_back(stream.substr(pos + 7, eol - pos - 7));
    const auto data = stream.find("data: ", eol);
    const auto end = stream.find("\n\n", data);
    out.push_back(json::parse(stream.substr(data + 6, end - data - 6)));
    pos = end;
  }
  return out;
}

}  // namespace

TEST_CASE("floorplan of a fresh session") {
  Harness h(quiet_hall());
  const auto fp = h.get_json("/api/floorplan");
  CHECK(fp["reference_points"].empty());
  CHECK(fp["beacons"].size() == 5);
  CHECK(fp["bounds"] == json::array({0.0, 0.0, 30.5, 11.3}));
  CHECK(fp["revision"] == 0);
}

TEST_CASE("collect") {
  Harness h(quiet_hall());
  auto r = h.post("/api/collect", {{"x", 5.0}, {"y", 5.0}});
  REQUIRE(r);
  CHECK(r->status == 200);
  const auto a = json::parse(r->body);
  CHECK(a["revision"] == 1);
  CHECK(h.get_json("/api/floorplan")["reference_points"].size() == 1);

  const auto b = json::parse(h.post("/api/collect", {{"x", 6.0}, {"y", 5.0}})->body);
  CHECK(b["revision"] == 2);
  const auto db = h.session.snapshot();
  for (const auto& p : db.reference_points()) {
    for (const auto& bc : h.scenario.beacons) {
      CHECK(p.vector.get(bc.id).value() ==
            doctest::Approx(mean_rss(h.scenario.floorplan, h.scenario.propagation, bc, p.position)));
    }
  }
  CHECK(db.reference_points()[0].vector != db.reference_points()[1].vector);

  CHECK(h.post("/api/collect", {{"x", 5.0}, {"y", 5.0}})->status == 409);
  CHECK(h.post("/api/collect", {{"x", 50.0}, {"y", 5.0}})->status == 422);
  CHECK(h.post_raw("/api/collect", "{oops")->status == 400);
  CHECK(h.post("/api/collect", {{"x", "five"}})->status == 400);
  CHECK(h.session.revision() == 2);
}

TEST_CASE("segment check, commit, auto") {
  Harness h(quiet_hall());
  for (double x : {2.0, 3.0, 4.0}) h.post("/api/collect", {{"x", x}, {"y", 2.0}});
  for (double x : {26.0, 27.0, 28.0}) h.post("/api/collect", {{"x", x}, {"y", 9.0}});
  const auto before = save_database(h.session.snapshot());

  auto r = h.post("/api/segment/check", {{"rect", {0, 0, 6, 4}}});
  REQUIRE(r->status == 200);
  auto v = json::parse(r->body);
  CHECK(v["accepted"] == true);
  CHECK(v["reason"] == "ok");
  CHECK(v["feature"].size() == 5);

  v = json::parse(h.post("/api/segment/check", {{"rect", {10, 5, 12, 6}}})->body);
  CHECK(v["accepted"] == false);
  CHECK(v["reason"] == "too-few-points");
  CHECK(save_database(h.session.snapshot()) == before);
  CHECK(h.session.revision() == 6);

  CHECK(h.post("/api/segment/check", {{"rect", {0, 0, 6}}})->status == 400);
  CHECK(h.post("/api/segment/check", {{"rect", {6, 0, 0, 4}}})->status == 400);

  CHECK(h.post("/api/segment/commit", {{"rect", {0, 0, 6, 4}}, {"revision", 5}})->status == 409);
  r = h.post("/api/segment/commit", {{"rect", {0, 0, 6, 4}}, {"revision", 6}});
  REQUIRE(r->status == 200);
  const auto committed = json::parse(r->body);
  CHECK(committed["revision"] == 7);
  CHECK(committed["members"].size() == 3);
  const auto first_id = committed["subarea"]["id"].get<std::string>();

  // Overlapping the committed region.
  r = h.post("/api/segment/commit", {{"rect", {1, 0, 7, 4}}, {"revision", 7}});
  CHECK(r->status == 422);
  CHECK(json::parse(r->body)["reason"] == "not-distinct-from:" + first_id);
  CHECK(h.session.revision() == 7);

  SUBCASE("auto on the hall preset") {
    Harness full(quiet_hall());
    const auto g = grid_points(full.scenario.floorplan.bounds, 60);
    for (const auto& p : g) full.post("/api/collect", {{"x", p.x}, {"y", p.y}});
    const auto res = json::parse(full.post_raw("/api/segment/auto", "")->body);
    CHECK(res["success"] == true);
    CHECK(res["subareas"].size() >= 4);
    CHECK(res["revision"] == 61);
  }
}

TEST_CASE("auto failure is reported without mutation") {
  Harness h(preset_office());
  for (const auto& p : grid_points(h.scenario.floorplan.bounds, 70)) h.post("/api/collect", {{"x", p.x}, {"y", p.y}});
  const auto res = json::parse(h.post_raw("/api/segment/auto", "{}")->body);
  CHECK(res["success"] == false);
  CHECK_FALSE(res["failures"].empty());
  CHECK(res["revision"] == 70);
  CHECK(h.session.snapshot().subareas().empty());
}

TEST_CASE("walk streaming") {
  Harness h(quiet_hall());
  CHECK(h.post("/api/walk", {{"waypoints", {{2, 5}, {12, 5}}}})->status == 409);

  for (const auto& p : grid_points(h.scenario.floorplan.bounds, 60)) h.post("/api/collect", {{"x", p.x}, {"y", p.y}});
  REQUIRE(json::parse(h.post_raw("/api/segment/auto", "")->body)["success"] == true);

  CHECK(h.post("/api/walk", {{"waypoints", json::array()}})->status == 422);
  CHECK(h.post("/api/walk", {{"waypoints", "nope"}})->status == 400);

  auto r = h.post("/api/walk", {{"waypoints", {{2, 5}, {12, 5}}}, {"step", 1.0}});
  REQUIRE(r->status == 200);
  CHECK(json::parse(r->body)["steps"] == 11);
  CHECK(h.post("/api/walk", {{"waypoints", {{2, 5}, {12, 5}}}})->status == 409);

  auto s = h.client().Get("/api/walk/stream?debug=true");
  REQUIRE(s);
  CHECK(s->get_header_value("Content-Type") == "text/event-stream");
  std::vector<std::string> kinds;
  const auto events = parse_events(s->body, kinds);
  REQUIRE(events.size() == 12);
  for (int i = 0; i < 11; ++i) {
    CHECK(kinds[i] == "step");
    CHECK(events[i]["step"] == i);
    CHECK(events[i].contains("estimate"));
    CHECK(events[i].contains("truth"));
  }
  CHECK(kinds[11] == "summary");
  CHECK(events[11]["steps"] == 11);
  CHECK(events[11]["mean_error"].get<double>() >= 0.0);

  CHECK(h.client().Get("/api/walk/stream")->status == 409);
}

TEST_CASE("stationary zero-noise walk at a reference point is exact") {
  Harness h(quiet_hall());
  for (const auto& p : grid_points(h.scenario.floorplan.bounds, 60)) h.post("/api/collect", {{"x", p.x}, {"y", p.y}});
  REQUIRE(json::parse(h.post_raw("/api/segment/auto", "")->body)["success"] == true);
  const auto at = h.session.snapshot().reference_points()[7].position;
  REQUIRE(h.post("/api/walk", {{"waypoints", {{at.x, at.y}, {at.x, at.y}}}})->status == 200);
  std::vector<std::string> kinds;
  const auto events = parse_events(h.client().Get("/api/walk/stream")->body, kinds);
  REQUIRE(events.size() >= 2);
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    CHECK(events[i]["estimate"]["x"] == at.x);
    CHECK(events[i]["estimate"]["y"] == at.y);
    CHECK_FALSE(events[i].contains("truth"));
  }
  CHECK(events.back()["mean_error"] == 0.0);
}

TEST_CASE("save and load") {
  Harness h(quiet_hall());
  for (double x : {2.0, 3.0, 4.0}) h.post("/api/collect", {{"x", x}, {"y", 2.0}});
  const auto saved = h.post_raw("/api/database/save", "");
  REQUIRE(saved->status == 200);
  CHECK(h.post_raw("/api/database/save", "")->body == saved->body);

  auto r = h.post_raw("/api/database/load", saved->body);
  REQUIRE(r->status == 200);
  CHECK(json::parse(r->body)["revision"] == 0);
  CHECK(h.session.revision() == 0);
  CHECK(h.session.snapshot() == load_database(saved->body));

  const auto truncated = saved->body.substr(0, saved->body.size() / 2);
  r = h.post_raw("/api/database/load", truncated);
  CHECK(r->status == 400);
  r = h.post_raw("/api/database/load", R"({"version":1,"beacons":[{"id":"b1"}],"reference_points":[],"subareas":[]})");
  CHECK(r->status == 400);
  CHECK(json::parse(r->body)["error"].get<std::string>().find("$.beacons[0]") != std::string::npos);

  const std::string path = "/tmp/rssfp_service_test_db.json";
  CHECK(h.post("/api/database/save", {{"path", path}})->status == 200);
  h.post("/api/collect", {{"x", 9.0}, {"y", 9.0}});
  r = h.post("/api/database/load", {{"path", path}});
  CHECK(r->status == 200);
  CHECK(h.session.snapshot().reference_points().size() == 3);
  CHECK(h.post("/api/database/load", {{"path", "/nonexistent/x.json"}})->status == 400);
}
