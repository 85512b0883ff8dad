#include "rssfp/workbench.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "rssfp/database_io.hpp"
#include "rssfp/error.hpp"
#include "rssfp/segmentation.hpp"

namespace rssfp {

using nlohmann::json;

namespace {

HttpReply reply(int status, const json& body) { return HttpReply{status, body.dump()}; }

HttpReply error_reply(int status, const std::string& message, const char* code = nullptr) {
  json body{{"error", message}};
  if (code) body["code"] = code;
  return reply(status, body);
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kParse:
    case ErrorCode::kVersion:
    case ErrorCode::kNoOverlap:
      return 400;
    case ErrorCode::kConflict:
    case ErrorCode::kStaleState:
      return 409;
    case ErrorCode::kUnlocatable:
      return 422;
    default:
      return 500;
  }
}

HttpReply from_error(const Error& e) { return error_reply(status_for(e.code()), e.what(), to_string(e.code())); }

struct BadRequest {
  std::string message;
};

json parse_body(std::string_view body, bool allow_empty = false) {
  if (allow_empty && body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  try {
    json j = json::parse(body.begin(), body.end());
    if (!j.is_object()) throw BadRequest{"request body must be a JSON object"};
    return j;
  } catch (const json::parse_error& e) {
    throw BadRequest{std::string("malformed JSON: ") + e.what()};
  }
}

double number_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw BadRequest{std::string("'") + key + "' must be a number"};
  return it->get<double>();
}

Rect rect_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array() || it->size() != 4) {
    throw BadRequest{std::string("'") + key + "' must be [x0, y0, x1, y1]"};
  }
  for (const auto& v : *it) {
    if (!v.is_number()) throw BadRequest{std::string("'") + key + "' entries must be numbers"};
  }
  return Rect{(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>(), (*it)[3].get<double>()};
}

json rect_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

json feature_json(const FeatureSet& f) {
  json out = json::array();
  for (const auto& [id, range] : f.ranges) out.push_back({{"beacon", id}, {"lo", range.lo}, {"hi", range.hi}});
  return out;
}

json point_json(const ReferencePoint& p) {
  json readings = json::array();
  for (const auto& [id, v] : p.vector.readings()) readings.push_back({{"beacon", id}, {"rss", v}});
  return {{"id", p.id},
          {"x", p.position.x},
          {"y", p.position.y},
          {"readings", std::move(readings)},
          {"subarea", p.subarea ? json(*p.subarea) : json(nullptr)}};
}

json subarea_json(const Subarea& s) {
  return {{"id", s.id}, {"rect", rect_json(s.region)}, {"feature", feature_json(s.feature)}};
}

json verdict_json(const SegmentationVerdict& v) {
  return {{"accepted", v.accepted},
          {"reason", v.reason_text()},
          {"conflicting", v.conflicting ? json(*v.conflicting) : json(nullptr)},
          {"rect", rect_json(v.region)},
          {"members", v.members},
          {"feature", feature_json(v.feature)},
          {"revision", v.revision}};
}

SegmentationParams params_from(const json& j, SegmentationParams p) {
  if (j.contains("margin")) p.margin = number_field(j, "margin");
  if (j.contains("max_range_width")) p.max_range_width = number_field(j, "max_range_width");
  if (j.contains("min_cell_size")) p.min_cell_size = number_field(j, "min_cell_size");
  if (j.contains("max_iterations")) p.max_iterations = static_cast<int>(number_field(j, "max_iterations"));
  if (j.contains("min_points_per_subarea")) {
    p.min_points_per_subarea = static_cast<int>(number_field(j, "min_points_per_subarea"));
  }
  return p;
}

template <typename F>
HttpReply handle(F&& f) {
  try {
    return f();
  } catch (const BadRequest& e) {
    return error_reply(400, e.message);
  } catch (const Error& e) {
    return from_error(e);
  } catch (const json::exception& e) {
    return error_reply(400, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what(), "internal");
  }
}

}  // namespace

WorkbenchSession::WorkbenchSession(Scenario scenario, std::uint64_t seed, WorkbenchOptions options)
    : scenario_(std::move(scenario)), seed_(seed), options_(options) {
  scenario_.validate();
  db_.set_meta(DatabaseMeta{scenario_.name, "", 1});
  db_.set_bounds(scenario_.floorplan.bounds);
  for (const auto& b : scenario_.beacons) db_.add_beacon(b);
}

std::uint64_t WorkbenchSession::revision() const {
  std::lock_guard lock(mu_);
  return revision_;
}

FingerprintDatabase WorkbenchSession::snapshot() const {
  std::lock_guard lock(mu_);
  return db_;
}

HttpReply WorkbenchSession::floorplan() const {
  return handle([&] {
    std::lock_guard lock(mu_);
    json walls = json::array();
    for (const auto& w : scenario_.floorplan.walls) {
      walls.push_back({{"a", {w.segment.a.x, w.segment.a.y}},
                       {"b", {w.segment.b.x, w.segment.b.y}},
                       {"attenuation", w.attenuation}});
    }
    json beacons = json::array();
    for (const auto& b : db_.beacons()) {
      beacons.push_back({{"id", b.id}, {"x", b.position.x}, {"y", b.position.y}, {"tx_label", b.tx_label}});
    }
    json points = json::array();
    for (const auto& p : db_.reference_points()) points.push_back(point_json(p));
    json subareas = json::array();
    for (const auto& s : db_.subareas()) subareas.push_back(subarea_json(s));
    return reply(200, {{"name", scenario_.floorplan.name},
                       {"bounds", rect_json(scenario_.floorplan.bounds)},
                       {"walls", std::move(walls)},
                       {"beacons", std::move(beacons)},
                       {"reference_points", std::move(points)},
                       {"subareas", std::move(subareas)},
                       {"revision", revision_}});
  });
}

HttpReply WorkbenchSession::collect(std::string_view body) {
  return handle([&] {
    const json req = parse_body(body);
    const Point p{number_field(req, "x"), number_field(req, "y")};
    std::lock_guard lock(mu_);
    if (!is_finite(p) || !scenario_.floorplan.bounds.contains_closed(p)) {
      return error_reply(422, "point lies outside the floor", "invalid-input");
    }
    RssVector v = sample_vector(scenario_, p, StreamPurpose::kCollect, collects_, seed_);
    if (v.empty()) return error_reply(422, "no beacon is in range at this point", "invalid-input");
    ReferencePointId id;
    try {
      id = db_.insert_point(p, std::move(v));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConflict) return error_reply(409, e.what(), "conflict");
      throw;
    }
    ++collects_;
    ++revision_;
    json out = point_json(*db_.find_point(id));
    out["revision"] = revision_;
    return reply(200, out);
  });
}

HttpReply WorkbenchSession::segment_check(std::string_view body) const {
  return handle([&] {
    const json req = parse_body(body);
    const Rect r = rect_field(req, "rect");
    std::lock_guard lock(mu_);
    SegmentationVerdict v = segment_manual_check(db_, r, scenario_.segmentation);
    json out = verdict_json(v);
    out["revision"] = revision_;
    return reply(200, out);
  });
}

HttpReply WorkbenchSession::segment_commit(std::string_view body) {
  return handle([&] {
    const json req = parse_body(body);
    const Rect r = rect_field(req, "rect");
    auto it = req.find("revision");
    if (it == req.end() || !it->is_number_unsigned()) throw BadRequest{"'revision' must be a non-negative integer"};
    const auto observed = it->get<std::uint64_t>();
    std::lock_guard lock(mu_);
    if (observed != revision_) {
      return reply(409, {{"error", "stale revision"}, {"code", "conflict"}, {"revision", revision_}});
    }
    const CommitResult res = commit_region(db_, r, db_.revision(), scenario_.segmentation);
    if (!res.id) {
      json out = verdict_json(res.verdict);
      out["revision"] = revision_;
      out["error"] = "region rejected: " + res.verdict.reason_text();
      return reply(422, out);
    }
    ++revision_;
    return reply(200, {{"subarea", subarea_json(*db_.find_subarea(*res.id))},
                       {"members", res.verdict.members},
                       {"revision", revision_}});
  });
}

HttpReply WorkbenchSession::segment_auto(std::string_view body) {
  return handle([&] {
    const json req = parse_body(body, true);
    std::lock_guard lock(mu_);
    SegmentationParams params = scenario_.segmentation;
    if (auto it = req.find("params"); it != req.end()) {
      if (!it->is_object()) throw BadRequest{"'params' must be an object"};
      params = params_from(*it, params);
    }
    std::uint64_t seed = seed_;
    if (auto it = req.find("seed"); it != req.end()) {
      if (!it->is_number_unsigned()) throw BadRequest{"'seed' must be a non-negative integer"};
      seed = it->get<std::uint64_t>();
    }
    const SegmentationOutcome out = rssfp::segment_auto(db_, params, seed);
    if (!out.success) {
      json failures = json::array();
      for (const auto& f : out.failures) {
        failures.push_back({{"rect", rect_json(f.region)}, {"reason", f.reason}, {"points", f.point_count}});
      }
      return reply(200, {{"success", false},
                         {"failures", std::move(failures)},
                         {"iterations", out.iterations},
                         {"revision", revision_}});
    }
    ++revision_;
    json subareas = json::array();
    for (const auto& s : out.subareas) subareas.push_back(subarea_json(s));
    return reply(200, {{"success", true},
                       {"subareas", std::move(subareas)},
                       {"iterations", out.iterations},
                       {"revision", revision_}});
  });
}

HttpReply WorkbenchSession::start_walk(std::string_view body) {
  return handle([&] {
    const json req = parse_body(body);
    auto it = req.find("waypoints");
    if (it == req.end() || !it->is_array()) throw BadRequest{"'waypoints' must be an array of [x, y]"};
    std::vector<Point> waypoints;
    for (const auto& w : *it) {
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
        throw BadRequest{"each waypoint must be [x, y]"};
      }
      waypoints.push_back(Point{w[0].get<double>(), w[1].get<double>()});
    }
    const double step = req.contains("step") ? number_field(req, "step") : options_.walk_step;

    std::lock_guard lock(mu_);
    if (db_.subareas().empty()) return error_reply(409, "database is not segmented", "conflict");
    if (pending_walk_ || streaming_) return error_reply(409, "a walk is already live", "conflict");
    auto run = std::make_shared<WalkRun>();
    try {
      run->samples = walk(scenario_, waypoints, step, seed_ + walks_);
    } catch (const Error& e) {
      return error_reply(422, e.what(), to_string(e.code()));
    }
    run->id = ++walks_;
    run->db = db_;
    run->margin = scenario_.segmentation.margin;
    run->threshold = default_reacquire_threshold(db_);
    pending_walk_ = run;
    return reply(200, {{"walk_id", run->id}, {"steps", run->samples.size()}});
  });
}

std::shared_ptr<WalkRun> WorkbenchSession::claim_walk() {
  std::lock_guard lock(mu_);
  if (!pending_walk_ || streaming_) return nullptr;
  streaming_ = true;
  auto run = std::move(pending_walk_);
  pending_walk_.reset();
  return run;
}

void WorkbenchSession::finish_walk(std::uint64_t id) {
  (void)id;
  std::lock_guard lock(mu_);
  streaming_ = false;
}

HttpReply WorkbenchSession::save(std::string_view body) const {
  return handle([&] {
    const json req = parse_body(body, true);
    std::string text;
    {
      std::lock_guard lock(mu_);
      text = save_database(db_);
    }
    if (auto it = req.find("path"); it != req.end()) {
      if (!it->is_string()) throw BadRequest{"'path' must be a string"};
      write_text_file(it->get<std::string>(), text);
    }
    return HttpReply{200, std::move(text)};
  });
}

HttpReply WorkbenchSession::load(std::string_view body) {
  return handle([&] {
    const json req = parse_body(body);
    std::string text;
    if (req.contains("version")) {
      text = std::string(body);
    } else if (auto it = req.find("path"); it != req.end() && it->is_string()) {
      try {
        text = read_text_file(it->get<std::string>());
      } catch (const Error& e) {
        return error_reply(400, e.what(), to_string(e.code()));
      }
    } else {
      throw BadRequest{"body must be a database document or {\"path\": ...}"};
    }
    FingerprintDatabase loaded = load_database(text);
    std::lock_guard lock(mu_);
    db_ = std::move(loaded);
    revision_ = 0;
    return reply(200, {{"revision", revision_},
                       {"reference_points", db_.reference_points().size()},
                       {"subareas", db_.subareas().size()}});
  });
}

StepOutcome walk_step_event(const WalkRun& run, std::size_t i,
                            const std::optional<EstimationResult>& previous, bool debug) {
  const WalkSample& s = run.samples.at(i);
  StepOutcome out;
  json ev{{"step", i}, {"t", s.t}};
  if (debug) ev["truth"] = {{"x", s.position.x}, {"y", s.position.y}};
  try {
    if (s.vector.empty()) throw Error(ErrorCode::kUnlocatable, "no beacon in range");
    EstimatorParams params;
    params.margin = run.margin;
    params.reacquire_threshold = run.threshold;
    EstimationResult est = previous && previous->subarea
                               ? estimate_tracked(run.db, s.vector, *previous, params)
                               : estimate_3nnf(run.db, s.vector, params);
    out.error = distance(est.position, s.position);
    ev["estimate"] = {{"x", est.position.x}, {"y", est.position.y}};
    ev["subarea"] = est.subarea ? json(*est.subarea) : json(nullptr);
    ev["candidates"] = est.candidates;
    ev["fallback"] = est.fallback_used;
    out.estimate = std::move(est);
  } catch (const Error& e) {
    ev["error"] = e.what();
  }
  out.event = "event: step\ndata: " + ev.dump() + "\n\n";
  return out;
}

std::string walk_summary_event(std::size_t steps, double mean_error) {
  json ev{{"steps", steps}, {"mean_error", mean_error}};
  return "event: summary\ndata: " + ev.dump() + "\n\n";
}

namespace {

void send(httplib::Response& res, const HttpReply& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

struct StreamState {
  std::shared_ptr<WalkRun> run;
  std::size_t next = 0;
  std::optional<EstimationResult> previous;
  double error_sum = 0.0;
  std::size_t located = 0;
  bool debug = false;
};

}  // namespace

void mount_workbench(httplib::Server& server, WorkbenchSession& session, const std::string& static_dir) {
  server.Get("/api/floorplan", [&](const httplib::Request&, httplib::Response& res) {
    send(res, session.floorplan());
  });
  server.Post("/api/collect", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, session.collect(req.body));
  });
  server.Post("/api/segment/check", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, session.segment_check(req.body));
  });
  server.Post("/api/segment/commit", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, session.segment_commit(req.body));
  });
  server.Post("/api/segment/auto", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, session.segment_auto(req.body));
  });
  server.Post("/api/walk", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, session.start_walk(req.body));
  });
  server.Post("/api/database/save", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, session.save(req.body));
  });
  server.Post("/api/database/load", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, session.load(req.body));
  });

  server.Get("/api/walk/stream", [&](const httplib::Request& req, httplib::Response& res) {
    auto run = session.claim_walk();
    if (!run) {
      send(res, error_reply(409, "no pending walk to stream", "conflict"));
      return;
    }
    auto state = std::make_shared<StreamState>();
    state->run = run;
    state->debug = req.has_param("debug") && req.get_param_value("debug") == "true";
    const auto interval = session.options().step_interval;
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [state, interval](std::size_t, httplib::DataSink& sink) {
          if (state->next > 0 && interval.count() > 0) std::this_thread::sleep_for(interval);
          if (state->next < state->run->samples.size()) {
            StepOutcome step = walk_step_event(*state->run, state->next, state->previous, state->debug);
            if (step.estimate) {
              state->previous = std::move(step.estimate);
              state->error_sum += step.error;
              ++state->located;
            }
            ++state->next;
            return sink.write(step.event.data(), step.event.size());
          }
          const double mean = state->located ? state->error_sum / static_cast<double>(state->located) : 0.0;
          const std::string summary = walk_summary_event(state->run->samples.size(), mean);
          const bool ok = sink.write(summary.data(), summary.size());
          sink.done();
          return ok;
        },
        [&session, id = run->id](bool) { session.finish_walk(id); });
  });

  if (!static_dir.empty()) server.set_mount_point("/", static_dir);
}

}  // namespace rssfp
