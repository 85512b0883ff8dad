#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rssfp/estimator.hpp"
#include "rssfp/simulator.hpp"

namespace httplib {
class Server;
}

namespace rssfp {

struct WorkbenchOptions {
  std::chrono::milliseconds step_interval{500};  // 2 Hz
  double walk_step = 1.0;                        // meters, unless the request sets one
};

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

/// A walk queued by POST /api/walk and consumed by one stream.
struct WalkRun {
  std::uint64_t id = 0;
  FingerprintDatabase db;  // snapshot at walk start
  std::vector<WalkSample> samples;
  double margin = 2.0;
  double threshold = 0.0;
};

/// Operator session behind the HTTP facade. Every handler takes the request
/// body and returns status + JSON; mutations serialize on one mutex and bump
/// the revision exactly once.
class WorkbenchSession {
 public:
  WorkbenchSession(Scenario scenario, std::uint64_t seed, WorkbenchOptions options = {});

  HttpReply floorplan() const;
  HttpReply collect(std::string_view body);
  HttpReply segment_check(std::string_view body) const;
  HttpReply segment_commit(std::string_view body);
  HttpReply segment_auto(std::string_view body);
  HttpReply start_walk(std::string_view body);
  HttpReply save(std::string_view body) const;
  HttpReply load(std::string_view body);

  /// Claims the pending walk for streaming; nullopt when none is pending or
  /// one is already streaming.
  std::shared_ptr<WalkRun> claim_walk();
  void finish_walk(std::uint64_t id);

  std::uint64_t revision() const;
  FingerprintDatabase snapshot() const;
  const WorkbenchOptions& options() const { return options_; }

 private:
  Scenario scenario_;
  std::uint64_t seed_;
  WorkbenchOptions options_;

  mutable std::mutex mu_;
  FingerprintDatabase db_;
  std::uint64_t revision_ = 0;
  std::uint64_t collects_ = 0;
  std::uint64_t walks_ = 0;
  std::shared_ptr<WalkRun> pending_walk_;
  bool streaming_ = false;
};

/// Formats one stream event for step i of the run, continuing from previous.
/// Used by the stream endpoint; exposed for tests.
struct StepOutcome {
  std::string event;  // complete text/event-stream frame
  std::optional<EstimationResult> estimate;
  double error = 0.0;
};
StepOutcome walk_step_event(const WalkRun& run, std::size_t i,
                            const std::optional<EstimationResult>& previous, bool debug);
std::string walk_summary_event(std::size_t steps, double mean_error);

/// Registers the /api routes and, when static_dir is non-empty, serves it at /.
void mount_workbench(httplib::Server& server, WorkbenchSession& session,
                     const std::string& static_dir = "");

}  // namespace rssfp
