#include <csignal>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

// Eigen must precede httplib: resolv.h defines _res as a macro.
#include "rssfp/error.hpp"
#include "rssfp/scenario_io.hpp"
#include "rssfp/workbench.hpp"

#include <CLI11.hpp>
#include <httplib.h>

namespace {
httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration and tracking workbench service"};
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string scenario_name = "hall";
  std::optional<std::uint64_t> seed;
  std::string static_dir;
  int cadence_ms = 500;
  app.add_option("--port", port, "listen port")->check(CLI::Range(0, 65535));
  app.add_option("--host", host, "listen address");
  app.add_option("--scenario", scenario_name, "preset name (office, hall) or scenario file");
  app.add_option("--seed", seed, "simulation seed (default: the scenario's)");
  app.add_option("--static", static_dir, "directory served at /")->check(CLI::ExistingDirectory);
  app.add_option("--cadence-ms", cadence_ms, "walk stream step interval")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    rssfp::Scenario sc = rssfp::resolve_scenario(scenario_name);
    rssfp::WorkbenchOptions options;
    options.step_interval = std::chrono::milliseconds(cadence_ms);
    rssfp::WorkbenchSession session(sc, seed.value_or(sc.seed), options);

    httplib::Server server;
    rssfp::mount_workbench(server, session, static_dir);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    int bound = port;
    if (port == 0) {
      bound = server.bind_to_any_port(host);
    } else if (!server.bind_to_port(host, port)) {
      bound = -1;
    }
    if (bound < 0) {
      std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
      return 1;
    }
    std::cout << "workbench listening on http://" << host << ":" << bound << " (scenario "
              << sc.name << ")" << std::endl;
    server.listen_after_bind();
  } catch (const rssfp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
