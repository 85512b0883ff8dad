#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rssfp/rssfp.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitInternal = 2;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(rssfp_status s) {
  switch (s) {
    case RSSFP_ERR_INVALID_INPUT:
    case RSSFP_ERR_PARSE:
    case RSSFP_ERR_VERSION:
    case RSSFP_ERR_IO:
    case RSSFP_ERR_CONFLICT:
      return kExitConfig;
    default:
      return kExitInternal;
  }
}

void check(rssfp_status s, const char* what) {
  if (s != RSSFP_OK) {
    throw Failure{exit_code_for(s), std::string(what) + ": " + rssfp_status_string(s) + ": " +
                                        rssfp_last_error()};
  }
}

struct StringDeleter {
  void operator()(char* p) const { rssfp_string_free(p); }
};
using CString = std::unique_ptr<char, StringDeleter>;

struct ScenarioDeleter {
  void operator()(rssfp_scenario* p) const { rssfp_scenario_free(p); }
};
using ScenarioPtr = std::unique_ptr<rssfp_scenario, ScenarioDeleter>;

struct DatabaseDeleter {
  void operator()(rssfp_database* p) const { rssfp_database_free(p); }
};
using DatabasePtr = std::unique_ptr<rssfp_database, DatabaseDeleter>;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Failure{kExitConfig, "cannot write '" + path.string() + "'"};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitConfig, "cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{kExitConfig, "cannot create output directory '" + dir + "': " + ec.message()};
  return fs::path(dir);
}

ScenarioPtr load_scenario(const std::string& name) {
  rssfp_scenario* raw = nullptr;
  check(rssfp_scenario_resolve(name.c_str(), &raw), "scenario");
  return ScenarioPtr(raw);
}

struct Common {
  std::string scenario = "office";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int seeds = 1;
  std::string out = "out";
  std::string methods;
  std::vector<int> m;
  std::string segmentation;
};

std::vector<std::uint64_t> seed_list(const Common& c, const rssfp_scenario* sc) {
  std::uint64_t base = c.seed;
  if (!c.seed_given) check(rssfp_scenario_seed(sc, &base), "scenario seed");
  if (c.seeds < 1) throw Failure{kExitConfig, "--seeds must be >= 1"};
  std::vector<std::uint64_t> out;
  for (int i = 0; i < c.seeds; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

std::string run_harness(const Common& c, bool sweep, const std::string& default_methods,
                        ScenarioPtr& sc) {
  sc = load_scenario(c.scenario);
  const auto seeds = seed_list(c, sc.get());
  const std::string methods = c.methods.empty() ? default_methods : c.methods;
  rssfp_experiment cfg{};
  cfg.scenario = sc.get();
  cfg.methods = methods.c_str();
  cfg.segmentation = c.segmentation.empty() ? nullptr : c.segmentation.c_str();
  cfg.seeds = seeds.data();
  cfg.seed_count = seeds.size();
  cfg.reference_counts = c.m.empty() ? nullptr : c.m.data();
  cfg.reference_count_count = c.m.size();
  cfg.rbf_lambda = -1.0;
  char* csv = nullptr;
  check(sweep ? rssfp_sweep(&cfg, &csv) : rssfp_evaluate(&cfg, &csv), sweep ? "sweep" : "evaluate");
  return CString(csv).get();
}

std::string comparison(const std::vector<std::string>& csvs, const rssfp_scenario* sc) {
  std::vector<const char*> ptrs;
  for (const auto& s : csvs) ptrs.push_back(s.c_str());
  char* report = nullptr;
  check(rssfp_compare(ptrs.data(), ptrs.size(), sc, &report), "compare");
  return CString(report).get();
}

void add_common(CLI::App* cmd, Common& c, bool with_methods) {
  cmd->add_option("--scenario", c.scenario, "preset name (office, hall) or scenario file");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&c](const std::uint64_t& s) { c.seed = s; c.seed_given = true; },
      "base seed (default: the scenario's)");
  cmd->add_option("--seeds", c.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output directory");
  if (with_methods) {
    cmd->add_option("--method", c.methods, "comma-separated methods: 3NNF, KNN(k), RBF");
    cmd->add_option("--m", c.m, "reference point counts")->delimiter(',');
    cmd->add_option("--segmentation", c.segmentation, "auto, manual or none")
        ->check(CLI::IsMember({"auto", "manual", "none"}));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fingerprint indoor localization workbench"};
  app.require_subcommand(1);
  Common c;

  auto* survey = app.add_subcommand("survey", "simulate a reference-point survey");
  add_common(survey, c, false);
  survey->add_option("--m", c.m, "reference point count")->expected(1);

  std::string db_path;
  auto* segment = app.add_subcommand("segment", "divide a database into subareas automatically");
  add_common(segment, c, false);
  segment->add_option("--db", db_path, "database file (default: survey the scenario)");

  auto* evaluate = app.add_subcommand("evaluate", "estimate test points and report errors");
  add_common(evaluate, c, true);

  auto* sweep = app.add_subcommand("sweep", "error versus number of reference points");
  add_common(sweep, c, true);

  std::vector<std::string> inputs;
  auto* compare = app.add_subcommand("compare", "method comparison table");
  add_common(compare, c, true);
  compare->add_option("--in", inputs, "metrics CSV files (default: run an evaluation)");

  auto* segstudy = app.add_subcommand("segstudy", "automatic segmentation on hall and office");
  add_common(segstudy, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const fs::path out = prepare_out(c.out);
    if (survey->parsed()) {
      auto sc = load_scenario(c.scenario);
      if (!c.m.empty()) check(rssfp_scenario_set_reference_count(sc.get(), c.m.front()), "--m");
      const auto seeds = seed_list(c, sc.get());
      rssfp_database* raw = nullptr;
      check(rssfp_survey(sc.get(), seeds.front(), &raw), "survey");
      DatabasePtr db(raw);
      check(rssfp_database_save(db.get(), (out / "database.json").string().c_str()), "save");
      size_t m = 0;
      check(rssfp_database_point_count(db.get(), &m), "count");
      std::cout << "surveyed " << m << " reference points -> " << (out / "database.json").string() << "\n";
    } else if (segment->parsed()) {
      auto sc = load_scenario(c.scenario);
      const auto seeds = seed_list(c, sc.get());
      rssfp_database* raw = nullptr;
      if (db_path.empty()) {
        check(rssfp_survey(sc.get(), seeds.front(), &raw), "survey");
      } else {
        check(rssfp_database_load(db_path.c_str(), &raw), "load");
      }
      DatabasePtr db(raw);
      rssfp_segmentation_params params{};
      check(rssfp_scenario_segmentation(sc.get(), &params), "segmentation params");
      int success = 0;
      char* report = nullptr;
      check(rssfp_segment_auto(db.get(), &params, seeds.front(), &success, &report), "segment");
      write_file(out / "segment_failures.csv", CString(report).get());
      check(rssfp_database_save(db.get(), (out / "database.json").string().c_str()), "save");
      size_t u = 0;
      check(rssfp_database_subarea_count(db.get(), &u), "count");
      if (success) {
        std::cout << "segmentation succeeded: " << u << " subareas\n";
      } else {
        std::cout << "segmentation failed; see " << (out / "segment_failures.csv").string() << "\n";
      }
    } else if (evaluate->parsed() || sweep->parsed()) {
      const bool is_sweep = sweep->parsed();
      if (is_sweep && c.m.empty()) c.m = {20, 40, 60, 70};
      ScenarioPtr sc;
      const std::string csv = run_harness(c, is_sweep, is_sweep ? "3NNF,KNN(2)" : "3NNF,KNN(2),RBF", sc);
      const std::string name = is_sweep ? "sweep" : "metrics";
      write_file(out / (name + ".csv"), csv);
      const std::string report = comparison({csv}, sc.get());
      write_file(out / (name + "_report.txt"), report);
      std::cout << report;
    } else if (compare->parsed()) {
      ScenarioPtr sc;
      std::vector<std::string> csvs;
      if (inputs.empty()) {
        csvs.push_back(run_harness(c, false, "3NNF,KNN(2),RBF", sc));
      } else {
        sc = load_scenario(c.scenario);
        for (const auto& path : inputs) csvs.push_back(read_file(path));
      }
      const std::string report = comparison(csvs, sc.get());
      write_file(out / "compare.txt", report);
      std::cout << report;
    } else if (segstudy->parsed()) {
      auto sc = load_scenario(c.scenario);
      const auto seeds = seed_list(c, sc.get());
      char* outcomes = nullptr;
      char* ranges = nullptr;
      check(rssfp_segstudy(seeds.data(), seeds.size(), &outcomes, &ranges), "segstudy");
      CString o(outcomes), r(ranges);
      write_file(out / "segstudy.csv", o.get());
      write_file(out / "segstudy_ranges.csv", r.get());
      std::cout << o.get();
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
