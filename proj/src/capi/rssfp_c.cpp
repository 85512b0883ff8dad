#include "rssfp/rssfp.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "rssfp/database_io.hpp"
#include "rssfp/error.hpp"
#include "rssfp/estimator.hpp"
#include "rssfp/eval.hpp"
#include "rssfp/scenario_io.hpp"
#include "rssfp/segmentation.hpp"
#include "rssfp/simulator.hpp"

struct rssfp_scenario {
  rssfp::Scenario value;
};

struct rssfp_database {
  rssfp::FingerprintDatabase value;
};

struct rssfp_rbf_model {
  rssfp::RbfModel value;
};

namespace {

thread_local std::string g_last_error;

rssfp_status to_status(rssfp::ErrorCode code) {
  using rssfp::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidInput: return RSSFP_ERR_INVALID_INPUT;
    case ErrorCode::kNoOverlap: return RSSFP_ERR_NO_OVERLAP;
    case ErrorCode::kConflict: return RSSFP_ERR_CONFLICT;
    case ErrorCode::kParse: return RSSFP_ERR_PARSE;
    case ErrorCode::kVersion: return RSSFP_ERR_VERSION;
    case ErrorCode::kNumerical: return RSSFP_ERR_NUMERICAL;
    case ErrorCode::kUnlocatable: return RSSFP_ERR_UNLOCATABLE;
    case ErrorCode::kStaleState: return RSSFP_ERR_STALE_STATE;
    case ErrorCode::kIo: return RSSFP_ERR_IO;
    case ErrorCode::kInternal: return RSSFP_ERR_INTERNAL;
  }
  return RSSFP_ERR_INTERNAL;
}

template <typename F>
rssfp_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return RSSFP_OK;
  } catch (const rssfp::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RSSFP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RSSFP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return RSSFP_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw rssfp::Error(rssfp::ErrorCode::kInvalidInput, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

rssfp::RssVector vector_from(size_t n, const char* const* ids, const double* rss) {
  require(n == 0 || (ids && rss), "beacon ids and readings must not be null");
  rssfp::RssVector::Map map;
  for (size_t i = 0; i < n; ++i) {
    require(ids[i] != nullptr, "beacon id must not be null");
    map[ids[i]] = rss[i];
  }
  return rssfp::RssVector(std::move(map));
}

void fill_estimate(const rssfp::EstimationResult& r, rssfp_estimation* out) {
  out->x = r.position.x;
  out->y = r.position.y;
  out->fallback_used = r.fallback_used ? 1 : 0;
  out->candidates = r.candidates;
  std::memset(out->subarea, 0, sizeof out->subarea);
  if (r.subarea) std::strncpy(out->subarea, r.subarea->c_str(), sizeof out->subarea - 1);
}

rssfp::ExperimentConfig config_from(const rssfp_experiment* c) {
  require(c && c->scenario, "experiment config and scenario must not be null");
  require(c->seeds && c->seed_count > 0, "experiment needs at least one seed");
  rssfp::ExperimentConfig cfg;
  cfg.scenario = c->scenario->value;
  cfg.methods = rssfp::parse_method_list(c->methods ? c->methods : "3NNF");
  if (c->segmentation) cfg.segmentation = rssfp::parse_segmentation_mode(c->segmentation);
  cfg.seeds.assign(c->seeds, c->seeds + c->seed_count);
  if (c->reference_counts) {
    cfg.reference_counts.assign(c->reference_counts, c->reference_counts + c->reference_count_count);
  }
  cfg.queries = c->query_reference_points ? rssfp::QueryMode::kReferencePoints
                                          : rssfp::QueryMode::kTestPoints;
  if (c->rbf_lambda >= 0.0) cfg.rbf_lambda = c->rbf_lambda;
  return cfg;
}

}  // namespace

extern "C" {

const char* rssfp_last_error(void) { return g_last_error.c_str(); }

const char* rssfp_status_string(rssfp_status status) {
  switch (status) {
    case RSSFP_OK: return "ok";
    case RSSFP_ERR_INVALID_INPUT: return "invalid-input";
    case RSSFP_ERR_NO_OVERLAP: return "no-overlap";
    case RSSFP_ERR_CONFLICT: return "conflict";
    case RSSFP_ERR_PARSE: return "parse";
    case RSSFP_ERR_VERSION: return "version";
    case RSSFP_ERR_NUMERICAL: return "numerical";
    case RSSFP_ERR_UNLOCATABLE: return "unlocatable";
    case RSSFP_ERR_STALE_STATE: return "stale-state";
    case RSSFP_ERR_IO: return "io";
    case RSSFP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* rssfp_version(void) { return "1.0.0"; }

void rssfp_string_free(char* s) { std::free(s); }

rssfp_status rssfp_scenario_preset(const char* name, rssfp_scenario** out) {
  return guarded([&] {
    require(name && out, "null argument");
    *out = new rssfp_scenario{rssfp::preset_by_name(name)};
  });
}

rssfp_status rssfp_scenario_resolve(const char* name_or_path, rssfp_scenario** out) {
  return guarded([&] {
    require(name_or_path && out, "null argument");
    *out = new rssfp_scenario{rssfp::resolve_scenario(name_or_path)};
  });
}

void rssfp_scenario_free(rssfp_scenario* sc) { delete sc; }

rssfp_status rssfp_scenario_seed(const rssfp_scenario* sc, uint64_t* out) {
  return guarded([&] {
    require(sc && out, "null argument");
    *out = sc->value.seed;
  });
}

rssfp_status rssfp_scenario_set_reference_count(rssfp_scenario* sc, int m) {
  return guarded([&] {
    require(sc != nullptr, "null scenario");
    require(m >= 3, "reference count must be >= 3");
    sc->value.reference_count = m;
    sc->value.reference_points.clear();
  });
}

rssfp_status rssfp_scenario_set_sigma(rssfp_scenario* sc, double sigma) {
  return guarded([&] {
    require(sc != nullptr, "null scenario");
    require(sigma >= 0.0, "shadowing sigma must be >= 0");
    sc->value.propagation.shadowing_sigma = sigma;
  });
}

rssfp_status rssfp_scenario_segmentation(const rssfp_scenario* sc, rssfp_segmentation_params* out) {
  return guarded([&] {
    require(sc && out, "null argument");
    const auto& s = sc->value.segmentation;
    *out = rssfp_segmentation_params{s.margin, s.max_range_width, s.min_cell_size, s.max_iterations,
                                     s.min_points_per_subarea};
  });
}

rssfp_status rssfp_scenario_to_json(const rssfp_scenario* sc, char** out) {
  return guarded([&] {
    require(sc && out, "null argument");
    *out = dup_string(rssfp::scenario_to_json(sc->value));
  });
}

rssfp_status rssfp_survey(const rssfp_scenario* sc, uint64_t seed, rssfp_database** out) {
  return guarded([&] {
    require(sc && out, "null argument");
    *out = new rssfp_database{rssfp::survey(sc->value, seed)};
  });
}

rssfp_status rssfp_database_new(rssfp_database** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new rssfp_database{};
  });
}

void rssfp_database_free(rssfp_database* db) { delete db; }

rssfp_status rssfp_database_load(const char* path, rssfp_database** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new rssfp_database{rssfp::load_database_file(path)};
  });
}

rssfp_status rssfp_database_parse(const char* text, rssfp_database** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new rssfp_database{rssfp::load_database(text)};
  });
}

rssfp_status rssfp_database_save(const rssfp_database* db, const char* path) {
  return guarded([&] {
    require(db && path, "null argument");
    rssfp::save_database_file(db->value, path);
  });
}

rssfp_status rssfp_database_serialize(const rssfp_database* db, char** out) {
  return guarded([&] {
    require(db && out, "null argument");
    *out = dup_string(rssfp::save_database(db->value));
  });
}

rssfp_status rssfp_database_add_beacon(rssfp_database* db, const char* id, double x, double y) {
  return guarded([&] {
    require(db && id, "null argument");
    db->value.add_beacon(rssfp::BeaconNode{id, rssfp::Point{x, y}, ""});
  });
}

rssfp_status rssfp_database_add_point(rssfp_database* db, double x, double y, size_t n,
                                      const char* const* beacon_ids, const double* samples,
                                      char** id_out) {
  return guarded([&] {
    require(db != nullptr, "null database");
    require(n == 0 || (beacon_ids && samples), "null sample arrays");
    rssfp::RawSampleBatch batch;
    batch.point = rssfp::Point{x, y};
    for (size_t i = 0; i < n; ++i) {
      require(beacon_ids[i] != nullptr, "null beacon id");
      batch.samples[beacon_ids[i]].push_back(samples[i]);
    }
    const auto id = rssfp::add_reference_point(db->value, batch.point, batch);
    if (id_out) *id_out = dup_string(id);
  });
}

rssfp_status rssfp_database_point_count(const rssfp_database* db, size_t* out) {
  return guarded([&] {
    require(db && out, "null argument");
    *out = db->value.reference_points().size();
  });
}

rssfp_status rssfp_database_subarea_count(const rssfp_database* db, size_t* out) {
  return guarded([&] {
    require(db && out, "null argument");
    *out = db->value.subareas().size();
  });
}

rssfp_status rssfp_database_revision(const rssfp_database* db, uint64_t* out) {
  return guarded([&] {
    require(db && out, "null argument");
    *out = db->value.revision();
  });
}

rssfp_status rssfp_segment_auto(rssfp_database* db, const rssfp_segmentation_params* params,
                                uint64_t seed, int* success, char** report) {
  return guarded([&] {
    require(db && params && success, "null argument");
    rssfp::SegmentationParams p{params->margin, params->max_range_width, params->min_cell_size,
                                params->max_iterations, params->min_points_per_subarea};
    const auto outcome = rssfp::segment_auto(db->value, p, seed);
    *success = outcome.success ? 1 : 0;
    if (report) {
      std::string csv = "x0,y0,x1,y1,points,reason\n";
      for (const auto& f : outcome.failures) {
        csv += rssfp::format_double(f.region.x0) + ',' + rssfp::format_double(f.region.y0) + ',' +
               rssfp::format_double(f.region.x1) + ',' + rssfp::format_double(f.region.y1) + ',' +
               std::to_string(f.point_count) + ',' + f.reason + '\n';
      }
      *report = dup_string(csv);
    }
  });
}

rssfp_status rssfp_estimate(const rssfp_database* db, rssfp_method method, int k, double margin,
                            size_t n, const char* const* beacon_ids, const double* rss,
                            rssfp_estimation* out) {
  return guarded([&] {
    require(db && out, "null argument");
    const auto v = vector_from(n, beacon_ids, rss);
    rssfp::EstimatorParams params;
    params.margin = margin;
    switch (method) {
      case RSSFP_METHOD_3NNF: fill_estimate(rssfp::estimate_3nnf(db->value, v, params), out); break;
      case RSSFP_METHOD_KNN: fill_estimate(rssfp::estimate_knn(db->value, v, k), out); break;
      case RSSFP_METHOD_RBF: {
        const auto model = rssfp::train_rbf(db->value, 1e-3);
        fill_estimate(rssfp::estimate_rbf(model, v), out);
        break;
      }
      default: require(false, "unknown method");
    }
  });
}

rssfp_status rssfp_rbf_train(const rssfp_database* db, double lambda, rssfp_rbf_model** out) {
  return guarded([&] {
    require(db && out, "null argument");
    *out = new rssfp_rbf_model{rssfp::train_rbf(db->value, lambda)};
  });
}

void rssfp_rbf_free(rssfp_rbf_model* model) { delete model; }

rssfp_status rssfp_rbf_estimate(const rssfp_rbf_model* model, size_t n,
                                const char* const* beacon_ids, const double* rss,
                                rssfp_estimation* out) {
  return guarded([&] {
    require(model && out, "null argument");
    fill_estimate(rssfp::estimate_rbf(model->value, vector_from(n, beacon_ids, rss)), out);
  });
}

rssfp_status rssfp_evaluate(const rssfp_experiment* config, char** csv_out) {
  return guarded([&] {
    require(csv_out != nullptr, "null output");
    *csv_out = dup_string(rssfp::rows_to_csv(rssfp::run_experiment(config_from(config))));
  });
}

rssfp_status rssfp_sweep(const rssfp_experiment* config, char** csv_out) {
  return guarded([&] {
    require(csv_out != nullptr, "null output");
    *csv_out = dup_string(rssfp::rows_to_csv(rssfp::sweep_reference_points(config_from(config))));
  });
}

rssfp_status rssfp_compare(const char* const* csv_texts, size_t n, const rssfp_scenario* sc,
                           char** report_out) {
  return guarded([&] {
    require(sc && report_out, "null argument");
    require(n == 0 || csv_texts, "null csv list");
    std::vector<rssfp::MetricsRow> rows;
    for (size_t i = 0; i < n; ++i) {
      require(csv_texts[i] != nullptr, "null csv text");
      auto part = rssfp::rows_from_csv(csv_texts[i]);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    const auto bands = rssfp::compare_methods(rows, sc->value.floorplan.bounds);
    *report_out = dup_string(rssfp::render_comparison(bands));
  });
}

rssfp_status rssfp_segstudy(const uint64_t* seeds, size_t n, char** outcomes_csv,
                            char** ranges_csv) {
  return guarded([&] {
    require(seeds && n > 0, "segmentation study needs at least one seed");
    require(outcomes_csv && ranges_csv, "null output");
    const auto study = rssfp::segmentation_study({rssfp::preset_hall(), rssfp::preset_office()},
                                                 std::vector<std::uint64_t>(seeds, seeds + n));
    *outcomes_csv = dup_string(rssfp::study_outcomes_csv(study));
    *ranges_csv = dup_string(rssfp::study_ranges_csv(study));
  });
}

}  // extern "C"
