#ifndef RSSFP_RSSFP_H
#define RSSFP_RSSFP_H

#include <stddef.h>
#include <stdint.h>

#if defined(RSSFP_BUILDING)
#define RSSFP_API __attribute__((visibility("default")))
#else
#define RSSFP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rssfp_status {
  RSSFP_OK = 0,
  RSSFP_ERR_INVALID_INPUT = 1,
  RSSFP_ERR_NO_OVERLAP = 2,
  RSSFP_ERR_CONFLICT = 3,
  RSSFP_ERR_PARSE = 4,
  RSSFP_ERR_VERSION = 5,
  RSSFP_ERR_NUMERICAL = 6,
  RSSFP_ERR_UNLOCATABLE = 7,
  RSSFP_ERR_STALE_STATE = 8,
  RSSFP_ERR_IO = 9,
  RSSFP_ERR_INTERNAL = 10
} rssfp_status;

typedef struct rssfp_scenario rssfp_scenario;
typedef struct rssfp_database rssfp_database;
typedef struct rssfp_rbf_model rssfp_rbf_model;

typedef enum rssfp_method {
  RSSFP_METHOD_3NNF = 0,
  RSSFP_METHOD_KNN = 1,
  RSSFP_METHOD_RBF = 2
} rssfp_method;

typedef struct rssfp_segmentation_params {
  double margin;
  double max_range_width;
  double min_cell_size;
  int max_iterations;
  int min_points_per_subarea;
} rssfp_segmentation_params;

typedef struct rssfp_estimation {
  double x;
  double y;
  int fallback_used;
  size_t candidates;
  char subarea[64]; /* empty when the method has no subarea stage */
} rssfp_estimation;

typedef struct rssfp_experiment {
  const rssfp_scenario* scenario;
  const char* methods;      /* e.g. "3NNF,KNN(2),RBF"; NULL means "3NNF" */
  const char* segmentation; /* "auto", "manual", "none" or NULL for the scenario default */
  const uint64_t* seeds;
  size_t seed_count;
  const int* reference_counts; /* may be NULL: the scenario's own count */
  size_t reference_count_count;
  int query_reference_points; /* nonzero: query at the surveyed points */
  double rbf_lambda;          /* negative: library default */
} rssfp_experiment;

/* Message of the most recent failure on the calling thread. */
RSSFP_API const char* rssfp_last_error(void);
RSSFP_API const char* rssfp_status_string(rssfp_status status);
RSSFP_API const char* rssfp_version(void);

/* Strings returned through char** outputs are owned by the caller. */
RSSFP_API void rssfp_string_free(char* s);

RSSFP_API rssfp_status rssfp_scenario_preset(const char* name, rssfp_scenario** out);
/* Preset name or path to a scenario document. */
RSSFP_API rssfp_status rssfp_scenario_resolve(const char* name_or_path, rssfp_scenario** out);
RSSFP_API void rssfp_scenario_free(rssfp_scenario* sc);
RSSFP_API rssfp_status rssfp_scenario_seed(const rssfp_scenario* sc, uint64_t* out);
RSSFP_API rssfp_status rssfp_scenario_set_reference_count(rssfp_scenario* sc, int m);
RSSFP_API rssfp_status rssfp_scenario_set_sigma(rssfp_scenario* sc, double sigma);
RSSFP_API rssfp_status rssfp_scenario_segmentation(const rssfp_scenario* sc,
                                                   rssfp_segmentation_params* out);
RSSFP_API rssfp_status rssfp_scenario_to_json(const rssfp_scenario* sc, char** out);

RSSFP_API rssfp_status rssfp_survey(const rssfp_scenario* sc, uint64_t seed, rssfp_database** out);

RSSFP_API rssfp_status rssfp_database_new(rssfp_database** out);
RSSFP_API void rssfp_database_free(rssfp_database* db);
RSSFP_API rssfp_status rssfp_database_load(const char* path, rssfp_database** out);
RSSFP_API rssfp_status rssfp_database_parse(const char* text, rssfp_database** out);
RSSFP_API rssfp_status rssfp_database_save(const rssfp_database* db, const char* path);
RSSFP_API rssfp_status rssfp_database_serialize(const rssfp_database* db, char** out);
RSSFP_API rssfp_status rssfp_database_add_beacon(rssfp_database* db, const char* id, double x,
                                                 double y);
/* Averages the samples of each beacon; one (beacon, value) pair per sample. */
RSSFP_API rssfp_status rssfp_database_add_point(rssfp_database* db, double x, double y,
                                                size_t n, const char* const* beacon_ids,
                                                const double* samples, char** id_out);
RSSFP_API rssfp_status rssfp_database_point_count(const rssfp_database* db, size_t* out);
RSSFP_API rssfp_status rssfp_database_subarea_count(const rssfp_database* db, size_t* out);
RSSFP_API rssfp_status rssfp_database_revision(const rssfp_database* db, uint64_t* out);

/* Runs automatic segmentation. *success is 0 when the division failed, in which
 * case the database is unchanged and *report (if given) lists the failing
 * leaves as CSV. */
RSSFP_API rssfp_status rssfp_segment_auto(rssfp_database* db,
                                          const rssfp_segmentation_params* params, uint64_t seed,
                                          int* success, char** report);

RSSFP_API rssfp_status rssfp_estimate(const rssfp_database* db, rssfp_method method, int k,
                                      double margin, size_t n, const char* const* beacon_ids,
                                      const double* rss, rssfp_estimation* out);

RSSFP_API rssfp_status rssfp_rbf_train(const rssfp_database* db, double lambda,
                                       rssfp_rbf_model** out);
RSSFP_API void rssfp_rbf_free(rssfp_rbf_model* model);
RSSFP_API rssfp_status rssfp_rbf_estimate(const rssfp_rbf_model* model, size_t n,
                                          const char* const* beacon_ids, const double* rss,
                                          rssfp_estimation* out);

/* Evaluation harness. CSV and report outputs are returned as strings. */
RSSFP_API rssfp_status rssfp_evaluate(const rssfp_experiment* config, char** csv_out);
RSSFP_API rssfp_status rssfp_sweep(const rssfp_experiment* config, char** csv_out);
RSSFP_API rssfp_status rssfp_compare(const char* const* csv_texts, size_t n,
                                     const rssfp_scenario* sc, char** report_out);
RSSFP_API rssfp_status rssfp_segstudy(const uint64_t* seeds, size_t n, char** outcomes_csv,
                                      char** ranges_csv);

#ifdef __cplusplus
}
#endif

#endif
