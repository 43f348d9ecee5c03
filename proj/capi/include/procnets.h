/* C interface to the procedure segmentation library.
 *
 * All functions return PN_OK on success or an error code; the message for the
 * most recent failure on the calling thread is available via pn_last_error().
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with pn_string_free().
 */
#ifndef PROCNETS_H
#define PROCNETS_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef PN_API
#define PN_API __attribute__((visibility("default")))
#endif

typedef int32_t pn_status;

enum {
  PN_OK = 0,
  PN_ERR_INVALID_ARGUMENT = 1,
  PN_ERR_CONFIG = 2,
  PN_ERR_IO = 3,
  PN_ERR_FORMAT = 4,
  PN_ERR_PARSE = 5,
  PN_ERR_DIMENSION = 6,
  PN_ERR_TRAINING = 7,
  PN_ERR_INTERNAL = 8
};

typedef struct pn_dataset pn_dataset;
typedef struct pn_model pn_model;

PN_API const char* pn_status_name(pn_status status);
PN_API const char* pn_last_error(void);
PN_API void pn_string_free(char* text);

/* Synthetic data generation. config_json follows the generator schema
 * (num_videos, num_val, num_test, L, D, ...); pass NULL or "" for defaults.
 * Writes annotations.json plus one .psf feature file per video. */
PN_API pn_status pn_generate_dataset(const char* config_json,
                                     const char* out_dir);

/* Opens a dataset directory (annotations.json + .psf files). */
PN_API pn_status pn_dataset_open(const char* dir, pn_dataset** out);
PN_API void pn_dataset_free(pn_dataset* dataset);

/* Dataset statistics as JSON. split may be "train", "val", "test" or NULL
 * for the whole corpus. */
PN_API pn_status pn_dataset_stats_json(const pn_dataset* dataset,
                                       const char* split, char** json_out);

/* Trains a fresh model. config_json follows the run-config schema; pass NULL
 * or "" for defaults. When out_dir is non-NULL the run writes config.json,
 * train_log.txt and checkpoint.pn there. On success *out owns the trained
 * model. */
PN_API pn_status pn_train(const char* config_json, const pn_dataset* dataset,
                          const char* out_dir, pn_model** out);

PN_API pn_status pn_model_open(const char* checkpoint_path, pn_model** out);
PN_API pn_status pn_model_save(const pn_model* model, const char* path);
PN_API void pn_model_free(pn_model* model);

/* Decoded segment predictions for every video of a split, as JSON.
 * beam_size 0 uses the configured beam. */
PN_API pn_status pn_infer_json(const pn_model* model,
                               const pn_dataset* dataset, const char* split,
                               int32_t beam_size, char** json_out);

/* Evaluation report as JSON. method is "procnets-lstm", "procnets-nms" or
 * "uniform"; the uniform baseline accepts a NULL model. */
PN_API pn_status pn_evaluate_json(const pn_model* model,
                                  const pn_dataset* dataset,
                                  const char* method, const char* split,
                                  int32_t beam_size, char** json_out);

/* Paired original/permuted evaluation of the half-swap experiment. */
PN_API pn_status pn_permutation_eval_json(const pn_model* model,
                                          const pn_dataset* dataset,
                                          const char* split, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* PROCNETS_H */
