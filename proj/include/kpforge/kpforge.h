/* C interface to the kpforge keyphrase pipeline. */
#ifndef KPFORGE_KPFORGE_H
#define KPFORGE_KPFORGE_H

#include <stddef.h>

#if defined(KPF_BUILDING_LIBRARY)
#define KPF_API __attribute__((visibility("default")))
#else
#define KPF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as the CLI exit codes. */
typedef enum kpf_status {
  KPF_OK = 0,
  KPF_ERR_USAGE = 1,   /* bad arguments, unknown keys, missing settings */
  KPF_ERR_DATA = 2,    /* unreadable or malformed input files */
  KPF_ERR_NUMERIC = 3, /* non-finite loss or similar */
  KPF_ERR_INTERNAL = 4
} kpf_status;

typedef struct kpf_config kpf_config;
typedef struct kpf_corpus kpf_corpus;
typedef struct kpf_model kpf_model;

typedef void (*kpf_message_fn)(const char* line, void* user);

typedef struct kpf_corpus_stats {
  double kp_mean;
  double kp_stddev;
  double kp_length;
  double pct_absent;
  size_t samples;
} kpf_corpus_stats;

KPF_API const char* kpf_version(void);
KPF_API const char* kpf_status_name(kpf_status status);
/* Message of the last failed call on this thread; "" if none. */
KPF_API const char* kpf_last_error(void);
KPF_API void kpf_string_free(char* s);

/* Strings copied into caller buffers: *len receives the full length (without
 * the terminator); if cap is too small nothing is copied and KPF_ERR_USAGE is
 * returned. */

KPF_API kpf_status kpf_config_create(kpf_config** out);
KPF_API void kpf_config_destroy(kpf_config* config);
/* Reads "key = value" lines from a file on top of the current values. */
KPF_API kpf_status kpf_config_load(kpf_config* config, const char* path);
KPF_API kpf_status kpf_config_set(kpf_config* config, const char* key, const char* value);
KPF_API kpf_status kpf_config_get(const kpf_config* config, const char* key, char* buf, size_t cap, size_t* len);
/* Applies the KPFORGE_SEED environment variable if set. */
KPF_API kpf_status kpf_config_apply_env(kpf_config* config);
KPF_API kpf_status kpf_config_fingerprint(const kpf_config* config, char* buf, size_t cap, size_t* len);
KPF_API kpf_status kpf_config_serialize(const kpf_config* config, char** out);
KPF_API size_t kpf_config_key_count(void);
KPF_API const char* kpf_config_key_name(size_t index);

KPF_API size_t kpf_command_count(void);
KPF_API const char* kpf_command_name(size_t index);
/* Runs a subcommand ("train", "predict", ...). Progress lines go to sink when given. */
KPF_API kpf_status kpf_run(const char* command, const kpf_config* config, kpf_message_fn sink, void* user);

KPF_API kpf_status kpf_corpus_load(const char* path, kpf_corpus** out);
KPF_API void kpf_corpus_destroy(kpf_corpus* corpus);
KPF_API size_t kpf_corpus_size(const kpf_corpus* corpus);
KPF_API size_t kpf_corpus_error_count(const kpf_corpus* corpus);
KPF_API kpf_status kpf_corpus_stats_compute(const kpf_corpus* corpus, kpf_corpus_stats* out);

KPF_API kpf_status kpf_stem_word(const char* word, char* buf, size_t cap, size_t* len);
/* Matching key of a phrase: tokenized, lowercased, each token stemmed. */
KPF_API kpf_status kpf_stem_phrase(const char* phrase, char* buf, size_t cap, size_t* len);

/* Phrases are raw strings; they are stemmed and deduplicated before scoring. */
KPF_API kpf_status kpf_f1_at_m(const char* const* predictions, size_t n_pred, const char* const* gold,
                               size_t n_gold, double* out);
KPF_API kpf_status kpf_f1_at_5(const char* const* predictions, size_t n_pred, const char* const* gold,
                               size_t n_gold, double* out);

/* Loads the checkpoints and thresholds named by the config. The reranker is
 * optional; without it absent predictions are empty. */
KPF_API kpf_status kpf_model_load(const kpf_config* config, kpf_model** out);
KPF_API void kpf_model_destroy(kpf_model* model);
/* Predicts for one document; *json_out holds {"present": [...], "absent": [...]}
 * and must be released with kpf_string_free. */
KPF_API kpf_status kpf_model_predict(const kpf_model* model, const char* title, const char* abstract_text,
                                     char** json_out);

#ifdef __cplusplus
}
#endif

#endif
