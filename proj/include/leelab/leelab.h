#ifndef LEELAB_H
#define LEELAB_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define LEELAB_API __declspec(dllexport)
#else
#define LEELAB_API __attribute__((visibility("default")))
#endif

typedef enum leelab_status {
  LEELAB_OK = 0,
  LEELAB_INVALID_ARGUMENT = 1,
  LEELAB_DOMAIN_VIOLATION = 2,
  LEELAB_CEILING_EXCEEDED = 3,
  LEELAB_NO_CONVERGENCE = 4,
  LEELAB_NO_SIGN_CHANGE = 5,
  LEELAB_SINGULAR = 6,
  LEELAB_CONFIG_ERROR = 7,
  LEELAB_IO_ERROR = 8,
  LEELAB_ASSERTION_FAILED = 9,
  LEELAB_INTERNAL_ERROR = 10
} leelab_status;

typedef struct leelab_session leelab_session;
typedef struct leelab_result leelab_result;

typedef struct leelab_run_options {
  int oracle;                    /* non-zero: cross-check against the block Hamiltonian */
  int use_cache;                 /* non-zero: serve identical runs from the results directory */
  int threads;                   /* worker threads for grid scans, >= 1 */
  const char* output_directory;  /* NULL: config, then LEELAB_OUTPUT_DIR, then ./leelab-results */
} leelab_run_options;

LEELAB_API const char* leelab_version(void);
LEELAB_API const char* leelab_status_string(leelab_status status);

/* Message of the most recent failure on the calling thread. */
LEELAB_API const char* leelab_last_error(void);

LEELAB_API void leelab_run_options_init(leelab_run_options* options);

/* An empty string or NULL selects the default configuration. */
LEELAB_API leelab_status leelab_session_create(const char* config_json, leelab_session** out);
LEELAB_API leelab_status leelab_session_create_from_file(const char* path, leelab_session** out);
LEELAB_API void leelab_session_destroy(leelab_session* session);

/* Canonical configuration as JSON; owned by the session. */
LEELAB_API const char* leelab_session_config(const leelab_session* session);

/* Number of commands and their names, for enumeration. */
LEELAB_API int leelab_command_count(void);
LEELAB_API const char* leelab_command_name(int index);

/* Runs a command. A failed scientific assertion still yields LEELAB_OK and a
   result whose passed flag is 0. */
LEELAB_API leelab_status leelab_run(leelab_session* session, const char* command,
                                    const leelab_run_options* options, leelab_result** out);
LEELAB_API void leelab_result_destroy(leelab_result* result);

LEELAB_API const char* leelab_result_payload(const leelab_result* result);
LEELAB_API const char* leelab_result_failure(const leelab_result* result);
LEELAB_API const char* leelab_result_directory(const leelab_result* result);
LEELAB_API const char* leelab_result_config_hash(const leelab_result* result);
LEELAB_API int leelab_result_passed(const leelab_result* result);
LEELAB_API int leelab_result_from_cache(const leelab_result* result);

/* Direct evaluations on the session's configuration. */
LEELAB_API leelab_status leelab_bare_mass(const leelab_session* session, double* out);
LEELAB_API leelab_status leelab_ground_energy(const leelab_session* session, double* out);
LEELAB_API leelab_status leelab_heat_kernel(const leelab_session* session, double t, double* out);

#ifdef __cplusplus
}
#endif

#endif
