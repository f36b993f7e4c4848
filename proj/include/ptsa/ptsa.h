/* C interface to the transient-stability assessment toolkit.
 *
 * All functions returning ptsa_status set a thread-local error message on
 * failure, readable via ptsa_last_error() until the next failing call on the
 * same thread. Strings returned through out-parameters are heap-allocated and
 * must be released with ptsa_string_free().
 */
#ifndef PTSA_H
#define PTSA_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ptsa_status {
    PTSA_OK = 0,
    PTSA_ERR_INVALID_ARGUMENT = 1,
    PTSA_ERR_IO = 2,
    PTSA_ERR_PARSE = 3,
    PTSA_ERR_NUMERICAL = 4,
    PTSA_ERR_UNSUPPORTED = 5,
    PTSA_ERR_INTERNAL = 6
} ptsa_status;

/* Bumped on any breaking change to this header or the JSON schemas. */
int ptsa_abi_version(void);

const char* ptsa_status_name(ptsa_status status);

/* Message of the most recent failure on this thread; never NULL. */
const char* ptsa_last_error(void);

void ptsa_string_free(char* s);

/* Run a whole campaign described by a JSON document (see the CLI for the
 * schema); artifacts land in the spec's output directory. On success
 * *summary_json_out receives the summary document. */
ptsa_status ptsa_campaign_run(const char* campaign_json, char** summary_json_out);

/* A loaded case + input model ready for repeated margin evaluations. */
typedef struct ptsa_study ptsa_study;

/* options_json may be NULL; recognized keys: fct_cycles, cct_resolution_cycles,
 * cct_max_cycles, dt, horizon, instability_angle_threshold. */
ptsa_status ptsa_study_open(const char* case_json_path, const char* uncertainty_json_path,
                            const char* options_json, ptsa_study** study_out);

void ptsa_study_close(ptsa_study* study);

ptsa_status ptsa_study_dimension(const ptsa_study* study, int* dim_out);

/* Margin in cycles for a point in independent standard-normal coordinates. */
ptsa_status ptsa_study_margin_from_u(const ptsa_study* study, const double* u, int dim,
                                     double* margin_out);

/* Margin in cycles for a point in physical coordinates. */
ptsa_status ptsa_study_margin_from_x(const ptsa_study* study, const double* x, int dim,
                                     double* margin_out);

#ifdef __cplusplus
}
#endif

#endif /* PTSA_H */
