#ifndef RISAUCTION_RISAUCTION_H
#define RISAUCTION_RISAUCTION_H

#include <stddef.h>
#include <stdint.h>

#if defined(RISAUCTION_BUILDING)
#define RA_API __attribute__((visibility("default")))
#else
#define RA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ra_status {
  RA_OK = 0,
  RA_ERR_ARGUMENT = 1,  /* invalid value passed in */
  RA_ERR_CONFIG = 2,    /* malformed configuration, unknown key, missing checkpoint */
  RA_ERR_STATE = 3,     /* call not valid in the current state */
  RA_ERR_STRUCTURE = 4, /* size or shape mismatch */
  RA_ERR_IO = 5,
  RA_ERR_NUMERIC = 6,
  RA_ERR_INTERNAL = 7
} ra_status;

/* Library version, e.g. "0.1.0". */
RA_API const char* ra_version(void);
/* Message of the last failed call on this thread; "" after a success. */
RA_API const char* ra_last_error(void);
RA_API const char* ra_status_name(ra_status status);
/* Releases strings returned through char** out-parameters. */
RA_API void ra_string_free(char* s);

/* Pipelines. The request is a JSON object with command, out, seed, jobs,
 * overwrite, config and args; see the README for the schema. */
RA_API ra_status ra_run(const char* request_json, char** result_json);
/* out_dir may be NULL to reuse the directory recorded in the manifest. */
RA_API ra_status ra_replay(const char* manifest_path, const char* out_dir, int overwrite, char** result_json);
/* Full configuration after overlaying config_json (may be NULL) on the defaults. */
RA_API ra_status ra_resolve_config(const char* config_json, char** resolved_json);

/* Scenarios */
typedef struct ra_scenario ra_scenario;

/* config_json holds the "scenario" section keys or is NULL for defaults. */
RA_API ra_status ra_scenario_new(const char* config_json, uint64_t seed, ra_scenario** out);
RA_API void ra_scenario_free(ra_scenario* s);
RA_API ra_status ra_scenario_counts(const ra_scenario* s, size_t* n_bs, size_t* n_ue, size_t* n_ris);
/* Positions, association and link parameters as JSON. */
RA_API ra_status ra_scenario_describe(const ra_scenario* s, char** json);
RA_API ra_status ra_scenario_estimate_sinr(const ra_scenario* s, const size_t* serving_set, size_t n_serving,
                                           size_t ue, size_t bs, double* sinr);
/* values_out receives one entry per available RIS. */
RA_API ra_status ra_scenario_marginal_values(const ra_scenario* s, size_t bs, const size_t* current, size_t n_current,
                                             const size_t* available, size_t n_available, double* values_out);

/* Auctions */
typedef struct ra_auction ra_auction;

RA_API ra_status ra_auction_new(size_t n_ris, size_t n_bs, double initial_price, double increment, double budget,
                                ra_auction** out);
RA_API void ra_auction_free(ra_auction* a);
/* bids: n_bs rows of n_ris bits (0/1), row-major. */
RA_API ra_status ra_auction_step(ra_auction* a, const uint8_t* bids, int* terminated);
/* 1-based index of the next round to run. */
RA_API ra_status ra_auction_round(const ra_auction* a, size_t* round);
RA_API ra_status ra_auction_price(const ra_auction* a, double* price);
RA_API ra_status ra_auction_budget(const ra_auction* a, size_t bs, double* budget);
RA_API ra_status ra_auction_legal_mask(const ra_auction* a, size_t bs, uint8_t* mask_out);
/* owner is -1 while the RIS is unassigned. */
RA_API ra_status ra_auction_owner(const ra_auction* a, size_t ris, int64_t* owner, double* price_paid);
RA_API ra_status ra_auction_is_terminated(const ra_auction* a, int* terminated);
RA_API ra_status ra_auction_history_csv(const ra_auction* a, char** csv);

/* Learning environment */
typedef struct ra_env ra_env;

/* config_json is a configuration overlay (scenario, auction, env sections) or NULL. */
RA_API ra_status ra_env_new(const char* config_json, ra_env** out);
RA_API void ra_env_free(ra_env* e);
RA_API ra_status ra_env_dims(const ra_env* e, size_t* n_agents, size_t* obs_dim, size_t* act_dim);
/* obs_out: n_agents * obs_dim doubles, one row per agent. */
RA_API ra_status ra_env_reset(ra_env* e, uint64_t episode_seed, double* obs_out);
/* actions: n_agents * act_dim bits; rewards_out: n_agents doubles. */
RA_API ra_status ra_env_step(ra_env* e, const uint8_t* actions, double* obs_out, double* rewards_out, int* done);

/* Trained policies */
typedef struct ra_policy ra_policy;

RA_API ra_status ra_policy_load(const char* path, ra_policy** out);
RA_API void ra_policy_free(ra_policy* p);
RA_API ra_status ra_policy_dims(const ra_policy* p, size_t* n_agents, size_t* obs_dim, size_t* act_dim);
/* Bid probabilities of one agent; probs_out has act_dim entries. */
RA_API ra_status ra_policy_probabilities(const ra_policy* p, size_t agent, const double* obs, double* probs_out,
                                         double* value_out);
/* Deterministic bids (probability >= 0.5). */
RA_API ra_status ra_policy_act(const ra_policy* p, size_t agent, const double* obs, uint8_t* bits_out);

#ifdef __cplusplus
}
#endif

#endif
