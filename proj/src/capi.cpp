#include "risauction/risauction.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "auction.hpp"
#include "errors.hpp"
#include "estimation.hpp"
#include "io.hpp"
#include "pipelines.hpp"
#include "policy.hpp"
#include "rl_env.hpp"
#include "scenario.hpp"

using namespace risauction;

struct ra_scenario {
  Scenario scenario;
  std::unique_ptr<UtilityModel> model;
};

struct ra_auction {
  Auction auction;
};

struct ra_env {
  std::unique_ptr<AuctionEnv> env;
};

struct ra_policy {
  Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

ra_status fail(ra_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <class Fn>
ra_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return RA_OK;
  } catch (const ArgumentError& e) {
    return fail(RA_ERR_ARGUMENT, e.what());
  } catch (const ConfigError& e) {
    return fail(RA_ERR_CONFIG, e.what());
  } catch (const StateError& e) {
    return fail(RA_ERR_STATE, e.what());
  } catch (const StructureError& e) {
    return fail(RA_ERR_STRUCTURE, e.what());
  } catch (const IoError& e) {
    return fail(RA_ERR_IO, e.what());
  } catch (const NumericError& e) {
    return fail(RA_ERR_NUMERIC, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RA_ERR_IO, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(RA_ERR_CONFIG, e.what());
  } catch (const std::out_of_range& e) {
    return fail(RA_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RA_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ArgumentError(what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Json parse_json(const char* text, const char* what) {
  if (text == nullptr) return Json::object();
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

void write_observations(const std::vector<Observation>& obs, std::size_t obs_dim, double* out) {
  for (std::size_t a = 0; a < obs.size(); ++a) {
    const Eigen::VectorXd v = obs[a].to_vector();
    for (std::size_t k = 0; k < obs_dim; ++k) out[a * obs_dim + k] = v[static_cast<Eigen::Index>(k)];
  }
}

}  // namespace

extern "C" {

const char* ra_version(void) { return RISAUCTION_VERSION; }

const char* ra_last_error(void) { return g_last_error.c_str(); }

const char* ra_status_name(ra_status status) {
  switch (status) {
    case RA_OK: return "ok";
    case RA_ERR_ARGUMENT: return "argument error";
    case RA_ERR_CONFIG: return "config error";
    case RA_ERR_STATE: return "state error";
    case RA_ERR_STRUCTURE: return "structure error";
    case RA_ERR_IO: return "io error";
    case RA_ERR_NUMERIC: return "numeric error";
    case RA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void ra_string_free(char* s) { std::free(s); }

ra_status ra_run(const char* request_json, char** result_json) {
  return guarded([&] {
    require(request_json && result_json, "ra_run: null argument");
    *result_json = dup_string(run_pipeline(parse_json(request_json, "request")).dump(2));
  });
}

ra_status ra_replay(const char* manifest_path, const char* out_dir, int overwrite, char** result_json) {
  return guarded([&] {
    require(manifest_path && result_json, "ra_replay: null argument");
    *result_json = dup_string(replay_manifest(manifest_path, out_dir ? out_dir : "", overwrite != 0).dump(2));
  });
}

ra_status ra_resolve_config(const char* config_json, char** resolved_json) {
  return guarded([&] {
    require(resolved_json != nullptr, "ra_resolve_config: null output");
    RunConfig cfg;
    merge_json(cfg, parse_json(config_json, "config"));
    cfg.validate();
    *resolved_json = dup_string(to_json(cfg).dump(2));
  });
}

ra_status ra_scenario_new(const char* config_json, uint64_t seed, ra_scenario** out) {
  return guarded([&] {
    require(out != nullptr, "ra_scenario_new: null output");
    *out = nullptr;
    ScenarioConfig cfg;
    merge_json(cfg, parse_json(config_json, "scenario"));
    auto h = std::make_unique<ra_scenario>();
    h->scenario = generate_scenario(cfg, seed);
    h->model = std::make_unique<UtilityModel>(h->scenario);
    *out = h.release();
  });
}

void ra_scenario_free(ra_scenario* s) { delete s; }

ra_status ra_scenario_counts(const ra_scenario* s, size_t* n_bs, size_t* n_ue, size_t* n_ris) {
  return guarded([&] {
    require(s != nullptr, "ra_scenario_counts: null scenario");
    if (n_bs) *n_bs = s->scenario.n_bs();
    if (n_ue) *n_ue = s->scenario.n_ue();
    if (n_ris) *n_ris = s->scenario.n_ris();
  });
}

ra_status ra_scenario_describe(const ra_scenario* s, char** json) {
  return guarded([&] {
    require(s && json, "ra_scenario_describe: null argument");
    const Scenario& sc = s->scenario;
    auto points = [](const std::vector<Point>& ps) {
      Json a = Json::array();
      for (const auto& p : ps) a.push_back({p.x, p.y});
      return a;
    };
    auto links = [](const LinkTable& t) {
      Json rows = Json::array();
      for (std::size_t i = 0; i < t.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < t.cols(); ++k) {
          const Link& l = t(i, k);
          row.push_back({{"distance", l.distance}, {"gain", l.gain}, {"los", l.los},
                         {"k_factor", std::isinf(l.k_factor) ? Json("inf") : Json(l.k_factor)},
                         {"departure", l.departure}, {"arrival", l.arrival}});
        }
        rows.push_back(row);
      }
      return rows;
    };
    Json j;
    j["config"] = to_json(sc.config);
    j["bs"] = points(sc.bs_pos);
    j["ue"] = points(sc.ue_pos);
    j["ris"] = points(sc.ris_pos);
    j["association"] = sc.association;
    j["noise_power"] = sc.noise_power;
    j["ue_bs"] = links(sc.ue_bs);
    j["ris_bs"] = links(sc.ris_bs);
    j["ue_ris"] = links(sc.ue_ris);
    *json = dup_string(j.dump());
  });
}

ra_status ra_scenario_estimate_sinr(const ra_scenario* s, const size_t* serving_set, size_t n_serving, size_t ue,
                                    size_t bs, double* sinr) {
  return guarded([&] {
    require(s && sinr && (serving_set || n_serving == 0), "ra_scenario_estimate_sinr: null argument");
    require(ue < s->scenario.n_ue() && bs < s->scenario.n_bs(), "ra_scenario_estimate_sinr: index out of range");
    *sinr = estimate_sinr_terms(s->scenario, std::span(serving_set, n_serving), ue, bs).sinr;
  });
}

ra_status ra_scenario_marginal_values(const ra_scenario* s, size_t bs, const size_t* current, size_t n_current,
                                      const size_t* available, size_t n_available, double* values_out) {
  return guarded([&] {
    require(s && (current || n_current == 0) && (available || n_available == 0) && (values_out || n_available == 0),
            "ra_scenario_marginal_values: null argument");
    require(bs < s->scenario.n_bs(), "ra_scenario_marginal_values: BS out of range");
    for (std::size_t i = 0; i < n_current; ++i) require(current[i] < s->scenario.n_ris(), "RIS out of range");
    for (std::size_t i = 0; i < n_available; ++i) require(available[i] < s->scenario.n_ris(), "RIS out of range");
    const auto v = s->model->marginal_values(bs, std::span(current, n_current), std::span(available, n_available));
    std::copy(v.begin(), v.end(), values_out);
  });
}

ra_status ra_auction_new(size_t n_ris, size_t n_bs, double initial_price, double increment, double budget,
                         ra_auction** out) {
  return guarded([&] {
    require(out != nullptr, "ra_auction_new: null output");
    *out = nullptr;
    *out = new ra_auction{new_auction(n_ris, n_bs, initial_price, increment, budget)};
  });
}

void ra_auction_free(ra_auction* a) { delete a; }

ra_status ra_auction_step(ra_auction* a, const uint8_t* bids, int* terminated) {
  return guarded([&] {
    require(a && bids, "ra_auction_step: null argument");
    const std::size_t n_ris = a->auction.n_ris();
    std::vector<BidVector> rows(a->auction.n_bs());
    for (std::size_t b = 0; b < rows.size(); ++b) {
      rows[b].assign(bids + b * n_ris, bids + (b + 1) * n_ris);
      for (auto bit : rows[b]) require(bit <= 1, "ra_auction_step: bids must be 0 or 1");
    }
    a->auction.step(rows);
    if (terminated) *terminated = a->auction.is_terminated() ? 1 : 0;
  });
}

ra_status ra_auction_round(const ra_auction* a, size_t* round) {
  return guarded([&] {
    require(a && round, "ra_auction_round: null argument");
    *round = a->auction.round();
  });
}

ra_status ra_auction_price(const ra_auction* a, double* price) {
  return guarded([&] {
    require(a && price, "ra_auction_price: null argument");
    *price = a->auction.price();
  });
}

ra_status ra_auction_budget(const ra_auction* a, size_t bs, double* budget) {
  return guarded([&] {
    require(a && budget, "ra_auction_budget: null argument");
    require(bs < a->auction.n_bs(), "ra_auction_budget: BS out of range");
    *budget = a->auction.budget(bs);
  });
}

ra_status ra_auction_legal_mask(const ra_auction* a, size_t bs, uint8_t* mask_out) {
  return guarded([&] {
    require(a && mask_out, "ra_auction_legal_mask: null argument");
    require(bs < a->auction.n_bs(), "ra_auction_legal_mask: BS out of range");
    const BidVector m = a->auction.legal_bid_mask(bs);
    std::copy(m.begin(), m.end(), mask_out);
  });
}

ra_status ra_auction_owner(const ra_auction* a, size_t ris, int64_t* owner, double* price_paid) {
  return guarded([&] {
    require(a && owner, "ra_auction_owner: null argument");
    require(ris < a->auction.n_ris(), "ra_auction_owner: RIS out of range");
    const RisState& st = a->auction.ris(ris);
    const bool assigned = st.status == RisStatus::assigned;
    *owner = assigned ? static_cast<int64_t>(st.owner) : -1;
    if (price_paid) *price_paid = assigned ? st.price_paid : 0.0;
  });
}

ra_status ra_auction_is_terminated(const ra_auction* a, int* terminated) {
  return guarded([&] {
    require(a && terminated, "ra_auction_is_terminated: null argument");
    *terminated = a->auction.is_terminated() ? 1 : 0;
  });
}

ra_status ra_auction_history_csv(const ra_auction* a, char** csv) {
  return guarded([&] {
    require(a && csv, "ra_auction_history_csv: null argument");
    *csv = dup_string(a->auction.history_csv());
  });
}

ra_status ra_env_new(const char* config_json, ra_env** out) {
  return guarded([&] {
    require(out != nullptr, "ra_env_new: null output");
    *out = nullptr;
    RunConfig cfg;
    merge_json(cfg, parse_json(config_json, "config"));
    auto h = std::make_unique<ra_env>();
    h->env = std::make_unique<AuctionEnv>(cfg.env_config());
    *out = h.release();
  });
}

void ra_env_free(ra_env* e) { delete e; }

ra_status ra_env_dims(const ra_env* e, size_t* n_agents, size_t* obs_dim, size_t* act_dim) {
  return guarded([&] {
    require(e != nullptr, "ra_env_dims: null environment");
    if (n_agents) *n_agents = e->env->n_agents();
    if (obs_dim) *obs_dim = e->env->obs_dim();
    if (act_dim) *act_dim = e->env->act_dim();
  });
}

ra_status ra_env_reset(ra_env* e, uint64_t episode_seed, double* obs_out) {
  return guarded([&] {
    require(e && obs_out, "ra_env_reset: null argument");
    write_observations(e->env->reset(episode_seed), e->env->obs_dim(), obs_out);
  });
}

ra_status ra_env_step(ra_env* e, const uint8_t* actions, double* obs_out, double* rewards_out, int* done) {
  return guarded([&] {
    require(e && actions, "ra_env_step: null argument");
    const std::size_t n = e->env->n_agents(), act = e->env->act_dim();
    std::vector<BidVector> acts(n);
    for (std::size_t a = 0; a < n; ++a) {
      acts[a].assign(actions + a * act, actions + (a + 1) * act);
      for (auto bit : acts[a]) require(bit <= 1, "ra_env_step: actions must be 0 or 1");
    }
    const StepResult r = e->env->step(acts);
    if (obs_out) write_observations(r.observations, e->env->obs_dim(), obs_out);
    if (rewards_out)
      for (std::size_t a = 0; a < n; ++a) rewards_out[a] = r.rewards[a].total;
    if (done) *done = r.done ? 1 : 0;
  });
}

ra_status ra_policy_load(const char* path, ra_policy** out) {
  return guarded([&] {
    require(path && out, "ra_policy_load: null argument");
    *out = nullptr;
    *out = new ra_policy{load_checkpoint(path)};
  });
}

void ra_policy_free(ra_policy* p) { delete p; }

ra_status ra_policy_dims(const ra_policy* p, size_t* n_agents, size_t* obs_dim, size_t* act_dim) {
  return guarded([&] {
    require(p != nullptr, "ra_policy_dims: null policy");
    if (n_agents) *n_agents = p->checkpoint.agents.size();
    if (obs_dim) *obs_dim = p->checkpoint.agents.front().obs_dim();
    if (act_dim) *act_dim = p->checkpoint.agents.front().act_dim();
  });
}

ra_status ra_policy_probabilities(const ra_policy* p, size_t agent, const double* obs, double* probs_out,
                                  double* value_out) {
  return guarded([&] {
    require(p && obs && probs_out, "ra_policy_probabilities: null argument");
    require(agent < p->checkpoint.agents.size(), "ra_policy_probabilities: agent out of range");
    const PolicyParams& params = p->checkpoint.agents[agent];
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(obs, static_cast<Eigen::Index>(params.obs_dim()));
    const PolicyOutput o = policy_forward(params, x);
    for (Eigen::Index i = 0; i < o.probabilities.size(); ++i) probs_out[i] = o.probabilities[i];
    if (value_out) *value_out = o.value;
  });
}

ra_status ra_policy_act(const ra_policy* p, size_t agent, const double* obs, uint8_t* bits_out) {
  return guarded([&] {
    require(p && obs && bits_out, "ra_policy_act: null argument");
    require(agent < p->checkpoint.agents.size(), "ra_policy_act: agent out of range");
    const PolicyParams& params = p->checkpoint.agents[agent];
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(obs, static_cast<Eigen::Index>(params.obs_dim()));
    const PolicyOutput o = policy_forward(params, x);
    for (Eigen::Index i = 0; i < o.probabilities.size(); ++i) bits_out[i] = o.probabilities[i] >= 0.5 ? 1 : 0;
  });
}

}  // extern "C"
