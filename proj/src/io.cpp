#include "io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "errors.hpp"

namespace risauction {

namespace {

/// Reads known keys from one JSON object and rejects everything else.
class Reader {
 public:
  Reader(const Json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) throw ConfigError(section_ + ": expected a JSON object");
  }

  template <class T>
  void operator()(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const Json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("expected true or false");
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!is_non_negative_integer(v)) throw ConfigError("expected a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("expected a string");
      } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
        if (!v.is_array()) throw ConfigError("expected an array");
        for (const auto& e : v)
          if (!is_non_negative_integer(e)) throw ConfigError("expected non-negative integers");
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!v.is_array()) throw ConfigError("expected an array");
        for (const auto& e : v)
          if (!e.is_number()) throw ConfigError("expected numbers");
      }
      out = v.get<T>();
    } catch (const ConfigError& e) {
      throw ConfigError(section_ + "." + key + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(section_ + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(section_ + ": unknown key '" + item.key() + "'");
  }

 private:
  const Json& j_;
  std::string section_;
  std::set<std::string> seen_;
};

struct Writer {
  Json j = Json::object();
  template <class T>
  void operator()(const char* key, const T& v) {
    j[key] = v;
  }
};

template <class Cfg, class V>
void visit_scenario(Cfg& c, V& v) {
  v("n_bs", c.n_bs);
  v("n_ue", c.n_ue);
  v("n_ris", c.n_ris);
  v("m_bs", c.m_bs);
  v("m_ris", c.m_ris);
  v("region_side", c.region_side);
  v("carrier_freq", c.carrier_freq);
  v("tx_power", c.tx_power);
  v("subcarrier_bw", c.subcarrier_bw);
  v("noise_psd_dbm_hz", c.noise_psd_dbm_hz);
  v("noise_figure_db", c.noise_figure_db);
  v("ple_los", c.ple_los);
  v("ple_nlos", c.ple_nlos);
  v("k_los", c.k_los);
  v("k_nlos", c.k_nlos);
  v("los_decay", c.los_decay);
  v("shadow_var_db", c.shadow_var_db);
  v("cluster_count", c.cluster_count);
  v("cluster_spread", c.cluster_spread);
  v("reference_distance", c.reference_distance);
}

template <class Cfg, class V>
void visit_auction(Cfg& c, V& v) {
  v("initial_price", c.initial_price);
  v("increment", c.increment);
  v("budget", c.budget);
}

template <class Cfg, class V>
void visit_train(Cfg& c, V& v) {
  v("total_steps", c.total_steps);
  v("n_steps", c.n_steps);
  v("batch_size", c.batch_size);
  v("n_epochs", c.n_epochs);
  v("n_envs", c.n_envs);
  v("gamma", c.gamma);
  v("gae_lambda", c.gae_lambda);
  v("clip_range", c.clip_range);
  v("learning_rate", c.learning_rate);
  v("adam_eps", c.adam_eps);
  v("vf_coef", c.vf_coef);
  v("ent_coef", c.ent_coef);
  v("max_grad_norm", c.max_grad_norm);
  v("normalize_advantage", c.normalize_advantage);
  v("hidden", c.hidden);
  v("eval_interval", c.eval_interval);
  v("eval_episodes", c.eval_episodes);
  v("patience", c.patience);
  v("min_improvement", c.min_improvement);
  v("share_parameters", c.share_parameters);
}

template <class Cfg, class V>
void visit_env(Cfg& c, V& v) {
  v("beta", c.beta);
  v("max_ris_slots", c.max_ris_slots);
}

template <class Cfg, class V>
void visit_eval(Cfg& c, V& v) {
  v("n_macro", c.n_macro);
  v("n_micro", c.n_micro);
  v("betas", c.betas);
  v("include_heuristics", c.include_heuristics);
}

template <class Cfg, class V>
void visit_accuracy(Cfg& c, V& v) {
  v("m_bs_list", c.m_bs_list);
  v("n_macro", c.n_macro);
  v("n_micro", c.n_micro);
  v("interferers", c.interferers);
  v("metric", c.metric);
}

Json eigen_to_json(const Eigen::MatrixXd& m) {
  // Row-major flattening.
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) flat.push_back(m(i, k));
  return flat;
}

Json mlp_to_json(const Mlp& net) {
  Json layers = Json::array();
  for (const auto& l : net.layers)
    layers.push_back({{"shape", {l.weight.rows(), l.weight.cols()}},
                      {"weight", eigen_to_json(l.weight)},
                      {"bias", eigen_to_json(l.bias)}});
  return layers;
}

Mlp mlp_from_json(const Json& layers, const char* name) {
  if (!layers.is_array() || layers.empty()) throw ConfigError(std::string("checkpoint: ") + name + " has no layers");
  std::vector<std::size_t> sizes;
  for (const auto& l : layers) {
    const auto shape = l.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) throw ConfigError("checkpoint: layer shape must have two entries");
    if (sizes.empty()) sizes.push_back(shape[1]);
    if (sizes.back() != shape[1]) throw ConfigError(std::string("checkpoint: ") + name + " layer sizes do not chain");
    sizes.push_back(shape[0]);
  }
  Mlp net(sizes);
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const auto& l = layers[k];
    const auto w = l.at("weight").get<std::vector<double>>();
    const auto b = l.at("bias").get<std::vector<double>>();
    DenseLayer& dl = net.layers[k];
    if (w.size() != static_cast<std::size_t>(dl.weight.size()) || b.size() != static_cast<std::size_t>(dl.bias.size()))
      throw ConfigError(std::string("checkpoint: ") + name + " weight count does not match its shape");
    for (Eigen::Index i = 0; i < dl.weight.rows(); ++i)
      for (Eigen::Index c = 0; c < dl.weight.cols(); ++c)
        dl.weight(i, c) = w[static_cast<std::size_t>(i * dl.weight.cols() + c)];
    for (Eigen::Index i = 0; i < dl.bias.size(); ++i) dl.bias[i] = b[static_cast<std::size_t>(i)];
  }
  return net;
}

}  // namespace

Json to_json(const ScenarioConfig& c) {
  Writer w;
  ScenarioConfig copy = c;
  visit_scenario(copy, w);
  return w.j;
}

Json to_json(const AuctionParams& c) {
  Writer w;
  AuctionParams copy = c;
  visit_auction(copy, w);
  return w.j;
}

Json to_json(const TrainConfig& c) {
  Writer w;
  TrainConfig copy = c;
  visit_train(copy, w);
  return w.j;
}

void merge_json(ScenarioConfig& c, const Json& j) {
  Reader r(j, "scenario");
  visit_scenario(c, r);
  r.finish();
}

void merge_json(AuctionParams& c, const Json& j) {
  Reader r(j, "auction");
  visit_auction(c, r);
  r.finish();
}

void merge_json(TrainConfig& c, const Json& j) {
  Reader r(j, "train");
  visit_train(c, r);
  r.finish();
}

void RunConfig::validate() const {
  scenario.validate();
  auction.validate();
  env_config().validate();
  train.validate();
  if (evaluation.n_macro < 1 || evaluation.n_micro < 1)
    throw ConfigError("evaluation: n_macro and n_micro must be >= 1");
  for (double b : evaluation.betas)
    if (!(b > 0.0)) throw ConfigError("evaluation: betas must be positive");
  accuracy_config(1).validate();
}

EnvConfig RunConfig::env_config() const {
  EnvConfig e;
  e.scenario = scenario;
  e.auction = auction;
  e.beta = env.beta;
  e.max_ris_slots = env.max_ris_slots == 0 ? scenario.n_ris : env.max_ris_slots;
  return e;
}

EvalConfig RunConfig::eval_config(std::size_t jobs) const {
  EvalConfig e;
  e.scenario = scenario;
  e.auction = auction;
  e.n_macro = evaluation.n_macro;
  e.n_micro = evaluation.n_micro;
  e.jobs = jobs;
  return e;
}

AccuracyConfig RunConfig::accuracy_config(std::size_t jobs) const {
  AccuracyConfig a;
  a.scenario = scenario;
  a.m_bs_list = accuracy.m_bs_list;
  a.n_macro = accuracy.n_macro;
  a.n_micro = accuracy.n_micro;
  if (accuracy.interferers == "isotropic")
    a.interferers = InterfererBeams::isotropic;
  else if (accuracy.interferers == "steered")
    a.interferers = InterfererBeams::steered;
  else
    throw ConfigError("accuracy.interferers: expected 'isotropic' or 'steered'");
  if (accuracy.metric == "mean_sinr")
    a.metric = AccuracyMetric::mean_sinr;
  else if (accuracy.metric == "power_ratio")
    a.metric = AccuracyMetric::power_ratio;
  else
    throw ConfigError("accuracy.metric: expected 'mean_sinr' or 'power_ratio'");
  a.jobs = jobs;
  return a;
}

Json to_json(const RunConfig& cfg) {
  RunConfig c = cfg;
  Json j;
  j["scenario"] = to_json(c.scenario);
  j["auction"] = to_json(c.auction);
  {
    Writer w;
    visit_env(c.env, w);
    j["env"] = w.j;
  }
  j["train"] = to_json(c.train);
  {
    Writer w;
    visit_eval(c.evaluation, w);
    j["evaluation"] = w.j;
  }
  {
    Writer w;
    visit_accuracy(c.accuracy, w);
    j["accuracy"] = w.j;
  }
  return j;
}

void merge_json(RunConfig& cfg, const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    const Json& v = item.value();
    if (key == "scenario") {
      merge_json(cfg.scenario, v);
    } else if (key == "auction") {
      merge_json(cfg.auction, v);
    } else if (key == "train") {
      merge_json(cfg.train, v);
    } else if (key == "env") {
      Reader r(v, "env");
      visit_env(cfg.env, r);
      r.finish();
    } else if (key == "evaluation") {
      Reader r(v, "evaluation");
      visit_eval(cfg.evaluation, r);
      r.finish();
    } else if (key == "accuracy") {
      Reader r(v, "accuracy");
      visit_accuracy(cfg.accuracy, r);
      r.finish();
    } else {
      throw ConfigError("config: unknown section '" + key + "'");
    }
  }
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig cfg;
  merge_json(cfg, j);
  cfg.validate();
  return cfg;
}

Json to_json(const PolicyParams& p) { return {{"actor", mlp_to_json(p.actor)}, {"critic", mlp_to_json(p.critic)}}; }

PolicyParams policy_from_json(const Json& j) {
  PolicyParams p;
  try {
    p.actor = mlp_from_json(j.at("actor"), "actor");
    p.critic = mlp_from_json(j.at("critic"), "critic");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  if (p.actor.input_size() != p.critic.input_size() || p.critic.output_size() != 1)
    throw ConfigError("checkpoint: actor and critic shapes are inconsistent");
  if (!p.is_finite()) throw ConfigError("checkpoint: non-finite weights");
  return p;
}

Json to_json(const Checkpoint& c) {
  Json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["obs_dim"] = c.agents.empty() ? 0 : c.agents.front().obs_dim();
  j["act_dim"] = c.agents.empty() ? 0 : c.agents.front().act_dim();
  j["hidden"] = c.agents.empty() ? std::vector<std::size_t>{} : c.agents.front().hidden_sizes();
  j["seed"] = c.seed;
  j["steps"] = c.steps;
  j["best_eval_reward"] = c.best_eval_reward;
  j["env"] = {{"scenario", to_json(c.env.scenario)},
              {"auction", to_json(c.env.auction)},
              {"beta", c.env.beta},
              {"max_ris_slots", c.env.max_ris_slots}};
  j["train"] = to_json(c.train);
  j["rng_state"] = c.rng_state;
  j["agents"] = Json::array();
  for (const auto& p : c.agents) j["agents"].push_back(to_json(p));
  return j;
}

Checkpoint checkpoint_from_json(const Json& j) {
  Checkpoint c;
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) throw ConfigError("checkpoint: unrecognized format");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw ConfigError("checkpoint: unsupported version " + j.at("version").dump());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.steps = j.at("steps").get<std::size_t>();
    c.best_eval_reward = j.at("best_eval_reward").get<double>();
    const Json& env = j.at("env");
    merge_json(c.env.scenario, env.at("scenario"));
    merge_json(c.env.auction, env.at("auction"));
    c.env.beta = env.at("beta").get<double>();
    c.env.max_ris_slots = env.at("max_ris_slots").get<std::size_t>();
    merge_json(c.train, j.at("train"));
    c.rng_state = j.at("rng_state").get<std::string>();
    for (const auto& a : j.at("agents")) c.agents.push_back(policy_from_json(a));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  if (c.agents.empty()) throw ConfigError("checkpoint: no agents");
  for (const auto& a : c.agents)
    if (a.obs_dim() != c.env.obs_dim() || a.act_dim() != c.env.max_ris_slots)
      throw ConfigError("checkpoint: policy shape does not match its environment");
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  write_text_file(path, to_json(c).dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("missing checkpoint: " + path.string());
  return checkpoint_from_json(read_json_file(path));
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string learning_curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "step,mean_reward,std_reward\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p.step, p.mean_reward, p.std_reward);
    out << buf;
  }
  return out.str();
}

std::string eval_curve_csv(const std::vector<EvalPoint>& curve) {
  std::ostringstream out;
  out << "step,eval_reward\n";
  char buf[64];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", p.step, p.reward);
    out << buf;
  }
  return out.str();
}

}  // namespace risauction
