#include "pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <type_traits>

#include "errors.hpp"
#include "rng.hpp"

namespace risauction {

namespace fs = std::filesystem;

namespace {

const char* const kCommands[] = {"accuracy", "train", "evaluate", "tradeoff", "auction-demo"};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>)
    if (!is_non_negative_integer(j.at(key)))
      throw ConfigError(std::string("request.") + key + ": non-negative integer required");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("request.") + key + ": " + e.what());
  }
}

void prepare_output_dir(const fs::path& out, bool overwrite) {
  if (out.empty()) throw ConfigError("request.out: output directory required");
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw IoError(out.string() + " exists and is not a directory");
    if (!fs::is_empty(out) && !overwrite)
      throw StateError("output directory " + out.string() + " is not empty (outputs are write-once; use overwrite)");
  }
  fs::create_directories(out);
}

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}
  void write(const std::string& name, const std::string& text) {
    write_text_file(dir_ / name, text);
    files_.push_back(name);
  }
  fs::path path(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

Json allocation_json(const Allocation& alloc) {
  Json j = Json::array();
  for (std::size_t b = 0; b < alloc.assigned.size(); ++b)
    j.push_back({{"bs", b}, {"ris", alloc.assigned[b]}, {"payments", alloc.payments[b]},
                 {"total_payment", alloc.total_payment(b)}});
  return j;
}

Json summary_of(const StrategyResult& r) {
  return {{"label", r.label}, {"beta", r.beta},           {"sum_rate", r.sum_rate},
          {"cost", r.cost},   {"n_ris", r.n_ris},         {"mean_bid_value", r.mean_bid_value},
          {"sum_rate_hw", r.sum_rate_hw}};
}

Json run_accuracy(const RunConfig& cfg, std::uint64_t seed, std::size_t jobs, Outputs& out) {
  const auto rows = sinr_accuracy_study(cfg.accuracy_config(jobs), seed);
  out.write("sinr_accuracy.csv", accuracy_csv(rows));
  Json s = Json::array();
  for (const auto& r : rows) s.push_back({{"m_bs", r.m_bs}, {"mean_db", r.mean_db}, {"p90_db", r.p90_db}});
  return s;
}

Json run_train(const RunConfig& cfg, std::uint64_t seed, const Json& args, Outputs& out) {
  const bool verbose = get_or<bool>(args, "verbose", false);
  const EnvConfig env = cfg.env_config();
  ProgressFn progress;
  if (verbose)
    progress = [](const CurvePoint& p) {
      std::fprintf(stderr, "step %zu mean_reward %.4f\n", p.step, p.mean_reward);
    };
  TrainResult res = train(env, cfg.train, seed, progress);
  Checkpoint ck;
  ck.agents = std::move(res.policies);
  ck.env = env;
  ck.train = cfg.train;
  ck.seed = seed;
  ck.steps = res.steps;
  ck.best_eval_reward = res.best_eval_reward;
  ck.rng_state = res.rng_state;
  save_checkpoint(ck, out.path("policy.json"));
  out.write("learning_curve.csv", learning_curve_csv(res.learning_curve));
  out.write("eval_curve.csv", eval_curve_csv(res.eval_curve));
  return {{"steps", res.steps}, {"stopped_early", res.stopped_early}, {"best_eval_reward", res.best_eval_reward}};
}

Json run_evaluate(const RunConfig& cfg, std::uint64_t seed, std::size_t jobs, const Json& args, Outputs& out) {
  const auto texts = get_or<std::vector<std::string>>(args, "strategies", {"value-heuristic"});
  if (texts.empty()) throw ConfigError("evaluate: at least one strategy required");
  std::vector<Strategy> strategies;
  for (const auto& t : texts) strategies.push_back(load_strategy(t, cfg.scenario.n_bs));
  const EvalReport report = evaluate_strategies(cfg.eval_config(jobs), strategies, seed);
  out.write("eval_report.csv", eval_report_csv(report));
  Json s = Json::array();
  for (const auto& r : report.strategies) s.push_back(summary_of(r));
  return s;
}

Json run_tradeoff(const RunConfig& cfg, std::uint64_t seed, std::size_t jobs, const Json& args, Outputs& out) {
  const std::string dir = get_or<std::string>(args, "checkpoints", "");
  if (dir.empty() && !cfg.evaluation.betas.empty()) throw ConfigError("tradeoff: checkpoint directory required");
  std::vector<Strategy> strategies;
  for (double beta : cfg.evaluation.betas) {
    const fs::path p = tradeoff_checkpoint_path(dir, beta);
    Strategy st = load_strategy("rl:" + p.string(), cfg.scenario.n_bs);
    char label[64];
    std::snprintf(label, sizeof label, "rl-beta%g", beta);
    st.label = label;
    st.beta = beta;
    strategies.push_back(std::move(st));
  }
  if (cfg.evaluation.include_heuristics)
    for (const char* h : {"value-heuristic", "distance-heuristic", "null"})
      strategies.push_back(load_strategy(h, cfg.scenario.n_bs));
  if (strategies.empty()) throw ConfigError("tradeoff: nothing to evaluate");
  const EvalReport report = evaluate_strategies(cfg.eval_config(jobs), strategies, seed);
  out.write("tradeoff.csv", tradeoff_csv(report));
  out.write("eval_report.csv", eval_report_csv(report));
  Json s = Json::array();
  for (const auto& r : report.strategies) s.push_back(summary_of(r));
  return s;
}

Json run_auction_demo(const RunConfig& cfg, std::uint64_t seed, const Json& args, Outputs& out) {
  const std::string text = get_or<std::string>(args, "bidders", "value-heuristic");
  const Strategy st = load_strategy(text, cfg.scenario.n_bs);
  const Scenario s = generate_scenario(cfg.scenario, derive_seed(seed, "scenario"));
  std::ofstream trace(out.path("auction_trace.jsonl"));
  if (!trace) throw IoError("cannot write auction trace");
  const AuctionRun run = run_auction(s, st.bidders, cfg.auction, &trace);
  out.write("auction_history.csv", run.history_csv);
  Json alloc;
  alloc["bidders"] = text;
  alloc["rounds"] = run.history.size();
  alloc["allocation"] = allocation_json(run.allocation);
  alloc["replayed_payments"] = replay_payments(run.history);
  out.write("allocation.json", alloc.dump(2) + "\n");
  return {{"rounds", run.history.size()}, {"assigned", run.allocation.total_assigned()},
          {"allocation", allocation_json(run.allocation)}};
}

}  // namespace

fs::path tradeoff_checkpoint_path(const fs::path& dir, double beta) {
  char name[64];
  std::snprintf(name, sizeof name, "beta_%g", beta);
  return dir / name / "policy.json";
}

Strategy load_strategy(const std::string& text, std::size_t n_bs) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 1 && parts.size() != n_bs)
    throw ConfigError("strategy '" + text + "': give one spec or one per BS (" + std::to_string(n_bs) + ")");
  std::map<std::string, std::shared_ptr<const Checkpoint>> loaded;
  Strategy st;
  std::vector<std::string> labels;
  for (std::size_t b = 0; b < n_bs; ++b) {
    BidderSpec spec = BidderSpec::parse(parts.size() == 1 ? parts[0] : parts[b]);
    if (spec.kind == BidderKind::rl_policy) {
      auto& ck = loaded[spec.source];
      if (!ck) ck = std::make_shared<const Checkpoint>(load_checkpoint(spec.source));
      if (ck->agents.size() != n_bs)
        throw ConfigError("checkpoint " + spec.source + " holds " + std::to_string(ck->agents.size()) +
                          " agents, scenario has " + std::to_string(n_bs) + " BSs");
      spec.policy = std::shared_ptr<const PolicyParams>(ck, &ck->agents[b]);
      spec.beta = ck->env.beta;
      st.beta = spec.beta;
    }
    labels.push_back(spec.label());
    st.bidders.push_back(std::move(spec));
  }
  if (parts.size() == 1) {
    st.label = labels.front();
  } else {
    for (std::size_t b = 0; b < labels.size(); ++b) st.label += (b ? "+" : "") + labels[b];
  }
  return st;
}

Json run_pipeline(const Json& request) {
  if (!request.is_object()) throw ConfigError("request: expected a JSON object");
  for (const auto& item : request.items()) {
    static const char* const known[] = {"command", "out", "seed", "jobs", "overwrite", "config", "args"};
    if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known))
      throw ConfigError("request: unknown key '" + item.key() + "'");
  }
  const std::string command = get_or<std::string>(request, "command", "");
  if (std::find(std::begin(kCommands), std::end(kCommands), command) == std::end(kCommands))
    throw ConfigError("request: unknown command '" + command + "'");
  if (!request.contains("seed") || !is_non_negative_integer(request.at("seed")))
    throw ConfigError("request.seed: non-negative integer required");
  const std::uint64_t seed = request.at("seed").get<std::uint64_t>();
  const std::size_t jobs = get_or<std::size_t>(request, "jobs", 0);
  const bool overwrite = get_or<bool>(request, "overwrite", false);
  const fs::path out_dir = get_or<std::string>(request, "out", "");
  Json args = request.contains("args") ? request.at("args") : Json::object();
  if (!args.is_object()) throw ConfigError("request.args: expected a JSON object");

  RunConfig cfg;
  if (request.contains("config")) merge_json(cfg, request.at("config"));
  cfg.validate();

  // Checkpoint paths are recorded absolute so a manifest replays from anywhere.
  auto absolutize_spec = [](const std::string& text) {
    std::string joined;
    const auto parts = split(text, ',');
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::string p = parts[i];
      if (p.starts_with("rl:")) p = "rl:" + fs::absolute(p.substr(3)).lexically_normal().string();
      joined += (i ? "," : "") + p;
    }
    return joined;
  };
  if (args.contains("strategies") && args["strategies"].is_array())
    for (auto& s : args["strategies"])
      if (s.is_string()) s = absolutize_spec(s.get<std::string>());
  if (args.contains("bidders") && args["bidders"].is_string())
    args["bidders"] = absolutize_spec(args["bidders"].get<std::string>());
  if (args.contains("checkpoints") && args["checkpoints"].is_string())
    args["checkpoints"] = fs::absolute(args["checkpoints"].get<std::string>()).lexically_normal().string();

  prepare_output_dir(out_dir, overwrite);
  Json manifest;
  manifest["tool"] = "risauction";
  manifest["version"] = RISAUCTION_VERSION;
  manifest["command"] = command;
  manifest["seed"] = seed;
  manifest["out"] = fs::absolute(out_dir).lexically_normal().string();
  manifest["jobs"] = jobs;
  manifest["args"] = args;
  manifest["config"] = to_json(cfg);
  manifest["status"] = "running";
  manifest["started"] = utc_now();
  const fs::path manifest_path = out_dir / "manifest.json";
  write_text_file(manifest_path, manifest.dump(2) + "\n");

  const auto t0 = std::chrono::steady_clock::now();
  Outputs out(out_dir);
  Json summary;
  try {
    if (command == "accuracy") summary = run_accuracy(cfg, seed, jobs, out);
    else if (command == "train") summary = run_train(cfg, seed, args, out);
    else if (command == "evaluate") summary = run_evaluate(cfg, seed, jobs, args, out);
    else if (command == "tradeoff") summary = run_tradeoff(cfg, seed, jobs, args, out);
    else summary = run_auction_demo(cfg, seed, args, out);
  } catch (const std::exception& e) {
    manifest["status"] = "failed";
    manifest["error"] = e.what();
    manifest["finished"] = utc_now();
    write_text_file(manifest_path, manifest.dump(2) + "\n");
    throw;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  manifest["status"] = "complete";
  manifest["finished"] = utc_now();
  manifest["wall_seconds"] = wall;
  manifest["outputs"] = out.files();
  write_text_file(manifest_path, manifest.dump(2) + "\n");

  Json result;
  result["command"] = command;
  result["out"] = manifest["out"];
  result["seed"] = seed;
  result["outputs"] = out.files();
  result["wall_seconds"] = wall;
  result["summary"] = summary;
  return result;
}

Json replay_manifest(const fs::path& manifest, const std::string& out, bool overwrite) {
  const Json m = read_json_file(manifest);
  Json request;
  try {
    request["command"] = m.at("command");
    request["seed"] = m.at("seed");
    request["config"] = m.at("config");
    request["args"] = m.at("args");
    request["jobs"] = m.value("jobs", 0);
    request["out"] = out.empty() ? m.at("out").get<std::string>() : out;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest " + manifest.string() + ": " + e.what());
  }
  request["overwrite"] = overwrite;
  return run_pipeline(request);
}

}  // namespace risauction
