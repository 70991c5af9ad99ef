// Command-line front end. Everything runs through the shared library's C API;
// this file only turns flags into a request document.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "risauction/risauction.h"

using Json = nlohmann::ordered_json;

namespace {

constexpr int kUsageError = 2;

struct Common {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  std::string config_path;
  std::string out;
  bool overwrite = false;
  std::optional<std::size_t> n_bs, n_ue, n_ris, m_bs, m_ris;
  std::optional<std::size_t> n_macro, n_micro;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "root seed (omitted: drawn from entropy and recorded)");
  cmd->add_option("--jobs", c.jobs, "worker threads, 0 = all cores")->capture_default_str();
  cmd->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (default out/<command>-<seed>)");
  cmd->add_flag("--overwrite", c.overwrite, "allow a non-empty output directory");
  cmd->add_option("--n-bs", c.n_bs, "number of base stations");
  cmd->add_option("--n-ue", c.n_ue, "number of users");
  cmd->add_option("--n-ris", c.n_ris, "number of RISs");
  cmd->add_option("--m-bs", c.m_bs, "antennas per base station");
  cmd->add_option("--m-ris", c.m_ris, "elements per RIS");
}

void add_grid(CLI::App* cmd, Common& c) {
  cmd->add_option("--macro", c.n_macro, "macroscopic realizations");
  cmd->add_option("--micro", c.n_micro, "fading realizations per macro draw");
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  return parts;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json load_config(const Common& c) {
  if (c.config_path.empty()) return Json::object();
  std::ifstream in(c.config_path);
  try {
    Json j = Json::parse(in);
    if (!j.is_object()) throw UsageError(c.config_path + ": config must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(c.config_path + ": malformed JSON: " + e.what());
  }
}

template <class T>
void set_if(Json& j, const char* section, const char* key, const std::optional<T>& v) {
  if (v) j[section][key] = *v;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

Json base_request(const std::string& command, const Common& c) {
  Json req;
  const std::uint64_t seed = c.seed ? *c.seed : entropy_seed();
  if (!c.seed) std::fprintf(stderr, "using entropy seed %llu\n", static_cast<unsigned long long>(seed));
  req["command"] = command;
  req["seed"] = seed;
  req["jobs"] = c.jobs;
  req["overwrite"] = c.overwrite;
  req["out"] = c.out.empty() ? "out/" + command + "-" + std::to_string(seed) : c.out;
  Json cfg = load_config(c);
  set_if(cfg, "scenario", "n_bs", c.n_bs);
  set_if(cfg, "scenario", "n_ue", c.n_ue);
  set_if(cfg, "scenario", "n_ris", c.n_ris);
  set_if(cfg, "scenario", "m_bs", c.m_bs);
  set_if(cfg, "scenario", "m_ris", c.m_ris);
  req["config"] = cfg;
  req["args"] = Json::object();
  return req;
}

int report(ra_status st, char* result) {
  if (st != RA_OK) {
    std::fprintf(stderr, "error: %s\n", ra_last_error());
    return (st == RA_ERR_CONFIG || st == RA_ERR_ARGUMENT) ? kUsageError : 1;
  }
  const Json r = Json::parse(result);
  ra_string_free(result);
  std::printf("%s: wrote", r.at("command").get<std::string>().c_str());
  for (const auto& f : r.at("outputs")) std::printf(" %s", f.get<std::string>().c_str());
  std::printf(" to %s (seed %llu, %.1f s)\n", r.at("out").get<std::string>().c_str(),
              static_cast<unsigned long long>(r.at("seed").get<std::uint64_t>()), r.at("wall_seconds").get<double>());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Auction-based RIS allocation simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ra_version()));

  Common common;

  auto* accuracy = app.add_subcommand("accuracy", "estimator accuracy versus BS antenna count");
  add_common(accuracy, common);
  add_grid(accuracy, common);
  std::string mbs, interferers, metric;
  accuracy->add_option("--mbs", mbs, "comma-separated BS antenna counts");
  accuracy->add_option("--interferers", interferers, "interferer beams in the reference: steered or isotropic")
      ->check(CLI::IsMember({"steered", "isotropic"}));
  accuracy->add_option("--metric", metric, "reference SINR: mean_sinr or power_ratio")
      ->check(CLI::IsMember({"mean_sinr", "power_ratio"}));

  auto* train = app.add_subcommand("train", "train one bidding policy per BS");
  add_common(train, common);
  std::optional<double> beta;
  std::optional<std::size_t> steps;
  bool verbose = false;
  train->add_option("--beta", beta, "bid intensity")->check(CLI::PositiveNumber);
  train->add_option("--steps", steps, "total environment steps");
  train->add_flag("--verbose", verbose, "log the learning curve to stderr");

  auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo evaluation of bidding strategies");
  add_common(evaluate, common);
  add_grid(evaluate, common);
  std::vector<std::string> strategies;
  evaluate->add_option("--strategy", strategies,
                       "value-heuristic | distance-heuristic | null | rl:<checkpoint>; comma list = one per BS")
      ->take_all();

  auto* tradeoff = app.add_subcommand("tradeoff", "cost versus sum rate across bid intensities");
  add_common(tradeoff, common);
  add_grid(tradeoff, common);
  std::string betas, checkpoints;
  bool no_heuristics = false;
  tradeoff->add_option("--betas", betas, "comma-separated bid intensities");
  tradeoff->add_option("--checkpoints", checkpoints, "directory with beta_<b>/policy.json")->required();
  tradeoff->add_flag("--no-heuristics", no_heuristics, "skip the heuristic and null bidders");

  auto* demo = app.add_subcommand("auction-demo", "run one auction and write its round history");
  add_common(demo, common);
  std::string bidders = "value-heuristic";
  demo->add_option("--bidders", bidders, "bidder spec, or one per BS separated by commas")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "re-run the request recorded in a manifest");
  std::string manifest, replay_out;
  bool replay_overwrite = false;
  replay->add_option("manifest", manifest, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "output directory (default: the recorded one)");
  replay->add_flag("--overwrite", replay_overwrite, "allow a non-empty output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    char* result = nullptr;
    if (replay->parsed()) {
      const ra_status st =
          ra_replay(manifest.c_str(), replay_out.empty() ? nullptr : replay_out.c_str(), replay_overwrite, &result);
      return report(st, result);
    }

    Json req;
    if (accuracy->parsed()) {
      req = base_request("accuracy", common);
      Json& acc = req["config"]["accuracy"];
      if (!mbs.empty()) {
        Json list = Json::array();
        for (const auto& m : split(mbs)) {
          try {
            list.push_back(std::stoull(m));
          } catch (const std::exception&) {
            throw UsageError("--mbs: '" + m + "' is not an antenna count");
          }
        }
        acc["m_bs_list"] = list;
      }
      if (!interferers.empty()) acc["interferers"] = interferers;
      if (!metric.empty()) acc["metric"] = metric;
      set_if(req["config"], "accuracy", "n_macro", common.n_macro);
      set_if(req["config"], "accuracy", "n_micro", common.n_micro);
    } else if (train->parsed()) {
      req = base_request("train", common);
      set_if(req["config"], "env", "beta", beta);
      set_if(req["config"], "train", "total_steps", steps);
      req["args"]["verbose"] = verbose;
    } else if (evaluate->parsed()) {
      req = base_request("evaluate", common);
      req["args"]["strategies"] = strategies.empty() ? std::vector<std::string>{"value-heuristic"} : strategies;
      set_if(req["config"], "evaluation", "n_macro", common.n_macro);
      set_if(req["config"], "evaluation", "n_micro", common.n_micro);
    } else if (tradeoff->parsed()) {
      req = base_request("tradeoff", common);
      if (!betas.empty()) {
        Json list = Json::array();
        for (const auto& b : split(betas)) {
          try {
            list.push_back(std::stod(b));
          } catch (const std::exception&) {
            throw UsageError("--betas: '" + b + "' is not a number");
          }
        }
        req["config"]["evaluation"]["betas"] = list;
      }
      if (no_heuristics) req["config"]["evaluation"]["include_heuristics"] = false;
      req["args"]["checkpoints"] = checkpoints;
      set_if(req["config"], "evaluation", "n_macro", common.n_macro);
      set_if(req["config"], "evaluation", "n_micro", common.n_micro);
    } else {
      req = base_request("auction-demo", common);
      req["args"]["bidders"] = bidders;
    }
    const std::string text = req.dump();
    const ra_status st = ra_run(text.c_str(), &result);
    return report(st, result);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  }
}
