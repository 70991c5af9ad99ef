#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "auction.hpp"
#include "evaluation.hpp"
#include "policy.hpp"
#include "ppo.hpp"
#include "rl_env.hpp"
#include "scenario.hpp"

namespace risauction {

using Json = nlohmann::ordered_json;

/// True for integral JSON numbers >= 0, whether stored signed or unsigned.
inline bool is_non_negative_integer(const Json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

struct EnvSettings {
  double beta = 2.0;
  std::size_t max_ris_slots = 0;  // 0 = number of RISs
};

struct EvalSettings {
  std::size_t n_macro = 200;
  std::size_t n_micro = 20;
  std::vector<double> betas = {0.5, 1.0, 2.0, 3.0, 4.0};
  bool include_heuristics = true;
};

struct AccuracySettings {
  std::vector<std::size_t> m_bs_list = {10, 25, 50, 100};
  std::size_t n_macro = 50;
  std::size_t n_micro = 100;
  std::string interferers = "steered";  // or "isotropic"
  std::string metric = "mean_sinr";      // or "power_ratio"
};

/// Every tunable of a run. JSON sections mirror the members; keys are the
/// field names and unknown keys are rejected.
struct RunConfig {
  ScenarioConfig scenario;
  AuctionParams auction;
  EnvSettings env;
  TrainConfig train;
  EvalSettings evaluation;
  AccuracySettings accuracy;

  void validate() const;
  EnvConfig env_config() const;
  EvalConfig eval_config(std::size_t jobs) const;
  AccuracyConfig accuracy_config(std::size_t jobs) const;
};

Json to_json(const RunConfig& cfg);
/// Overlays `j` onto `cfg`; throws ConfigError on unknown keys or bad types.
/// Values are checked for consistency by RunConfig::validate, not here.
void merge_json(RunConfig& cfg, const Json& j);
/// Defaults overlaid with `j`, validated.
RunConfig run_config_from_json(const Json& j);

Json to_json(const ScenarioConfig& c);
Json to_json(const AuctionParams& c);
Json to_json(const TrainConfig& c);
void merge_json(ScenarioConfig& c, const Json& j);
void merge_json(AuctionParams& c, const Json& j);
void merge_json(TrainConfig& c, const Json& j);

Json to_json(const PolicyParams& p);
PolicyParams policy_from_json(const Json& j);

/// Trained policies for every BS together with what produced them.
struct Checkpoint {
  std::vector<PolicyParams> agents;
  EnvConfig env;
  TrainConfig train;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  double best_eval_reward = 0.0;
  std::string rng_state;
};

inline constexpr const char* kCheckpointFormat = "risauction-policy";
inline constexpr int kCheckpointVersion = 1;

Json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const Json& j);
void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
/// Throws ConfigError when the file is missing or malformed.
Checkpoint load_checkpoint(const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

std::string learning_curve_csv(const std::vector<CurvePoint>& curve);
std::string eval_curve_csv(const std::vector<EvalPoint>& curve);

}  // namespace risauction
