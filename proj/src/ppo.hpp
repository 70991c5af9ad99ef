#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "auction.hpp"
#include "policy.hpp"
#include "rl_env.hpp"
#include "rng.hpp"

namespace risauction {

/// Clipped policy-gradient settings; defaults follow the common reference
/// implementation (64x64 tanh MLPs, 2048-step rollouts, 10 epochs of 64-sample
/// minibatches).
struct TrainConfig {
  std::size_t total_steps = 3'000'000;
  std::size_t n_steps = 2048;       // rollout length per environment
  std::size_t batch_size = 64;      // minibatch size
  std::size_t n_epochs = 10;
  std::size_t n_envs = 1;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_range = 0.2;
  double learning_rate = 3e-4;
  double adam_eps = 1e-5;
  double vf_coef = 0.5;
  double ent_coef = 0.0;
  double max_grad_norm = 0.5;
  bool normalize_advantage = true;
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t eval_interval = 0;    // steps between evaluations; 0 = once per rollout
  std::size_t eval_episodes = 10;
  std::size_t patience = 5;         // evaluations without improvement before stopping
  double min_improvement = 1e-3;
  bool share_parameters = false;

  void validate() const;
};

/// One environment's rollout for one agent. dones[t] marks that the episode
/// ended after step t; bootstrap_value is V of the observation after the
/// last step (ignored when that step ended an episode).
struct Trajectory {
  std::vector<Eigen::VectorXd> observations;
  std::vector<BidVector> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  double bootstrap_value = 0.0;

  std::size_t size() const { return rewards.size(); }
};

struct Advantages {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation; advantages are returned unnormalized.
Advantages compute_gae(const Trajectory& traj, double gamma, double lambda);

/// Flattened training batch; one column per transition.
struct Batch {
  Eigen::MatrixXd observations;  // obs_dim x N
  Eigen::MatrixXd actions;       // act_dim x N, entries 0/1
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  std::size_t size() const { return static_cast<std::size_t>(old_log_probs.size()); }
  Batch select(std::span<const std::size_t> idx) const;
};

Batch make_batch(std::span<const Trajectory> trajectories, std::span<const Advantages> advantages);

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double total = 0.0;
};

struct LossGradient {
  LossStats stats;
  Eigen::VectorXd gradient;  // matches PolicyParams::flat()
};

/// Loss  -mean(min(rho A, clip(rho) A)) + vf_coef mean((R - V)^2) - ent_coef mean(H)
/// and its gradient on one minibatch. Advantages are standardized first when
/// enabled and the minibatch holds more than one sample.
LossGradient ppo_loss_gradient(const PolicyParams& params, const Batch& minibatch, const TrainConfig& cfg);

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t n_params, double learning_rate, double eps = 1e-5, double beta1 = 0.9,
                double beta2 = 0.999);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  double learning_rate() const { return lr_; }

 private:
  double lr_, eps_, beta1_, beta2_;
  std::size_t t_ = 0;
  Eigen::VectorXd m_, v_;
};

struct UpdateStats {
  LossStats last;
  double mean_clip_fraction = 0.0;
  double mean_approx_kl = 0.0;
  std::size_t minibatches = 0;
};

/// Epochs of shuffled minibatch steps with global gradient-norm clipping.
/// Throws NumericError on a non-finite loss or parameters.
UpdateStats ppo_update(PolicyParams& params, AdamOptimizer& optimizer, const Batch& batch, const TrainConfig& cfg,
                       Rng& rng);

using EnvFactory = std::function<std::unique_ptr<MultiAgentEnv>()>;

/// Steps a set of environments with the current policies, auto-resetting
/// finished episodes, and keeps the environments alive across calls.
class RolloutCollector {
 public:
  RolloutCollector(const EnvFactory& make_env, std::size_t n_envs, std::uint64_t seed);

  std::size_t n_agents() const { return n_agents_; }
  std::size_t n_envs() const { return envs_.size(); }

  struct Result {
    std::vector<std::vector<Trajectory>> per_agent;  // [agent][env]
    std::vector<double> episode_returns;             // finished episodes, mean over agents
  };

  /// policies[a] acts for agent a; exactly n_steps transitions per env and agent.
  Result collect(std::span<const PolicyParams* const> policies, std::size_t n_steps);

 private:
  std::vector<std::unique_ptr<MultiAgentEnv>> envs_;
  std::vector<std::vector<Observation>> obs_;
  std::vector<std::vector<double>> running_return_;
  std::vector<std::uint64_t> episodes_;
  std::size_t n_agents_ = 0;
  std::uint64_t seed_;
  Rng rng_;
};

/// Mean episodic return (averaged over agents) of deterministic policies.
double evaluate_policies(MultiAgentEnv& env, std::span<const PolicyParams* const> policies, std::size_t episodes,
                         std::uint64_t seed);

struct CurvePoint {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
};

struct EvalPoint {
  std::size_t step = 0;
  double reward = 0.0;
};

struct TrainResult {
  std::vector<PolicyParams> policies;  // best evaluation checkpoint, one per agent
  std::vector<CurvePoint> learning_curve;
  std::vector<EvalPoint> eval_curve;
  std::size_t steps = 0;
  bool stopped_early = false;
  double best_eval_reward = 0.0;
  std::string rng_state;
};

using ProgressFn = std::function<void(const CurvePoint&)>;

TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg, std::uint64_t seed,
                  const ProgressFn& progress = {});
TrainResult train(const EnvConfig& env_cfg, const TrainConfig& cfg, std::uint64_t seed,
                  const ProgressFn& progress = {});

}  // namespace risauction
