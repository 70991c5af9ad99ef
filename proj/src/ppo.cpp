#include "ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bidders.hpp"
#include "errors.hpp"

namespace risauction {

void TrainConfig::validate() const {
  if (total_steps == 0 || n_steps == 0 || batch_size == 0 || n_epochs == 0 || n_envs == 0)
    throw ConfigError("train: step counts must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(gae_lambda >= 0.0 && gae_lambda <= 1.0))
    throw ConfigError("train: gamma and gae_lambda must lie in [0, 1]");
  if (!(clip_range > 0.0 && clip_range < 1.0)) throw ConfigError("train: clip_range must lie in (0, 1)");
  if (!(learning_rate >= 0.0) || !(adam_eps > 0.0)) throw ConfigError("train: invalid optimizer settings");
  if (!(vf_coef >= 0.0) || !(ent_coef >= 0.0) || !(max_grad_norm > 0.0))
    throw ConfigError("train: loss coefficients must be non-negative");
  if (hidden.empty()) throw ConfigError("train: need at least one hidden layer");
  if (eval_episodes == 0 || patience == 0) throw ConfigError("train: eval_episodes and patience must be positive");
}

Advantages compute_gae(const Trajectory& traj, double gamma, double lambda) {
  const std::size_t n = traj.size();
  if (n == 0) throw ArgumentError("compute_gae: empty trajectory");
  if (traj.values.size() != n || traj.dones.size() != n) throw StructureError("compute_gae: misaligned trajectory");
  Advantages out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_adv = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double next_value = (t + 1 < n) ? traj.values[t + 1] : traj.bootstrap_value;
    const double live = traj.dones[t] ? 0.0 : 1.0;
    const double delta = traj.rewards[t] + gamma * next_value * live - traj.values[t];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[t] = next_adv;
    out.returns[t] = next_adv + traj.values[t];
  }
  return out;
}

Batch Batch::select(std::span<const std::size_t> idx) const {
  Batch b;
  const auto n = static_cast<Eigen::Index>(idx.size());
  b.observations.resize(observations.rows(), n);
  b.actions.resize(actions.rows(), n);
  b.old_log_probs.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto j = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]);
    b.observations.col(i) = observations.col(j);
    b.actions.col(i) = actions.col(j);
    b.old_log_probs[i] = old_log_probs[j];
    b.advantages[i] = advantages[j];
    b.returns[i] = returns[j];
  }
  return b;
}

Batch make_batch(std::span<const Trajectory> trajectories, std::span<const Advantages> advantages) {
  if (trajectories.size() != advantages.size()) throw StructureError("make_batch: advantages per trajectory required");
  std::size_t total = 0;
  for (const auto& t : trajectories) total += t.size();
  if (total == 0) throw ArgumentError("make_batch: no transitions");
  const auto obs_dim = trajectories.front().observations.front().size();
  const auto act_dim = static_cast<Eigen::Index>(trajectories.front().actions.front().size());

  Batch b;
  const auto n = static_cast<Eigen::Index>(total);
  b.observations.resize(obs_dim, n);
  b.actions.resize(act_dim, n);
  b.old_log_probs.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    const Trajectory& t = trajectories[k];
    for (std::size_t i = 0; i < t.size(); ++i, ++col) {
      b.observations.col(col) = t.observations[i];
      for (Eigen::Index j = 0; j < act_dim; ++j) b.actions(j, col) = t.actions[i][static_cast<std::size_t>(j)];
      b.old_log_probs[col] = t.log_probs[i];
      b.advantages[col] = advantages[k].advantages[i];
      b.returns[col] = advantages[k].returns[i];
    }
  }
  return b;
}

LossGradient ppo_loss_gradient(const PolicyParams& params, const Batch& mb, const TrainConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(mb.size());
  if (n == 0) throw ArgumentError("ppo_loss_gradient: empty minibatch");
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::VectorXd adv = mb.advantages;
  if (cfg.normalize_advantage && n > 1) {
    const double mean = adv.mean();
    const double var = (adv.array() - mean).square().sum() / static_cast<double>(n - 1);
    adv = (adv.array() - mean) / (std::sqrt(var) + 1e-8);
  }

  Mlp::Cache actor_cache, critic_cache;
  const Eigen::MatrixXd logits = params.actor.forward(mb.observations, actor_cache);
  const Eigen::MatrixXd values = params.critic.forward(mb.observations, critic_cache);
  const Eigen::MatrixXd probs = logits.unaryExpr([](double z) { return sigmoid(z); });
  const Eigen::MatrixXd softplus_z = logits.unaryExpr([](double z) { return softplus(z); });

  LossGradient out;
  LossStats& st = out.stats;
  Eigen::MatrixXd grad_logits(logits.rows(), n);
  Eigen::MatrixXd grad_values(1, n);
  const double lo = 1.0 - cfg.clip_range, hi = 1.0 + cfg.clip_range;

  for (Eigen::Index i = 0; i < n; ++i) {
    // log pi(a|s) = sum_j a_j z_j - softplus(z_j)
    const double log_prob = (mb.actions.col(i).array() * logits.col(i).array() - softplus_z.col(i).array()).sum();
    const double ratio = std::exp(log_prob - mb.old_log_probs[i]);
    const double a = adv[i];
    const double unclipped = ratio * a;
    const double clipped = std::clamp(ratio, lo, hi) * a;
    st.policy_loss -= std::min(unclipped, clipped) * inv_n;
    if (std::abs(ratio - 1.0) > cfg.clip_range) st.clip_fraction += inv_n;
    st.approx_kl += ((ratio - 1.0) - (log_prob - mb.old_log_probs[i])) * inv_n;

    const double dsurr_dlogp = (unclipped <= clipped) ? unclipped : 0.0;
    grad_logits.col(i) = -inv_n * dsurr_dlogp * (mb.actions.col(i) - probs.col(i));

    // Bernoulli entropy H = softplus(z) - z sigmoid(z), dH/dz = -z s (1 - s)
    const Eigen::ArrayXd z = logits.col(i).array();
    const Eigen::ArrayXd s = probs.col(i).array();
    st.entropy += (softplus_z.col(i).array() - z * s).sum() * inv_n;
    if (cfg.ent_coef != 0.0) grad_logits.col(i).array() += cfg.ent_coef * inv_n * z * s * (1.0 - s);

    const double err = values(0, i) - mb.returns[i];
    st.value_loss += err * err * inv_n;
    grad_values(0, i) = cfg.vf_coef * 2.0 * err * inv_n;
  }
  st.total = st.policy_loss + cfg.vf_coef * st.value_loss - cfg.ent_coef * st.entropy;

  PolicyParams grads = PolicyParams::zeros_like(params);
  params.actor.backward(actor_cache, grad_logits, grads.actor);
  params.critic.backward(critic_cache, grad_values, grads.critic);
  out.gradient = grads.flat();
  return out;
}

AdamOptimizer::AdamOptimizer(std::size_t n_params, double learning_rate, double eps, double beta1, double beta2)
    : lr_(learning_rate),
      eps_(eps),
      beta1_(beta1),
      beta2_(beta2),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_params))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_params))) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (grad.size() != m_.size() || params.size() != m_.size()) throw StructureError("Adam: parameter count mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ / c1;
  params.array() -= step * m_.array() / ((v_.array() / c2).sqrt() + eps_);
}

UpdateStats ppo_update(PolicyParams& params, AdamOptimizer& optimizer, const Batch& batch, const TrainConfig& cfg,
                       Rng& rng) {
  if (batch.size() == 0) throw ArgumentError("ppo_update: empty batch");
  UpdateStats stats;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd flat = params.flat();

  for (std::size_t epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    // Fisher-Yates with the library RNG keeps shuffles reproducible.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const Batch mb = batch.select(std::span(order).subspan(start, stop - start));
      LossGradient lg = ppo_loss_gradient(params, mb, cfg);
      if (!std::isfinite(lg.stats.total) || !lg.gradient.allFinite())
        throw NumericError("ppo_update: non-finite loss or gradient (loss=" + std::to_string(lg.stats.total) + ")");
      const double norm = lg.gradient.norm();
      if (norm > cfg.max_grad_norm) lg.gradient *= cfg.max_grad_norm / (norm + 1e-6);
      optimizer.step(flat, lg.gradient);
      params.set_flat(flat);
      stats.last = lg.stats;
      stats.mean_clip_fraction += lg.stats.clip_fraction;
      stats.mean_approx_kl += lg.stats.approx_kl;
      ++stats.minibatches;
    }
  }
  if (!params.is_finite()) throw NumericError("ppo_update: parameters became non-finite");
  stats.mean_clip_fraction /= static_cast<double>(stats.minibatches);
  stats.mean_approx_kl /= static_cast<double>(stats.minibatches);
  return stats;
}

RolloutCollector::RolloutCollector(const EnvFactory& make_env, std::size_t n_envs, std::uint64_t seed)
    : seed_(seed), rng_(seed, "rollout") {
  if (n_envs == 0) throw ConfigError("RolloutCollector: need at least one environment");
  for (std::size_t e = 0; e < n_envs; ++e) envs_.push_back(make_env());
  n_agents_ = envs_.front()->n_agents();
  episodes_.assign(n_envs, 0);
  obs_.resize(n_envs);
  running_return_.assign(n_envs, std::vector<double>(n_agents_, 0.0));
  for (std::size_t e = 0; e < n_envs; ++e) obs_[e] = envs_[e]->reset(derive_seed(seed_, "episode", (e << 32) | episodes_[e]));
}

RolloutCollector::Result RolloutCollector::collect(std::span<const PolicyParams* const> policies, std::size_t n_steps) {
  if (policies.size() != n_agents_) throw StructureError("collect: one policy per agent required");
  Result res;
  res.per_agent.assign(n_agents_, std::vector<Trajectory>(envs_.size()));

  for (std::size_t e = 0; e < envs_.size(); ++e) {
    MultiAgentEnv& env = *envs_[e];
    for (std::size_t t = 0; t < n_steps; ++t) {
      std::vector<BidVector> actions(n_agents_);
      for (std::size_t a = 0; a < n_agents_; ++a) {
        const Eigen::VectorXd x = obs_[e][a].to_vector();
        const Eigen::VectorXd logits = policies[a]->actor.forward(x);
        const double value = policies[a]->critic.forward(x)(0, 0);
        BidVector bits(static_cast<std::size_t>(logits.size()));
        for (std::size_t j = 0; j < bits.size(); ++j) bits[j] = rng_.bernoulli(sigmoid(logits[static_cast<Eigen::Index>(j)]));
        Trajectory& tr = res.per_agent[a][e];
        tr.observations.push_back(x);
        tr.log_probs.push_back(bernoulli_log_prob(logits, bits));
        tr.values.push_back(value);
        tr.actions.push_back(bits);
        actions[a] = std::move(bits);
      }
      StepResult step = env.step(actions);
      for (std::size_t a = 0; a < n_agents_; ++a) {
        Trajectory& tr = res.per_agent[a][e];
        tr.rewards.push_back(step.rewards[a].total);
        tr.dones.push_back(step.done ? 1 : 0);
        running_return_[e][a] += step.rewards[a].total;
      }
      if (step.done) {
        double mean = 0.0;
        for (double r : running_return_[e]) mean += r;
        res.episode_returns.push_back(mean / static_cast<double>(n_agents_));
        std::fill(running_return_[e].begin(), running_return_[e].end(), 0.0);
        ++episodes_[e];
        obs_[e] = env.reset(derive_seed(seed_, "episode", (e << 32) | episodes_[e]));
      } else {
        obs_[e] = std::move(step.observations);
      }
    }
    for (std::size_t a = 0; a < n_agents_; ++a)
      res.per_agent[a][e].bootstrap_value = policies[a]->critic.forward(obs_[e][a].to_vector())(0, 0);
  }
  return res;
}

double evaluate_policies(MultiAgentEnv& env, std::span<const PolicyParams* const> policies, std::size_t episodes,
                         std::uint64_t seed) {
  if (policies.size() != env.n_agents()) throw StructureError("evaluate_policies: one policy per agent required");
  double total = 0.0;
  Rng unused(seed, "eval-policy");
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    std::vector<Observation> obs = env.reset(derive_seed(seed, "eval-episode", ep));
    bool done = false;
    while (!done) {
      std::vector<BidVector> actions;
      for (std::size_t a = 0; a < env.n_agents(); ++a)
        actions.push_back(policy_bids(*policies[a], obs[a], PolicyMode::deterministic, unused));
      StepResult step = env.step(actions);
      for (const auto& r : step.rewards) total += r.total;
      done = step.done;
      obs = std::move(step.observations);
    }
  }
  return total / static_cast<double>(episodes * env.n_agents());
}

namespace {

CurvePoint summarize(std::size_t step, const std::vector<double>& returns) {
  CurvePoint p;
  p.step = step;
  if (returns.empty()) return p;
  p.mean_reward = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
  double var = 0.0;
  for (double r : returns) var += (r - p.mean_reward) * (r - p.mean_reward);
  p.std_reward = std::sqrt(var / static_cast<double>(returns.size()));
  return p;
}

}  // namespace

TrainResult train(const EnvFactory& make_env, const TrainConfig& cfg, std::uint64_t seed, const ProgressFn& progress) {
  cfg.validate();
  RolloutCollector collector(make_env, cfg.n_envs, seed);
  auto eval_env = make_env();
  const std::size_t n_agents = collector.n_agents();
  const std::size_t n_learners = cfg.share_parameters ? 1 : n_agents;

  std::vector<PolicyParams> learners;
  std::vector<AdamOptimizer> optimizers;
  for (std::size_t k = 0; k < n_learners; ++k) {
    Rng init(seed, "init", k);
    learners.push_back(PolicyParams::create(eval_env->obs_dim(), eval_env->act_dim(), cfg.hidden, init));
    optimizers.emplace_back(learners.back().parameter_count(), cfg.learning_rate, cfg.adam_eps);
  }
  auto acting = [&] {
    std::vector<const PolicyParams*> ptrs;
    for (std::size_t a = 0; a < n_agents; ++a) ptrs.push_back(&learners[cfg.share_parameters ? 0 : a]);
    return ptrs;
  };

  TrainResult result;
  Rng update_rng(seed, "minibatch");
  const std::size_t per_rollout = cfg.n_steps * cfg.n_envs;
  const std::size_t eval_every = cfg.eval_interval == 0 ? per_rollout : cfg.eval_interval;
  std::size_t next_eval = eval_every;
  std::size_t stale = 0;
  bool have_best = false;
  std::vector<PolicyParams> best = learners;

  while (result.steps < cfg.total_steps) {
    const auto policies = acting();
    RolloutCollector::Result ro = collector.collect(policies, cfg.n_steps);
    result.steps += per_rollout;

    for (std::size_t k = 0; k < n_learners; ++k) {
      std::vector<Trajectory> trajs;
      for (std::size_t a = 0; a < n_agents; ++a) {
        if (!cfg.share_parameters && a != k) continue;
        for (auto& t : ro.per_agent[a]) trajs.push_back(std::move(t));
      }
      std::vector<Advantages> advs;
      for (const auto& t : trajs) advs.push_back(compute_gae(t, cfg.gamma, cfg.gae_lambda));
      ppo_update(learners[k], optimizers[k], make_batch(trajs, advs), cfg, update_rng);
    }

    const CurvePoint point = summarize(result.steps, ro.episode_returns);
    result.learning_curve.push_back(point);
    if (progress) progress(point);

    if (result.steps >= next_eval) {
      next_eval += eval_every;
      const auto ptrs = acting();
      const double reward = evaluate_policies(*eval_env, ptrs, cfg.eval_episodes, derive_seed(seed, "eval"));
      result.eval_curve.push_back({result.steps, reward});
      if (!have_best || reward > result.best_eval_reward + cfg.min_improvement) {
        have_best = true;
        result.best_eval_reward = reward;
        best = learners;
        stale = 0;
      } else if (++stale >= cfg.patience) {
        result.stopped_early = true;
        break;
      }
    }
  }
  if (!have_best) best = learners;

  for (std::size_t a = 0; a < n_agents; ++a) result.policies.push_back(best[cfg.share_parameters ? 0 : a]);
  result.rng_state = update_rng.state();
  return result;
}

TrainResult train(const EnvConfig& env_cfg, const TrainConfig& cfg, std::uint64_t seed, const ProgressFn& progress) {
  env_cfg.validate();
  return train([env_cfg] { return std::make_unique<AuctionEnv>(env_cfg); }, cfg, seed, progress);
}

}  // namespace risauction
