#include "rl_env.hpp"

#include <json.hpp>
#include <ostream>

#include "errors.hpp"
#include "rng.hpp"

namespace risauction {

Eigen::VectorXd Observation::to_vector() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
  v[0] = price_norm;
  v[1] = budget_norm;
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i + 2)] = values[i];
  return v;
}

void EnvConfig::validate() const {
  scenario.validate();
  auction.validate();
  if (!(beta > 0.0)) throw ConfigError("env: beta must be positive");
  if (max_ris_slots < scenario.n_ris) throw ConfigError("env: max_ris_slots must cover n_ris");
}

Observation build_observation(const Auction& state, std::span<const double> values_raw, std::size_t b,
                              std::size_t slots) {
  const std::size_t n = state.n_ris();
  if (values_raw.size() != n) throw StructureError("build_observation: one raw value per RIS required");
  if (slots < n) throw StructureError("build_observation: fewer slots than RISs");

  std::vector<double> available(n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    if (state.ris(r).status == RisStatus::contested) available[r] = values_raw[r];
  std::vector<double> normalized = normalize_values(available);

  const BidVector mask = state.legal_bid_mask(b);
  Observation obs;
  obs.price_norm = state.price() / state.params().budget;
  obs.budget_norm = state.budget(b) / state.params().budget;
  obs.values.assign(slots, 0.0);
  for (std::size_t r = 0; r < n; ++r) obs.values[r] = mask[r] ? normalized[r] : 0.0;
  return obs;
}

RewardComponents compute_reward(std::span<const double> obs_values, const BidVector& bids, double price,
                                double budget, double beta) {
  if (obs_values.size() != bids.size()) throw StructureError("compute_reward: values and bids must align");
  RewardComponents rc;
  double count = 0.0;
  for (std::size_t r = 0; r < bids.size(); ++r) {
    if (!bids[r]) continue;
    rc.r1 += obs_values[r];
    count += 1.0;
  }
  rc.r2 = beta * price * count;
  rc.r3 = 2.0 * beta * std::max(price * count - budget, 0.0);
  rc.total = rc.r1 - rc.r2 - rc.r3;
  return rc;
}

AuctionEnv::AuctionEnv(EnvConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

const Scenario& AuctionEnv::scenario() const {
  if (!scenario_) throw StateError("AuctionEnv: reset() has not been called");
  return *scenario_;
}

const Auction& AuctionEnv::auction() const {
  if (!auction_) throw StateError("AuctionEnv: reset() has not been called");
  return *auction_;
}

void AuctionEnv::refresh_values(std::size_t b) {
  const Allocation alloc = auction_->allocation();
  const RisSet& current = alloc.assigned[b];
  const std::vector<std::size_t> available = auction_->contested();
  const std::vector<double> v = model_->marginal_values(b, current, available);
  auto& raw = raw_values_[b];
  raw.assign(auction_->n_ris(), 0.0);
  for (std::size_t i = 0; i < available.size(); ++i) raw[available[i]] = v[i];
  held_[b] = current.size();
}

std::vector<Observation> AuctionEnv::observe() const {
  std::vector<Observation> out;
  for (std::size_t b = 0; b < n_agents(); ++b)
    out.push_back(build_observation(*auction_, raw_values_[b], b, cfg_.max_ris_slots));
  return out;
}

std::vector<Observation> AuctionEnv::reset(std::uint64_t episode_seed) {
  return reset(generate_scenario(cfg_.scenario, derive_seed(episode_seed, "env-scenario")), episode_seed);
}

std::vector<Observation> AuctionEnv::reset(Scenario scenario, std::uint64_t episode_seed) {
  if (scenario.n_bs() != cfg_.scenario.n_bs || scenario.n_ris() != cfg_.scenario.n_ris)
    throw StructureError("AuctionEnv::reset: scenario does not match the configured BS/RIS counts");
  episode_seed_ = episode_seed;
  model_.reset();
  scenario_ = std::make_unique<Scenario>(std::move(scenario));
  model_ = std::make_unique<UtilityModel>(*scenario_);
  auction_.emplace(cfg_.scenario.n_ris, cfg_.scenario.n_bs, cfg_.auction);
  raw_values_.assign(n_agents(), {});
  held_.assign(n_agents(), 0);
  for (std::size_t b = 0; b < n_agents(); ++b) refresh_values(b);
  obs_ = observe();
  done_ = false;
  steps_ = 0;
  return obs_;
}

StepResult AuctionEnv::step(std::span<const BidVector> actions) {
  if (done_) throw StateError("AuctionEnv::step: episode is done; call reset()");
  if (actions.size() != n_agents()) throw StructureError("AuctionEnv::step: one action per agent required");

  StepResult res;
  std::vector<BidVector> bids(n_agents());
  for (std::size_t b = 0; b < n_agents(); ++b) {
    if (actions[b].size() != act_dim()) throw StructureError("AuctionEnv::step: action length must equal slot count");
    const Observation& o = obs_[b];
    res.rewards.push_back(compute_reward(o.values, actions[b], o.price_norm, o.budget_norm, cfg_.beta));
    bids[b].assign(actions[b].begin(), actions[b].begin() + static_cast<std::ptrdiff_t>(cfg_.scenario.n_ris));
  }

  res.outcome = auction_->step(bids);
  res.allocation = auction_->allocation();
  for (std::size_t b = 0; b < n_agents(); ++b)
    if (res.allocation.assigned[b].size() != held_[b]) refresh_values(b);

  const std::vector<Observation> previous = std::move(obs_);
  obs_ = observe();
  done_ = auction_->is_terminated();
  res.observations = obs_;
  res.done = done_;

  if (trace_) {
    nlohmann::json rec;
    rec["episode_seed"] = episode_seed_;
    rec["step"] = steps_;
    rec["round"] = res.outcome.round;
    rec["price"] = res.outcome.price;
    for (std::size_t b = 0; b < n_agents(); ++b) {
      nlohmann::json agent;
      const Eigen::VectorXd flat = previous[b].to_vector();
      agent["observation"] = std::vector<double>(flat.data(), flat.data() + flat.size());
      agent["action"] = std::vector<int>(actions[b].begin(), actions[b].end());
      agent["reward"] = {{"r1", res.rewards[b].r1}, {"r2", res.rewards[b].r2}, {"r3", res.rewards[b].r3},
                         {"total", res.rewards[b].total}};
      rec["agents"].push_back(agent);
    }
    rec["done"] = done_;
    *trace_ << rec.dump() << '\n';
  }
  ++steps_;
  return res;
}

BanditEnv::BanditEnv(std::vector<double> values, double beta, AuctionParams auction)
    : values_(std::move(values)), beta_(beta), auction_(auction) {
  if (values_.empty()) throw ConfigError("BanditEnv: need at least one value");
  if (values_.size() > 20) throw ConfigError("BanditEnv: at most 20 slots");
  if (!(beta_ > 0.0)) throw ConfigError("BanditEnv: beta must be positive");
  auction_.validate();
}

Observation BanditEnv::observation() const {
  return {auction_.initial_price / auction_.budget, 1.0, values_};
}

std::vector<Observation> BanditEnv::reset(std::uint64_t) {
  done_ = false;
  return {observation()};
}

StepResult BanditEnv::step(std::span<const BidVector> actions) {
  if (done_) throw StateError("BanditEnv::step: episode is done; call reset()");
  if (actions.size() != 1 || actions[0].size() != values_.size())
    throw StructureError("BanditEnv::step: expected one action of slot length");
  const Observation o = observation();
  StepResult res;
  res.rewards.push_back(compute_reward(o.values, actions[0], o.price_norm, o.budget_norm, beta_));
  res.observations.push_back(o);
  res.done = done_ = true;
  return res;
}

double BanditEnv::optimal_reward() const {
  const Observation o = observation();
  double best = 0.0;
  const std::size_t n = values_.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    BidVector bits(n);
    for (std::size_t i = 0; i < n; ++i) bits[i] = (mask >> i) & 1u;
    best = std::max(best, compute_reward(o.values, bits, o.price_norm, o.budget_norm, beta_).total);
  }
  return best;
}

}  // namespace risauction
