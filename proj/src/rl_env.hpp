#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "auction.hpp"
#include "estimation.hpp"
#include "scenario.hpp"

namespace risauction {

/// What one BS sees before bidding: clock price and remaining budget, both
/// relative to the initial budget, and the normalized marginal value of every
/// RIS slot (zero where it may not bid, zero-padded beyond the RIS count).
struct Observation {
  double price_norm = 0.0;
  double budget_norm = 0.0;
  std::vector<double> values;

  std::size_t size() const { return 2 + values.size(); }
  Eigen::VectorXd to_vector() const;
};

struct RewardComponents {
  double r1 = 0.0;  // value of the bids
  double r2 = 0.0;  // cost of the bids
  double r3 = 0.0;  // overspending penalty
  double total = 0.0;
};

struct EnvConfig {
  ScenarioConfig scenario;
  AuctionParams auction;
  double beta = 2.0;
  std::size_t max_ris_slots = 10;

  void validate() const;
  std::size_t obs_dim() const { return 2 + max_ris_slots; }
};

/// Raw values are indexed by RIS; entries of unavailable RISs are ignored.
Observation build_observation(const Auction& state, std::span<const double> values_raw, std::size_t b,
                              std::size_t slots);

/// R1 - R2 - R3 for one agent's bid vector, evaluated before the round clears.
/// Price and budget are the normalized observation entries.
RewardComponents compute_reward(std::span<const double> obs_values, const BidVector& bids, double price,
                                double budget, double beta);

struct StepResult {
  std::vector<Observation> observations;
  std::vector<RewardComponents> rewards;
  bool done = false;
  RoundOutcome outcome;   // ground truth, never part of an observation
  Allocation allocation;
};

/// Episodic environment in which every agent acts simultaneously.
class MultiAgentEnv {
 public:
  virtual ~MultiAgentEnv() = default;
  virtual std::size_t n_agents() const = 0;
  virtual std::size_t obs_dim() const = 0;
  virtual std::size_t act_dim() const = 0;
  virtual std::vector<Observation> reset(std::uint64_t episode_seed) = 0;
  virtual StepResult step(std::span<const BidVector> actions) = 0;
  virtual bool done() const = 0;
};

/// One full RIS auction per episode on a freshly drawn scenario.
class AuctionEnv final : public MultiAgentEnv {
 public:
  explicit AuctionEnv(EnvConfig cfg);

  std::size_t n_agents() const override { return cfg_.scenario.n_bs; }
  std::size_t obs_dim() const override { return cfg_.obs_dim(); }
  std::size_t act_dim() const override { return cfg_.max_ris_slots; }
  std::vector<Observation> reset(std::uint64_t episode_seed) override;
  /// Starts an episode on a given scenario instead of drawing one.
  std::vector<Observation> reset(Scenario scenario, std::uint64_t episode_seed);
  StepResult step(std::span<const BidVector> actions) override;
  bool done() const override { return done_; }

  const EnvConfig& config() const { return cfg_; }
  const Scenario& scenario() const;
  const Auction& auction() const;
  const std::vector<Observation>& observations() const { return obs_; }

  /// Emits one JSON object per step (observations, actions, rewards).
  void set_trace(std::ostream* out) { trace_ = out; }

 private:
  void refresh_values(std::size_t b);
  std::vector<Observation> observe() const;

  EnvConfig cfg_;
  std::unique_ptr<Scenario> scenario_;
  std::unique_ptr<UtilityModel> model_;
  std::optional<Auction> auction_;
  std::vector<std::vector<double>> raw_values_;
  std::vector<std::size_t> held_;  // RIS count each agent's values were computed for
  std::vector<Observation> obs_;
  bool done_ = true;
  std::size_t steps_ = 0;
  std::uint64_t episode_seed_ = 0;
  std::ostream* trace_ = nullptr;
};

/// Single-agent, single-round auction with fixed RIS values; its optimum is
/// known in closed form, which makes it a convergence check for learners.
class BanditEnv final : public MultiAgentEnv {
 public:
  BanditEnv(std::vector<double> values, double beta, AuctionParams auction = {});

  std::size_t n_agents() const override { return 1; }
  std::size_t obs_dim() const override { return 2 + values_.size(); }
  std::size_t act_dim() const override { return values_.size(); }
  std::vector<Observation> reset(std::uint64_t episode_seed) override;
  StepResult step(std::span<const BidVector> actions) override;
  bool done() const override { return done_; }

  /// Reward of bidding exactly on the positively valued slots.
  double optimal_reward() const;
  Observation observation() const;

 private:
  std::vector<double> values_;
  double beta_;
  AuctionParams auction_;
  bool done_ = true;
};

}  // namespace risauction
