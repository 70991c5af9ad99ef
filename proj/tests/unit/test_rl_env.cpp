#include <doctest.h>

#include <cmath>
#include <sstream>

#include "auction.hpp"
#include "errors.hpp"
#include "rl_env.hpp"
#include "rng.hpp"

using namespace risauction;

TEST_CASE("reward examples") {
  const double v[] = {0.8, 0.5, 0.0};
  RewardComponents rc = compute_reward(v, {1, 1, 0}, 0.1, 1.0, 2.0);
  CHECK(rc.r1 == doctest::Approx(1.3));
  CHECK(rc.r2 == doctest::Approx(0.4));
  CHECK(rc.r3 == 0.0);
  CHECK(rc.total == doctest::Approx(0.9));

  rc = compute_reward(v, {1, 1, 0}, 0.6, 1.0, 2.0);
  CHECK(rc.r3 == doctest::Approx(0.8));
  CHECK(rc.total == doctest::Approx(1.3 - 2.4 - 0.8));

  rc = compute_reward(v, {0, 0, 0}, 0.6, 1.0, 2.0);
  CHECK(rc.total == 0.0);
  CHECK_THROWS_AS(compute_reward(v, {1, 0}, 0.1, 1.0, 2.0), StructureError);
}

TEST_CASE("reward properties") {
  Rng rng(5);
  for (int k = 0; k < 300; ++k) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<double> v(n);
    BidVector b(n);
    for (std::size_t r = 0; r < n; ++r) {
      v[r] = rng.uniform(-1, 1);
      b[r] = rng.bernoulli(0.5);
    }
    b[0] = 1;
    const double price = rng.uniform(0.05, 1.0), budget = rng.uniform(0, 1);
    double prev = INFINITY;
    for (double beta : {0.25, 0.5, 1.0, 2.0, 3.0, 4.0}) {
      const RewardComponents rc = compute_reward(v, b, price, budget, beta);
      REQUIRE(rc.r2 >= 0.0);
      REQUIRE(rc.r3 >= 0.0);
      REQUIRE(rc.total == doctest::Approx(rc.r1 - rc.r2 - rc.r3));
      REQUIRE(rc.total <= prev);
      prev = rc.total;
    }
  }
}

TEST_CASE("observation construction") {
  Auction a(3, 2, {});
  const double raw[] = {0.7, -0.35, 0.2};
  Observation o = build_observation(a, raw, 0, 5);
  CHECK(o.size() == 7);
  CHECK(o.price_norm == doctest::Approx(0.05));
  CHECK(o.budget_norm == 1.0);
  CHECK(o.values == std::vector<double>{1.0, -0.5, 0.2 / 0.7, 0.0, 0.0});

  a.step(std::vector<BidVector>{{1, 1, 0}, {0, 1, 1}});  // RIS 0 -> BS 0, RIS 2 -> BS 1
  o = build_observation(a, raw, 0, 5);
  CHECK(o.values[0] == 0.0);
  CHECK(o.values[2] == 0.0);
  CHECK(o.values[1] == -1.0);
  CHECK(o.budget_norm == doctest::Approx(0.95));
  CHECK(o.price_norm == doctest::Approx(0.10));

  // BS 1 also bid on RIS 1, BS 0 drops it now; BS 0 may never bid on it again.
  a.step(std::vector<BidVector>{{0, 0, 0}, {0, 1, 0}});
  o = build_observation(a, raw, 0, 5);
  for (double x : o.values) CHECK(x == 0.0);
  CHECK_THROWS_AS(build_observation(a, raw, 0, 2), StructureError);
}

TEST_CASE("masked entries are zero even with positive raw value") {
  Auction a(2, 3, {});
  a.step(std::vector<BidVector>{{0, 1}, {1, 1}, {1, 1}});  // BS 0 drops RIS 0, which stays contested
  const double raw[] = {0.7, 0.1};
  const Observation o = build_observation(a, raw, 0, 2);
  CHECK(o.values[0] == 0.0);
  CHECK(o.values[1] == doctest::Approx(0.1 / 0.7));
}

namespace {

EnvConfig small_env() {
  EnvConfig cfg;
  cfg.scenario.n_ris = 4;
  cfg.scenario.n_ue = 8;
  cfg.scenario.m_bs = 16;
  cfg.scenario.m_ris = 32;
  cfg.max_ris_slots = 6;
  return cfg;
}

}  // namespace

TEST_CASE("environment reset") {
  AuctionEnv env(small_env());
  const auto a = env.reset(11), b = env.reset(11), c = env.reset(12);
  REQUIRE(a.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a[k].values == b[k].values);
    CHECK(a[k].budget_norm == 1.0);
    CHECK(a[k].price_norm == doctest::Approx(0.05));
    CHECK(a[k].size() == env.obs_dim());
    double mx = 0.0;
    for (double x : a[k].values) mx = std::max(mx, std::abs(x));
    const bool all_zero = mx == 0.0;
    CHECK((all_zero || mx == doctest::Approx(1.0)));
    CHECK(a[k].values[4] == 0.0);
    CHECK(a[k].values[5] == 0.0);
  }
  CHECK(a[0].values != c[0].values);
}

TEST_CASE("nobody bidding ends the episode at once") {
  AuctionEnv env(small_env());
  env.reset(3);
  const std::vector<BidVector> none(2, BidVector(6, 0));
  const StepResult r = env.step(none);
  CHECK(r.done);
  CHECK(r.rewards[0].total == 0.0);
  CHECK(r.rewards[1].total == 0.0);
  CHECK_THROWS_AS(env.step(none), StateError);
}

TEST_CASE("scripted episode rewards match hand computation") {
  AuctionEnv env(small_env());
  auto obs = env.reset(21);
  const std::vector<std::vector<BidVector>> script = {
      {{1, 1, 1, 0, 0, 1}, {0, 1, 1, 1, 0, 0}},  // padded slot 5 bid costs but earns nothing
      {{0, 1, 1, 0, 0, 0}, {0, 0, 1, 0, 0, 0}},
      {{0, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}},
  };
  double cumulative[2] = {0, 0}, expected[2] = {0, 0};
  std::size_t step = 0;
  for (const auto& actions : script) {
    for (std::size_t b = 0; b < 2; ++b) {
      double r1 = 0.0, n = 0.0;
      for (std::size_t r = 0; r < 6; ++r)
        if (actions[b][r]) {
          r1 += obs[b].values[r];
          n += 1.0;
        }
      const double cost = obs[b].price_norm * n;
      expected[b] += r1 - 2.0 * cost - 4.0 * std::max(cost - obs[b].budget_norm, 0.0);
    }
    const StepResult r = env.step(actions);
    for (std::size_t b = 0; b < 2; ++b) cumulative[b] += r.rewards[b].total;
    obs = r.observations;
    ++step;
    if (r.done) break;
  }
  CHECK(step == 3);
  CHECK(env.done());
  for (std::size_t b = 0; b < 2; ++b) CHECK(cumulative[b] == doctest::Approx(expected[b]).epsilon(1e-12));
  const Allocation alloc = env.auction().allocation();
  CHECK(alloc.assigned[0] == RisSet{0, 1});
  CHECK(alloc.assigned[1] == RisSet{3});  // RIS 2 is dropped by both in round 3
}

TEST_CASE("winning a RIS updates the next observation") {
  AuctionEnv env(small_env());
  env.reset(8);
  const StepResult r = env.step(std::vector<BidVector>{{1, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0}});
  REQUIRE(r.allocation.assigned[0] == RisSet{0});
  CHECK(r.done);  // every other RIS got zero bids
  CHECK(r.observations[0].values[0] == 0.0);
  CHECK(r.observations[0].budget_norm == doctest::Approx(0.95));

  env.reset(8);
  const StepResult s = env.step(std::vector<BidVector>{{1, 1, 1, 1, 0, 0}, {0, 1, 1, 1, 0, 0}});
  CHECK_FALSE(s.done);
  CHECK(s.observations[0].values[0] == 0.0);
  CHECK(s.observations[0].budget_norm == doctest::Approx(0.95));
  CHECK(s.observations[1].budget_norm == 1.0);
}

TEST_CASE("reward does not depend on the other agent's action") {
  AuctionEnv env(small_env());
  const BidVector mine{1, 0, 1, 1, 0, 0};
  std::vector<double> totals;
  for (const BidVector& other : {BidVector{0, 0, 0, 0, 0, 0}, BidVector{1, 1, 1, 1, 1, 1}, BidVector{0, 1, 0, 1, 0, 0}}) {
    env.reset(5);
    totals.push_back(env.step(std::vector<BidVector>{mine, other}).rewards[0].total);
  }
  CHECK(totals[0] == totals[1]);
  CHECK(totals[0] == totals[2]);
}

TEST_CASE("episodes stay within the round cap and trace JSON lines") {
  AuctionEnv env(small_env());
  std::ostringstream trace;
  env.set_trace(&trace);
  env.reset(2);
  std::size_t steps = 0;
  while (!env.done()) {
    env.step(std::vector<BidVector>(2, BidVector(6, 1)));
    ++steps;
  }
  CHECK(steps <= env.config().auction.round_cap());
  std::istringstream lines(trace.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    CHECK(line.find("\"agents\"") != std::string::npos);
    ++count;
  }
  CHECK(count == steps);
}

TEST_CASE("environment configuration errors") {
  EnvConfig cfg = small_env();
  cfg.beta = 0.0;
  CHECK_THROWS_AS(AuctionEnv{cfg}, ConfigError);
  cfg = small_env();
  cfg.max_ris_slots = 3;
  CHECK_THROWS_AS(AuctionEnv{cfg}, ConfigError);
  AuctionEnv env(small_env());
  CHECK_THROWS_AS(env.step(std::vector<BidVector>(2, BidVector(6, 0))), StateError);
  env.reset(1);
  CHECK_THROWS_AS(env.step(std::vector<BidVector>(2, BidVector(5, 0))), StructureError);
  ScenarioConfig other = small_env().scenario;
  other.n_ris = 5;
  CHECK_THROWS_AS(env.reset(generate_scenario(other, 1), 1), StructureError);
}

TEST_CASE("bandit environment") {
  BanditEnv env({1.0, -1.0}, 2.0);
  CHECK(env.obs_dim() == 4);
  CHECK(env.optimal_reward() == doctest::Approx(1.0 - 2.0 * 0.05));
  env.reset(0);
  const StepResult r = env.step(std::vector<BidVector>{{1, 0}});
  CHECK(r.done);
  CHECK(r.rewards[0].total == doctest::Approx(env.optimal_reward()));
  CHECK_THROWS_AS(env.step(std::vector<BidVector>{{1, 0}}), StateError);
}
