#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bidders.hpp"
#include "errors.hpp"
#include "policy.hpp"
#include "rng.hpp"

using namespace risauction;

TEST_CASE("value heuristic examples") {
  const double v3[] = {0.9, 0.5, -0.2};
  CHECK(value_heuristic_bids(v3, {1, 1, 1}, 0.05, 0.12) == BidVector{1, 1, 0});
  std::vector<double> v10(10, 0.3);
  CHECK(value_heuristic_bids(v10, BidVector(10, 1), 0.05, 1.0) == BidVector(10, 1));
  CHECK(value_heuristic_bids(v3, {1, 1, 1}, 0.05, 0.04) == BidVector{0, 0, 0});
  // Budget exactly divisible despite rounding of the clock.
  CHECK(value_heuristic_bids(v3, {1, 1, 1}, 0.1 + 0.2, 0.6) == BidVector{1, 1, 0});
  // Negative values are still bid on when the budget allows.
  const double neg[] = {-0.5, -0.1};
  CHECK(value_heuristic_bids(neg, {1, 1}, 0.05, 0.05) == BidVector{0, 1});
  CHECK_THROWS_AS(value_heuristic_bids(v3, {1, 1, 1}, 0.0, 1.0), ArgumentError);
}

TEST_CASE("value heuristic ties and masking") {
  const double tie[] = {0.5, 0.7, 0.7, 0.7};
  CHECK(value_heuristic_bids(tie, {1, 1, 1, 1}, 0.5, 1.0) == BidVector{0, 1, 1, 0});
  CHECK(value_heuristic_bids(tie, {1, 0, 1, 1}, 0.5, 1.0) == BidVector{0, 0, 1, 1});
}

TEST_CASE("heuristic properties on random inputs") {
  Rng rng(7);
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<double> v(n);
    BidVector mask(n);
    for (std::size_t r = 0; r < n; ++r) {
      v[r] = rng.uniform(-1, 1);
      mask[r] = rng.bernoulli(0.6);
    }
    const double price = 0.05 * (1 + rng.below(20)), budget = rng.uniform(0, 1);
    const BidVector b = value_heuristic_bids(v, mask, price, budget);
    const auto count = std::accumulate(b.begin(), b.end(), 0);
    REQUIRE(count <= std::floor(budget / price + 1e-9));
    for (std::size_t r = 0; r < n; ++r) REQUIRE(b[r] <= mask[r]);
    REQUIRE(value_heuristic_bids(v, mask, price, budget) == b);
  }
}

TEST_CASE("distance heuristic") {
  const Point bs{0, 50};
  const Point two[] = {{50, 50}, {10, 50}};
  CHECK(distance_heuristic_bids(bs, two, {1, 1}, 0.5, 0.6) == BidVector{0, 1});
  const Point same[] = {{0, 50}, {1, 50}};
  CHECK(distance_heuristic_bids(bs, same, {1, 1}, 0.5, 0.6) == BidVector{1, 0});
  CHECK_THROWS_AS(distance_heuristic_bids(bs, same, {1, 1}, 0.5, 0.6, 0.0), ArgumentError);

  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    std::vector<Point> ris(8);
    for (auto& p : ris) p = {rng.uniform(0, 100), rng.uniform(0, 100)};
    const std::size_t budget_slots = 1 + rng.below(8);
    const BidVector b = distance_heuristic_bids(bs, ris, BidVector(8, 1), 0.1, 0.1 * budget_slots + 1e-12);
    std::vector<std::size_t> order(8);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return distance(bs, ris[i]) < distance(bs, ris[j]); });
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(b[order[i]] == (i < budget_slots ? 1 : 0));
  }
}

TEST_CASE("bidder spec parsing and labels") {
  CHECK(BidderSpec::parse("value-heuristic").kind == BidderKind::value_heuristic);
  CHECK(BidderSpec::parse("distance").kind == BidderKind::distance_heuristic);
  CHECK(BidderSpec::parse("null").kind == BidderKind::null_bidder);
  const BidderSpec rl = BidderSpec::parse("rl:out/policy.json");
  CHECK(rl.kind == BidderKind::rl_policy);
  CHECK(rl.source == "out/policy.json");
  CHECK_THROWS_AS(rl.validate(), ConfigError);
  CHECK_THROWS_AS(BidderSpec::parse("rl:"), ConfigError);
  CHECK_THROWS_AS(BidderSpec::parse("greedy"), ConfigError);
  BidderSpec p = rl;
  p.beta = 2.0;
  CHECK(p.label() == "rl-beta2");
  CHECK(BidderSpec::parse("value").label() == "value-heuristic");
}

namespace {

// Actor whose logits equal a fixed bias vector, regardless of the observation.
PolicyParams fixed_logit_policy(const std::vector<double>& logits) {
  Rng rng(1);
  PolicyParams p = PolicyParams::create(2 + logits.size(), logits.size(), {4}, rng);
  p.actor.layers.back().weight.setZero();
  for (std::size_t i = 0; i < logits.size(); ++i) p.actor.layers.back().bias[Eigen::Index(i)] = logits[i];
  return p;
}

}  // namespace

TEST_CASE("policy bids") {
  const Observation obs{0.05, 1.0, {0.3, -0.2}};
  SUBCASE("near-zero probabilities") {
    const PolicyParams p = fixed_logit_policy({-60.0, -60.0});
    CHECK(policy_bids(p, obs, PolicyMode::deterministic, 1) == BidVector{0, 0});
    CHECK(policy_bids(p, obs, PolicyMode::stochastic, 1) == BidVector{0, 0});
  }
  SUBCASE("deterministic threshold") {
    const PolicyParams p = fixed_logit_policy({std::log(0.9 / 0.1), std::log(0.4 / 0.6)});
    CHECK(policy_bids(p, obs, PolicyMode::deterministic, 1) == BidVector{1, 0});
    const PolicyParams half = fixed_logit_policy({0.0, -1e-9});
    CHECK(policy_bids(half, obs, PolicyMode::deterministic, 1) == BidVector{1, 0});
  }
  SUBCASE("stochastic frequencies") {
    const PolicyParams p = fixed_logit_policy({std::log(0.9 / 0.1), std::log(0.4 / 0.6)});
    CHECK(policy_bids(p, obs, PolicyMode::stochastic, 5) == policy_bids(p, obs, PolicyMode::stochastic, 5));
    Rng rng(9);
    const int n = 10000;
    int ones[2] = {0, 0};
    for (int k = 0; k < n; ++k) {
      const BidVector b = policy_bids(p, obs, PolicyMode::stochastic, rng);
      ones[0] += b[0];
      ones[1] += b[1];
    }
    const double probs[2] = {0.9, 0.4};
    for (int i = 0; i < 2; ++i) CHECK(std::abs(ones[i] - n * probs[i]) < 3 * std::sqrt(n * probs[i] * (1 - probs[i])));
  }
  SUBCASE("dimension mismatch") {
    const PolicyParams p = fixed_logit_policy({0.0, 0.0, 0.0});
    CHECK_THROWS_AS(policy_bids(p, obs, PolicyMode::deterministic, 1), StructureError);
  }
}
