#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "auction.hpp"
#include "policy.hpp"
#include "rl_env.hpp"
#include "scenario.hpp"

namespace risauction {

class Rng;

enum class BidderKind { value_heuristic, distance_heuristic, rl_policy, null_bidder };
enum class PolicyMode { stochastic, deterministic };

/// Bidding strategy of one BS.
struct BidderSpec {
  BidderKind kind = BidderKind::null_bidder;
  std::shared_ptr<const PolicyParams> policy;  // rl_policy only
  double beta = 0.0;                           // bid intensity the policy was trained with
  std::string source;                          // checkpoint path, for labels and manifests

  /// "value-heuristic", "distance-heuristic", "null" or "rl:<checkpoint>".
  /// The rl form leaves `policy` empty; loading is up to the caller.
  static BidderSpec parse(std::string_view text);
  std::string label() const;
  void validate() const;
};

/// Bids on the min(floor(budget / price), #legal) legal RISs of largest value,
/// ties to the lower index.
BidVector value_heuristic_bids(std::span<const double> values, const BidVector& mask, double price, double budget);

/// Same ranking rule on 1 / (dist(bs, ris) + eps).
BidVector distance_heuristic_bids(Point bs, std::span<const Point> ris, const BidVector& mask, double price,
                                  double budget, double eps = 1e-6);

/// Stochastic mode samples each bit from its Bernoulli head; deterministic mode
/// bids where the probability is at least one half.
BidVector policy_bids(const PolicyParams& params, const Observation& obs, PolicyMode mode, Rng& rng);
BidVector policy_bids(const PolicyParams& params, const Observation& obs, PolicyMode mode, std::uint64_t seed);

}  // namespace risauction
