#include "bidders.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"
#include "rng.hpp"

namespace risauction {

namespace {

BidVector rank_and_bid(std::span<const double> scores, const BidVector& mask, double price, double budget) {
  if (!(price > 0.0)) throw ArgumentError("heuristic bidding: price must be positive");
  if (scores.size() != mask.size()) throw StructureError("heuristic bidding: scores and mask must align");

  std::vector<std::size_t> legal;
  for (std::size_t r = 0; r < mask.size(); ++r)
    if (mask[r]) legal.push_back(r);
  const double affordable = std::floor(std::max(budget, 0.0) / price + kBudgetTolerance);
  const std::size_t k = std::min(legal.size(), static_cast<std::size_t>(affordable));

  std::stable_sort(legal.begin(), legal.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  BidVector bids(mask.size(), 0);
  for (std::size_t i = 0; i < k; ++i) bids[legal[i]] = 1;
  return bids;
}

}  // namespace

BidderSpec BidderSpec::parse(std::string_view text) {
  BidderSpec spec;
  if (text == "value-heuristic" || text == "value") {
    spec.kind = BidderKind::value_heuristic;
  } else if (text == "distance-heuristic" || text == "distance") {
    spec.kind = BidderKind::distance_heuristic;
  } else if (text == "null" || text == "none" || text == "without-ris") {
    spec.kind = BidderKind::null_bidder;
  } else if (text.starts_with("rl:")) {
    spec.kind = BidderKind::rl_policy;
    spec.source = std::string(text.substr(3));
    if (spec.source.empty()) throw ConfigError("bidder spec 'rl:' needs a checkpoint path");
  } else {
    throw ConfigError("unknown bidder spec '" + std::string(text) + "'");
  }
  return spec;
}

std::string BidderSpec::label() const {
  switch (kind) {
    case BidderKind::value_heuristic: return "value-heuristic";
    case BidderKind::distance_heuristic: return "distance-heuristic";
    case BidderKind::null_bidder: return "null";
    case BidderKind::rl_policy: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "rl-beta%g", beta);
      return buf;
    }
  }
  return "unknown";
}

void BidderSpec::validate() const {
  if (kind != BidderKind::rl_policy) return;
  if (!policy) throw ConfigError("rl bidder without loaded policy");
  if (!(beta > 0.0)) throw ConfigError("rl bidder needs beta > 0");
}

BidVector value_heuristic_bids(std::span<const double> values, const BidVector& mask, double price, double budget) {
  return rank_and_bid(values, mask, price, budget);
}

BidVector distance_heuristic_bids(Point bs, std::span<const Point> ris, const BidVector& mask, double price,
                                  double budget, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("distance heuristic: eps must be positive");
  std::vector<double> scores(ris.size());
  for (std::size_t r = 0; r < ris.size(); ++r) scores[r] = 1.0 / (distance(bs, ris[r]) + eps);
  return rank_and_bid(scores, mask, price, budget);
}

BidVector policy_bids(const PolicyParams& params, const Observation& obs, PolicyMode mode, Rng& rng) {
  const PolicyOutput out = policy_forward(params, obs.to_vector());
  BidVector bits(static_cast<std::size_t>(out.probabilities.size()), 0);
  for (std::size_t r = 0; r < bits.size(); ++r) {
    const double p = out.probabilities[static_cast<Eigen::Index>(r)];
    bits[r] = (mode == PolicyMode::deterministic) ? (p >= 0.5) : rng.bernoulli(p);
  }
  return bits;
}

BidVector policy_bids(const PolicyParams& params, const Observation& obs, PolicyMode mode, std::uint64_t seed) {
  Rng rng(seed, "policy");
  return policy_bids(params, obs, mode, rng);
}

}  // namespace risauction
