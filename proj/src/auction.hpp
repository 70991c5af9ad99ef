#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "estimation.hpp"

namespace risauction {

using BidVector = std::vector<std::uint8_t>;

struct AuctionParams {
  double initial_price = 0.05;
  double increment = 0.05;
  double budget = 1.0;

  void validate() const;
  /// Liveness bound ceil(budget / increment) + 2 on the number of rounds.
  std::size_t round_cap() const;
};

enum class RisStatus { contested, assigned, retired };

struct RisState {
  RisStatus status = RisStatus::contested;
  std::size_t owner = 0;      // valid when assigned
  double price_paid = 0.0;    // valid when assigned
  std::size_t settled_round = 0;
};

/// Everything that happened in one clock round.
struct RoundOutcome {
  std::size_t round = 0;
  double price = 0.0;
  std::vector<BidVector> raw_bids;        // per BS, as submitted
  std::vector<BidVector> effective_bids;  // per BS, after masking and budget checks
  std::vector<std::pair<std::size_t, std::size_t>> assignments;  // (ris, bs)
  std::vector<std::size_t> retirements;
};

/// Budget comparisons tolerate accumulated rounding of the price clock.
inline constexpr double kBudgetTolerance = 1e-9;

/// Simultaneous ascending clock auction over a set of RISs.
///
/// Every round all BSs submit a bid bit per RIS at the common clock price.
/// A contested RIS with exactly one bid goes to that bidder at the clock
/// price, with two or more it stays contested, and with none it is retired.
/// A BS that skips a RIS may not bid on it again (activity rule). Wins are
/// debited in RIS index order; a win the bidder can no longer afford is
/// voided and counts as no bid.
class Auction {
 public:
  Auction(std::size_t n_ris, std::size_t n_bs, AuctionParams params);

  std::size_t n_ris() const { return ris_.size(); }
  std::size_t n_bs() const { return budgets_.size(); }
  const AuctionParams& params() const { return params_; }

  std::size_t round() const { return round_; }
  double price() const;
  double budget(std::size_t b) const { return budgets_.at(b); }
  const std::vector<double>& budgets() const { return budgets_; }
  const RisState& ris(std::size_t r) const { return ris_.at(r); }
  const BidVector& previous_bids(std::size_t b) const { return prev_bids_.at(b); }
  const std::vector<RoundOutcome>& history() const { return history_; }

  BidVector legal_bid_mask(std::size_t b) const;
  std::vector<std::size_t> contested() const;

  /// Advances one round. Throws StateError once terminated and
  /// StructureError on malformed bid vectors.
  const RoundOutcome& step(std::span<const BidVector> bids);

  bool is_terminated() const;

  Allocation allocation() const;

  /// round,price,bids_bs0..,assigned,retired. Bid columns hold effective bid
  /// bits as 0/1 strings; assigned is "ris:bs" pairs joined by ';'.
  std::string history_csv() const;

 private:
  AuctionParams params_;
  std::size_t round_ = 1;
  std::vector<RisState> ris_;
  std::vector<double> budgets_;
  std::vector<BidVector> prev_bids_;
  std::vector<RoundOutcome> history_;
};

Auction new_auction(std::size_t n_ris, std::size_t n_bs, double p0, double dp, double b0);
BidVector legal_bid_mask(const Auction& state, std::size_t b);
RoundOutcome auction_step(Auction& state, std::span<const BidVector> bids);
bool is_terminated(const Auction& state);

std::string bits_to_string(const BidVector& bits);

}  // namespace risauction
