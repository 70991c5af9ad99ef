#include "auction.hpp"

#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace risauction {

void AuctionParams::validate() const {
  if (!(initial_price > 0.0) || !(increment > 0.0) || !(budget > 0.0))
    throw ConfigError("auction: initial price, increment and budget must be positive");
}

std::size_t AuctionParams::round_cap() const {
  return static_cast<std::size_t>(std::ceil(budget / increment - kBudgetTolerance)) + 2;
}

Auction::Auction(std::size_t n_ris, std::size_t n_bs, AuctionParams params)
    : params_(params), ris_(n_ris), budgets_(n_bs, params.budget), prev_bids_(n_bs, BidVector(n_ris, 1)) {
  params_.validate();
  if (n_ris == 0 || n_bs == 0) throw ConfigError("auction: need at least one RIS and one BS");
}

double Auction::price() const {
  return params_.initial_price + static_cast<double>(round_ - 1) * params_.increment;
}

BidVector Auction::legal_bid_mask(std::size_t b) const {
  if (b >= n_bs()) throw ArgumentError("legal_bid_mask: BS index out of range");
  BidVector mask(n_ris(), 0);
  if (price() > budgets_[b] + kBudgetTolerance) return mask;
  for (std::size_t r = 0; r < n_ris(); ++r)
    mask[r] = (ris_[r].status == RisStatus::contested && prev_bids_[b][r]) ? 1 : 0;
  return mask;
}

std::vector<std::size_t> Auction::contested() const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < n_ris(); ++r)
    if (ris_[r].status == RisStatus::contested) out.push_back(r);
  return out;
}

const RoundOutcome& Auction::step(std::span<const BidVector> bids) {
  if (is_terminated()) throw StateError("auction_step: auction already terminated");
  if (bids.size() != n_bs()) throw StructureError("auction_step: one bid vector per BS required");
  for (const auto& v : bids)
    if (v.size() != n_ris()) throw StructureError("auction_step: bid vector length must equal RIS count");

  RoundOutcome out;
  out.round = round_;
  out.price = price();
  out.raw_bids.assign(bids.begin(), bids.end());
  out.effective_bids.resize(n_bs());
  for (std::size_t b = 0; b < n_bs(); ++b) {
    const BidVector mask = legal_bid_mask(b);
    out.effective_bids[b].resize(n_ris());
    for (std::size_t r = 0; r < n_ris(); ++r) out.effective_bids[b][r] = (bids[b][r] != 0 && mask[r]) ? 1 : 0;
  }

  for (std::size_t r = 0; r < n_ris(); ++r) {
    if (ris_[r].status != RisStatus::contested) continue;
    std::size_t count = 0, bidder = 0;
    for (std::size_t b = 0; b < n_bs(); ++b)
      if (out.effective_bids[b][r]) {
        ++count;
        bidder = b;
      }
    if (count == 1) {
      if (budgets_[bidder] + kBudgetTolerance >= out.price) {
        budgets_[bidder] = std::max(0.0, budgets_[bidder] - out.price);
        ris_[r] = {RisStatus::assigned, bidder, out.price, round_};
        out.assignments.emplace_back(r, bidder);
        continue;
      }
      out.effective_bids[bidder][r] = 0;
      count = 0;
    }
    if (count == 0) {
      ris_[r].status = RisStatus::retired;
      ris_[r].settled_round = round_;
      out.retirements.push_back(r);
    }
  }

  prev_bids_ = out.effective_bids;
  ++round_;

  // Hard cap: whatever is still contested stays unassigned.
  if (round_ - 1 >= params_.round_cap()) {
    for (std::size_t r = 0; r < n_ris(); ++r)
      if (ris_[r].status == RisStatus::contested) {
        ris_[r].status = RisStatus::retired;
        ris_[r].settled_round = out.round;
        out.retirements.push_back(r);
      }
  }

  history_.push_back(std::move(out));
  return history_.back();
}

bool Auction::is_terminated() const {
  if (round_ - 1 >= params_.round_cap()) return true;
  for (const auto& st : ris_)
    if (st.status == RisStatus::contested) return false;
  return true;
}

Allocation Auction::allocation() const {
  Allocation a = Allocation::empty(n_bs());
  for (std::size_t r = 0; r < n_ris(); ++r)
    if (ris_[r].status == RisStatus::assigned) {
      a.assigned[ris_[r].owner].push_back(r);
      a.payments[ris_[r].owner].push_back(ris_[r].price_paid);
    }
  return a;
}

std::string bits_to_string(const BidVector& bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto bit : bits) s.push_back(bit ? '1' : '0');
  return s;
}

std::string Auction::history_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "round,price";
  for (std::size_t b = 0; b < n_bs(); ++b) out << ",bids_bs" << b;
  out << ",assigned,retired\n";
  for (const auto& rec : history_) {
    out << rec.round << ',' << rec.price;
    for (const auto& bits : rec.effective_bids) out << ',' << bits_to_string(bits);
    out << ',';
    for (std::size_t i = 0; i < rec.assignments.size(); ++i)
      out << (i ? ";" : "") << rec.assignments[i].first << ':' << rec.assignments[i].second;
    out << ',';
    for (std::size_t i = 0; i < rec.retirements.size(); ++i) out << (i ? ";" : "") << rec.retirements[i];
    out << '\n';
  }
  return out.str();
}

Auction new_auction(std::size_t n_ris, std::size_t n_bs, double p0, double dp, double b0) {
  return Auction(n_ris, n_bs, AuctionParams{p0, dp, b0});
}

BidVector legal_bid_mask(const Auction& state, std::size_t b) { return state.legal_bid_mask(b); }

RoundOutcome auction_step(Auction& state, std::span<const BidVector> bids) { return state.step(bids); }

bool is_terminated(const Auction& state) { return state.is_terminated(); }

}  // namespace risauction
