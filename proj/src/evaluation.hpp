#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "auction.hpp"
#include "bidders.hpp"
#include "channel.hpp"
#include "scenario.hpp"

namespace risauction {

/// A complete auction on one scenario.
struct AuctionRun {
  Allocation allocation;
  std::vector<RoundOutcome> history;
  /// Normalized value the winner observed for each RIS in the round it won,
  /// in the order the RISs were assigned.
  std::vector<double> acquired_values;
  std::string history_csv;
};

/// Runs the auction to completion with one bidder per BS. Learned policies act
/// deterministically. `trace` receives one JSON line per round when set.
AuctionRun run_auction(const Scenario& s, std::span<const BidderSpec> bidders, const AuctionParams& params,
                       std::ostream* trace = nullptr);

/// Sum of all prices in the round history's assignments; an independent
/// replay of the payment ledger.
double replay_payments(std::span<const RoundOutcome> history);

/// Network sum rate sum_b log2(1 + SINR of b's scheduled user) for one fading
/// draw. scheduled[b] is BS b's user, or n_ue for a silent BS. Assigned RISs
/// are phased for their owner's scheduled user, every other RIS gets the
/// random phases in `random_phases`.
double slot_sum_rate(const Scenario& s, const ChannelSet& cs, const Allocation& alloc,
                     std::span<const std::size_t> scheduled, std::span<const PhaseConfig> random_phases, Rng& beam_rng);

struct EvalConfig {
  ScenarioConfig scenario;
  AuctionParams auction;
  std::size_t n_macro = 200;
  std::size_t n_micro = 20;
  std::size_t jobs = 0;

  void validate() const;
};

/// One bidder per BS plus a display label.
struct Strategy {
  std::string label;
  double beta = 0.0;  // 0 for heuristics
  std::vector<BidderSpec> bidders;
};

/// Strategy applied by every BS.
Strategy uniform_strategy(const BidderSpec& spec, std::size_t n_bs);

struct StrategyResult {
  std::string label;
  double beta = 0.0;
  double sum_rate = 0.0;        // bit/s/Hz, mean over macro draws of the slot average
  double cost = 0.0;            // total payments per auction
  double n_ris = 0.0;           // RISs allocated per auction
  double mean_bid_value = 0.0;  // pooled over all acquired RISs
  double sum_rate_hw = 0.0;     // 95% confidence half-widths
  double cost_hw = 0.0;
  double n_ris_hw = 0.0;
  double mean_bid_value_hw = 0.0;
  std::size_t acquired = 0;
  std::vector<double> macro_sum_rate;
  std::vector<double> macro_cost;
  std::vector<double> macro_n_ris;
};

struct EvalReport {
  std::vector<StrategyResult> strategies;
  std::size_t n_macro = 0;
  std::size_t n_micro = 0;
  std::uint64_t seed = 0;
};

/// Evaluates one strategy on the macro x micro grid fixed by `seed`. Every
/// strategy evaluated with the same seed sees identical scenarios, fading and
/// random phases.
StrategyResult evaluate_strategy(const EvalConfig& cfg, const Strategy& strategy, std::uint64_t seed);

EvalReport evaluate_strategies(const EvalConfig& cfg, std::span<const Strategy> strategies, std::uint64_t seed);

/// Half-width 1.96 s / sqrt(n) of the mean of `samples`.
double confidence_half_width(std::span<const double> samples);

enum class InterfererBeams { isotropic, steered };

/// Reference the estimate is compared with: the fading average of the
/// instantaneous SINR, or the ratio of fading-averaged signal power to
/// fading-averaged interference plus noise.
enum class AccuracyMetric { mean_sinr, power_ratio };

struct AccuracyConfig {
  ScenarioConfig scenario;
  std::vector<std::size_t> m_bs_list = {10, 25, 50, 100};
  std::size_t n_macro = 50;
  std::size_t n_micro = 100;
  InterfererBeams interferers = InterfererBeams::steered;
  AccuracyMetric metric = AccuracyMetric::mean_sinr;
  std::size_t jobs = 0;

  void validate() const;
};

struct AccuracyRow {
  std::size_t m_bs = 0;
  double mean_db = 0.0;
  double median_db = 0.0;
  double p90_db = 0.0;
  std::size_t samples = 0;
};

/// |10 log10 estimate - 10 log10 mean SINR| for every user of every macro
/// draw, under random RIS allocations, summarized per antenna count.
std::vector<AccuracyRow> sinr_accuracy_study(const AccuracyConfig& cfg, std::uint64_t seed);

/// Mean of the instantaneous SINR of user u over `n_micro` fading draws with
/// the serving set phased for u and every other RIS random.
double monte_carlo_sinr(const Scenario& s, const Allocation& alloc, std::size_t u, std::size_t n_micro,
                        InterfererBeams interferers, std::uint64_t seed,
                        AccuracyMetric metric = AccuracyMetric::mean_sinr);

/// Linear-interpolated quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> samples, double q);

std::string eval_report_csv(const EvalReport& report);
std::string tradeoff_csv(const EvalReport& report);
std::string accuracy_csv(std::span<const AccuracyRow> rows);

}  // namespace risauction
