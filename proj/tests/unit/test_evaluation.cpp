#include <doctest.h>

#include <cmath>
#include <sstream>

#include "errors.hpp"
#include "evaluation.hpp"
#include "rng.hpp"

using namespace risauction;

namespace {

EvalConfig small_eval() {
  EvalConfig cfg;
  cfg.scenario.m_bs = 16;
  cfg.scenario.m_ris = 32;
  cfg.n_macro = 4;
  cfg.n_micro = 3;
  cfg.jobs = 1;
  return cfg;
}

}  // namespace

TEST_CASE("evaluation is deterministic and independent of the worker count") {
  EvalConfig cfg = small_eval();
  const Strategy st = uniform_strategy(BidderSpec::parse("value-heuristic"), 2);
  const StrategyResult a = evaluate_strategy(cfg, st, 9);
  const StrategyResult b = evaluate_strategy(cfg, st, 9);
  cfg.jobs = 3;
  const StrategyResult c = evaluate_strategy(cfg, st, 9);
  CHECK(a.macro_sum_rate == b.macro_sum_rate);
  CHECK(a.macro_sum_rate == c.macro_sum_rate);
  CHECK(a.macro_cost == c.macro_cost);
  CHECK(a.mean_bid_value == c.mean_bid_value);
  CHECK(a.sum_rate > 0.0);
  CHECK(a.cost >= 0.0);
  const StrategyResult d = evaluate_strategy(small_eval(), st, 10);
  CHECK(d.macro_sum_rate != a.macro_sum_rate);
}

TEST_CASE("null bidders acquire nothing") {
  const StrategyResult r = evaluate_strategy(small_eval(), uniform_strategy(BidderSpec::parse("null"), 2), 3);
  CHECK(r.cost == 0.0);
  CHECK(r.n_ris == 0.0);
  CHECK(r.acquired == 0);
  CHECK(r.sum_rate > 0.0);
}

TEST_CASE("auction runs reconcile with their round history") {
  ScenarioConfig sc;
  for (const char* spec : {"value-heuristic", "distance-heuristic"})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Scenario s = generate_scenario(sc, seed);
      const std::vector<BidderSpec> bidders(2, BidderSpec::parse(spec));
      std::ostringstream trace;
      const AuctionRun run = run_auction(s, bidders, AuctionParams{}, &trace);
      REQUIRE_NOTHROW(run.allocation.validate());
      double paid = 0.0;
      for (std::size_t b = 0; b < 2; ++b) {
        paid += run.allocation.total_payment(b);
        REQUIRE(run.allocation.total_payment(b) <= 1.0 + 1e-9);
      }
      // Independent ledger: every assignment costs the clock price of its round.
      double ledger = 0.0;
      for (const auto& rec : run.history) ledger += rec.price * double(rec.assignments.size());
      REQUIRE(paid == doctest::Approx(ledger));
      REQUIRE(replay_payments(run.history) == doctest::Approx(ledger));
      REQUIRE(run.acquired_values.size() == run.allocation.total_assigned());
      for (double v : run.acquired_values) {
        REQUIRE(v >= -1.0);
        REQUIRE(v <= 1.0);
      }
      std::size_t lines = 0;
      for (char ch : trace.str()) lines += ch == '\n';
      REQUIRE(lines == run.history.size());
      REQUIRE(run.history.size() <= AuctionParams{}.round_cap());
    }
}

TEST_CASE("slot sum rate with silent BSs and shape errors") {
  ScenarioConfig sc;
  sc.m_bs = 8;
  sc.m_ris = 16;
  const Scenario s = generate_scenario(sc, 2);
  const ChannelSet cs = realize_channels(s, 1);
  std::vector<PhaseConfig> phases;
  for (std::size_t r = 0; r < s.n_ris(); ++r) phases.push_back(random_phase_config(16, r));
  const Allocation none = Allocation::empty(2);
  const std::size_t silent[] = {s.n_ue(), s.n_ue()};
  Rng rng(1);
  CHECK(slot_sum_rate(s, cs, none, silent, phases, rng) == 0.0);
  const std::vector<std::size_t> u0 = s.users_of(0);
  REQUIRE_FALSE(u0.empty());
  const std::size_t one[] = {u0[0], s.n_ue()};
  CHECK(slot_sum_rate(s, cs, none, one, phases, rng) > 0.0);
  CHECK_THROWS_AS(slot_sum_rate(s, cs, none, std::span(one).first(1), phases, rng), StructureError);
}

TEST_CASE("single fading draw reproduces the instantaneous SINR") {
  ScenarioConfig sc;
  sc.m_bs = 8;
  sc.m_ris = 16;
  const Scenario s = generate_scenario(sc, 4);
  Allocation a = Allocation::empty(2);
  a.assigned[0] = {1, 4};
  a.payments[0] = {0.05, 0.05};
  a.assigned[1] = {7};
  a.payments[1] = {0.1};
  const std::uint64_t seed = 31;
  for (std::size_t u = 0; u < s.n_ue(); ++u) {
    const std::size_t d = s.association[u];
    const ChannelSet cs = realize_channels(s, derive_seed(seed, "fading", 0));
    Rng phase_rng(seed, "phases", 0);
    std::vector<PhaseConfig> phases(s.n_ris());
    for (auto& p : phases) p = random_phase_config(16, phase_rng);
    for (std::size_t r : a.assigned[d]) phases[r] = optimal_phase_config(r, u, d, s);
    Rng beam_rng(seed, "beam", 0);
    std::vector<CVector> f(2), h(2);
    for (std::size_t b = 0; b < 2; ++b) {
      f[b] = beamformer(b, a.assigned[b], sc.tx_power, s, beam_rng);
      beamformer(b, {}, sc.tx_power, s, beam_rng);  // the isotropic alternative draws next
    }
    for (std::size_t b = 0; b < 2; ++b) h[b] = composite_channel(cs, phases, u, b);
    const double direct = instantaneous_sinr(h, f, d, s.noise_power).sinr;
    const double mc = monte_carlo_sinr(s, a, u, 1, InterfererBeams::steered, seed);
    const double ratio = monte_carlo_sinr(s, a, u, 1, InterfererBeams::steered, seed, AccuracyMetric::power_ratio);
    REQUIRE(mc == doctest::Approx(direct).epsilon(1e-12));
    REQUIRE(ratio == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK_THROWS_AS(monte_carlo_sinr(s, a, s.n_ue(), 1, InterfererBeams::steered, 1), ArgumentError);
  CHECK_THROWS_AS(monte_carlo_sinr(s, a, 0, 0, InterfererBeams::steered, 1), ArgumentError);
}

TEST_CASE("accuracy study shape") {
  AccuracyConfig cfg;
  cfg.scenario.m_ris = 32;
  cfg.m_bs_list = {4, 8};
  cfg.n_macro = 3;
  cfg.n_micro = 4;
  cfg.jobs = 1;
  const auto rows = sinr_accuracy_study(cfg, 5);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.samples == 3 * cfg.scenario.n_ue);
    CHECK(r.mean_db >= 0.0);
    CHECK(r.median_db <= r.p90_db);
  }
  CHECK(rows[0].m_bs == 4);
  cfg.jobs = 2;
  const auto again = sinr_accuracy_study(cfg, 5);
  CHECK(again[1].mean_db == rows[1].mean_db);
  cfg.m_bs_list.clear();
  CHECK_THROWS_AS(sinr_accuracy_study(cfg, 5), ConfigError);
}

TEST_CASE("confidence half-width") {
  std::vector<double> small, large;
  for (int i = 0; i < 100; ++i) small.push_back(i % 2);
  for (int i = 0; i < 400; ++i) large.push_back(i % 2);
  const double hs = confidence_half_width(small), hl = confidence_half_width(large);
  CHECK(hs == doctest::Approx(1.96 * std::sqrt(0.25 * 100 / 99.0) / 10.0));
  CHECK(hl / hs == doctest::Approx(0.5).epsilon(0.01));
  const double one[] = {3.0};
  CHECK(confidence_half_width(one) == 0.0);
}

TEST_CASE("quantile") {
  CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({4, 1, 3, 2}, 0.9) == doctest::Approx(3.7));
  CHECK(quantile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(quantile({7}, 0.9) == 7.0);
  CHECK_THROWS_AS(quantile({}, 0.5), ArgumentError);
  CHECK_THROWS_AS(quantile({1, 2}, 1.5), ArgumentError);
}

TEST_CASE("CSV writers") {
  EvalReport rep;
  rep.n_macro = 2;
  rep.n_micro = 3;
  rep.seed = 7;
  StrategyResult r;
  r.label = "null";
  r.sum_rate = 1.5;
  r.n_ris = 0.25;
  rep.strategies.push_back(r);
  CHECK(eval_report_csv(rep) ==
        "label,beta,sum_rate,sum_rate_hw,cost,cost_hw,n_ris,n_ris_hw,mean_bid_value,mean_bid_value_hw,n_macro,n_micro,seed\n"
        "null,0,1.5,0,0,0,0.25,0,0,0,2,3,7\n");
  CHECK(tradeoff_csv(rep) == "label,beta,cost,sum_rate,n_ris,mean_bid_value\nnull,0,0,1.5,0.25,0\n");
  const AccuracyRow rows[] = {{10, 1.25, 1.0, 2.5, 100}};
  CHECK(accuracy_csv(rows) == "m_bs,mean_db,median_db,p90_db\n10,1.25,1,2.5\n");
}

TEST_CASE("evaluation configuration errors") {
  EvalConfig cfg = small_eval();
  cfg.n_micro = 0;
  CHECK_THROWS_AS(evaluate_strategy(cfg, uniform_strategy(BidderSpec::parse("null"), 2), 1), ConfigError);
  CHECK_THROWS_AS(evaluate_strategy(small_eval(), uniform_strategy(BidderSpec::parse("null"), 3), 1), ConfigError);
}
