#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "errors.hpp"
#include "parallel.hpp"
#include "rl_env.hpp"
#include "rng.hpp"

namespace risauction {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::size_t slot_count(std::span<const BidderSpec> bidders, std::size_t n_ris) {
  std::size_t slots = 0;
  for (const auto& spec : bidders) {
    if (spec.kind != BidderKind::rl_policy) continue;
    const std::size_t a = spec.policy->act_dim();
    if (slots != 0 && a != slots) throw ConfigError("run_auction: learned bidders disagree on the RIS slot count");
    slots = a;
  }
  if (slots == 0) return n_ris;
  if (slots < n_ris) throw ConfigError("run_auction: policy has fewer RIS slots than the scenario has RISs");
  return slots;
}

}  // namespace

AuctionRun run_auction(const Scenario& s, std::span<const BidderSpec> bidders, const AuctionParams& params,
                       std::ostream* trace) {
  if (bidders.size() != s.n_bs()) throw StructureError("run_auction: one bidder per BS required");
  for (const auto& spec : bidders) spec.validate();
  const std::size_t n_ris = s.n_ris();

  EnvConfig env_cfg;
  env_cfg.scenario = s.config;
  env_cfg.auction = params;
  env_cfg.max_ris_slots = slot_count(bidders, n_ris);
  AuctionEnv env(env_cfg);
  env.set_trace(trace);
  env.reset(s, 0);

  AuctionRun run;
  Rng unused(0);
  while (!env.done()) {
    const Auction& auction = env.auction();
    const std::vector<Observation> obs = env.observations();
    std::vector<BidVector> actions(s.n_bs());
    for (std::size_t b = 0; b < s.n_bs(); ++b) {
      const BidVector mask = auction.legal_bid_mask(b);
      const double price = auction.price();
      const double budget = auction.budget(b);
      BidVector bits;
      switch (bidders[b].kind) {
        case BidderKind::value_heuristic:
          bits = value_heuristic_bids(std::span(obs[b].values).first(n_ris), mask, price, budget);
          break;
        case BidderKind::distance_heuristic:
          bits = distance_heuristic_bids(s.bs_pos[b], s.ris_pos, mask, price, budget);
          break;
        case BidderKind::rl_policy:
          bits = policy_bids(*bidders[b].policy, obs[b], PolicyMode::deterministic, unused);
          break;
        case BidderKind::null_bidder:
          bits.assign(n_ris, 0);
          break;
      }
      bits.resize(env_cfg.max_ris_slots, 0);
      actions[b] = std::move(bits);
    }
    const StepResult step = env.step(actions);
    for (const auto& [r, b] : step.outcome.assignments) run.acquired_values.push_back(obs[b].values[r]);
  }
  run.allocation = env.auction().allocation();
  run.history = env.auction().history();
  run.history_csv = env.auction().history_csv();
  return run;
}

double replay_payments(std::span<const RoundOutcome> history) {
  double total = 0.0;
  for (const auto& round : history) total += round.price * static_cast<double>(round.assignments.size());
  return total;
}

double slot_sum_rate(const Scenario& s, const ChannelSet& cs, const Allocation& alloc,
                     std::span<const std::size_t> scheduled, std::span<const PhaseConfig> random_phases,
                     Rng& beam_rng) {
  const std::size_t n_bs = s.n_bs();
  if (scheduled.size() != n_bs || alloc.assigned.size() != n_bs || random_phases.size() != s.n_ris())
    throw StructureError("slot_sum_rate: inputs do not match the scenario");
  std::vector<PhaseConfig> phases(random_phases.begin(), random_phases.end());
  std::vector<CVector> f(n_bs);
  for (std::size_t b = 0; b < n_bs; ++b) {
    if (scheduled[b] >= s.n_ue()) continue;
    for (std::size_t r : alloc.assigned[b]) phases[r] = optimal_phase_config(r, scheduled[b], b, s);
    f[b] = beamformer(b, alloc.assigned[b], s.config.tx_power, s, beam_rng);
  }
  double total = 0.0;
  std::vector<CVector> h(n_bs);
  for (std::size_t b = 0; b < n_bs; ++b) {
    if (scheduled[b] >= s.n_ue()) continue;
    for (std::size_t c = 0; c < n_bs; ++c) h[c] = composite_channel(cs, phases, scheduled[b], c);
    total += instantaneous_sinr(h, f, b, s.noise_power).rate;
  }
  return total;
}

void EvalConfig::validate() const {
  scenario.validate();
  auction.validate();
  if (n_macro < 1 || n_micro < 1) throw ConfigError("evaluation: n_macro and n_micro must be >= 1");
}

Strategy uniform_strategy(const BidderSpec& spec, std::size_t n_bs) {
  Strategy st;
  st.label = spec.label();
  st.beta = spec.kind == BidderKind::rl_policy ? spec.beta : 0.0;
  st.bidders.assign(n_bs, spec);
  return st;
}

double confidence_half_width(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) return 0.0;
  const double m = mean_of(samples);
  double ss = 0.0;
  for (double x : samples) ss += (x - m) * (x - m);
  return 1.96 * std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

StrategyResult evaluate_strategy(const EvalConfig& cfg, const Strategy& strategy, std::uint64_t seed) {
  cfg.validate();
  if (strategy.bidders.size() != cfg.scenario.n_bs)
    throw ConfigError("evaluate_strategy: strategy '" + strategy.label + "' needs one bidder per BS");

  struct Macro {
    double sum_rate = 0.0, cost = 0.0, n_ris = 0.0;
    std::vector<double> values;
  };
  std::vector<Macro> macros(cfg.n_macro);

  parallel_for(cfg.n_macro, cfg.jobs, [&](std::size_t i) {
    const std::uint64_t macro_seed = derive_seed(seed, "macro", i);
    const Scenario s = generate_scenario(cfg.scenario, derive_seed(macro_seed, "scenario"));
    AuctionRun run = run_auction(s, strategy.bidders, cfg.auction);

    double paid = 0.0;
    for (std::size_t b = 0; b < s.n_bs(); ++b) paid += run.allocation.total_payment(b);
    const double replayed = replay_payments(run.history);
    if (std::abs(paid - replayed) > 1e-9 * std::max(1.0, paid))
      throw StateError("evaluate_strategy: payment ledger disagrees with the round history");

    std::vector<std::vector<std::size_t>> users(s.n_bs());
    for (std::size_t b = 0; b < s.n_bs(); ++b) users[b] = s.users_of(b);

    double rate = 0.0;
    std::vector<std::size_t> scheduled(s.n_bs());
    std::vector<PhaseConfig> random_phases(s.n_ris());
    for (std::size_t m = 0; m < cfg.n_micro; ++m) {
      const ChannelSet cs = realize_channels(s, derive_seed(macro_seed, "fading", m));
      Rng phase_rng(macro_seed, "phases", m);
      for (auto& p : random_phases) p = random_phase_config(s.config.m_ris, phase_rng);
      for (std::size_t b = 0; b < s.n_bs(); ++b)
        scheduled[b] = users[b].empty() ? s.n_ue() : users[b][m % users[b].size()];
      Rng beam_rng(macro_seed, "beam", m);
      rate += slot_sum_rate(s, cs, run.allocation, scheduled, random_phases, beam_rng);
    }

    Macro& out = macros[i];
    out.sum_rate = rate / static_cast<double>(cfg.n_micro);
    out.cost = paid;
    out.n_ris = static_cast<double>(run.allocation.total_assigned());
    out.values = std::move(run.acquired_values);
  });

  StrategyResult res;
  res.label = strategy.label;
  res.beta = strategy.beta;
  std::vector<double> pooled;
  for (const Macro& m : macros) {
    res.macro_sum_rate.push_back(m.sum_rate);
    res.macro_cost.push_back(m.cost);
    res.macro_n_ris.push_back(m.n_ris);
    pooled.insert(pooled.end(), m.values.begin(), m.values.end());
  }
  res.sum_rate = mean_of(res.macro_sum_rate);
  res.cost = mean_of(res.macro_cost);
  res.n_ris = mean_of(res.macro_n_ris);
  res.mean_bid_value = mean_of(pooled);
  res.sum_rate_hw = confidence_half_width(res.macro_sum_rate);
  res.cost_hw = confidence_half_width(res.macro_cost);
  res.n_ris_hw = confidence_half_width(res.macro_n_ris);
  res.mean_bid_value_hw = confidence_half_width(pooled);
  res.acquired = pooled.size();
  return res;
}

EvalReport evaluate_strategies(const EvalConfig& cfg, std::span<const Strategy> strategies, std::uint64_t seed) {
  EvalReport report;
  report.n_macro = cfg.n_macro;
  report.n_micro = cfg.n_micro;
  report.seed = seed;
  for (const auto& st : strategies) report.strategies.push_back(evaluate_strategy(cfg, st, seed));
  return report;
}

void AccuracyConfig::validate() const {
  scenario.validate();
  if (m_bs_list.empty()) throw ConfigError("accuracy: m_bs list must not be empty");
  for (std::size_t m : m_bs_list)
    if (m < 1) throw ConfigError("accuracy: antenna counts must be >= 1");
  if (n_macro < 1 || n_micro < 1) throw ConfigError("accuracy: n_macro and n_micro must be >= 1");
}

namespace {

/// Micro-averaged instantaneous SINR of every user in `s`; each user's serving
/// set is phased for that user while all other RISs share one random draw.
std::vector<double> mean_sinr_all_users(const Scenario& s, const Allocation& alloc, std::size_t n_micro,
                                        InterfererBeams interferers, AccuracyMetric metric, std::uint64_t seed,
                                        std::span<const std::size_t> users) {
  const std::size_t n_bs = s.n_bs();
  std::vector<std::vector<PhaseConfig>> optimal(s.n_ue());
  for (std::size_t u : users) {
    const std::size_t d = s.association[u];
    optimal[u].resize(s.n_ris());
    for (std::size_t r : alloc.assigned[d]) optimal[u][r] = optimal_phase_config(r, u, d, s);
  }

  std::vector<double> sums(s.n_ue(), 0.0), signal(s.n_ue(), 0.0), impairment(s.n_ue(), 0.0);
  std::vector<PhaseConfig> phases(s.n_ris());
  std::vector<CVector> steered(n_bs), isotropic(n_bs), f(n_bs), h(n_bs);
  const std::vector<std::size_t> none;
  for (std::size_t m = 0; m < n_micro; ++m) {
    const ChannelSet cs = realize_channels(s, derive_seed(seed, "fading", m));
    Rng phase_rng(seed, "phases", m);
    std::vector<PhaseConfig> random_phases(s.n_ris());
    for (auto& p : random_phases) p = random_phase_config(s.config.m_ris, phase_rng);
    Rng beam_rng(seed, "beam", m);
    for (std::size_t b = 0; b < n_bs; ++b) {
      steered[b] = beamformer(b, alloc.assigned[b], s.config.tx_power, s, beam_rng);
      isotropic[b] = beamformer(b, none, s.config.tx_power, s, beam_rng);
    }
    for (std::size_t u : users) {
      const std::size_t d = s.association[u];
      phases = random_phases;
      for (std::size_t r : alloc.assigned[d]) phases[r] = optimal[u][r];
      for (std::size_t b = 0; b < n_bs; ++b) {
        f[b] = (b == d || interferers == InterfererBeams::steered) ? steered[b] : isotropic[b];
        h[b] = composite_channel(cs, phases, u, b);
      }
      if (metric == AccuracyMetric::mean_sinr) {
        sums[u] += instantaneous_sinr(h, f, d, s.noise_power).sinr;
        continue;
      }
      for (std::size_t b = 0; b < n_bs; ++b) {
        const double p = std::norm((h[b].array() * f[b].array()).sum());
        (b == d ? signal[u] : impairment[u]) += p;
      }
    }
  }
  if (metric == AccuracyMetric::power_ratio)
    for (std::size_t u : users) sums[u] = signal[u] / (impairment[u] + static_cast<double>(n_micro) * s.noise_power);
  else
    for (double& x : sums) x /= static_cast<double>(n_micro);
  return sums;
}

Allocation random_allocation(std::size_t n_ris, std::size_t n_bs, Rng& rng) {
  Allocation alloc = Allocation::empty(n_bs);
  for (std::size_t r = 0; r < n_ris; ++r) {
    const std::size_t owner = rng.below(n_bs + 1);
    if (owner == n_bs) continue;
    alloc.assigned[owner].push_back(r);
    alloc.payments[owner].push_back(0.0);
  }
  return alloc;
}

}  // namespace

double monte_carlo_sinr(const Scenario& s, const Allocation& alloc, std::size_t u, std::size_t n_micro,
                        InterfererBeams interferers, std::uint64_t seed, AccuracyMetric metric) {
  if (u >= s.n_ue()) throw ArgumentError("monte_carlo_sinr: user index out of range");
  if (n_micro < 1) throw ArgumentError("monte_carlo_sinr: need at least one fading draw");
  alloc.validate();
  const std::size_t user[] = {u};
  return mean_sinr_all_users(s, alloc, n_micro, interferers, metric, seed, user)[u];
}

double quantile(std::vector<double> samples, double q) {
  if (samples.empty()) throw ArgumentError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile: q must lie in [0, 1]");
  std::sort(samples.begin(), samples.end());
  const double pos = q * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, samples.size() - 1);
  return samples[lo] + (pos - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

std::vector<AccuracyRow> sinr_accuracy_study(const AccuracyConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<AccuracyRow> rows;
  for (std::size_t m_bs : cfg.m_bs_list) {
    ScenarioConfig sc = cfg.scenario;
    sc.m_bs = m_bs;
    std::vector<std::vector<double>> errors(cfg.n_macro);
    parallel_for(cfg.n_macro, cfg.jobs, [&](std::size_t i) {
      const Scenario s = generate_scenario(sc, derive_seed(seed, "scenario", i));
      Rng alloc_rng(seed, "allocation", i);
      const Allocation alloc = random_allocation(s.n_ris(), s.n_bs(), alloc_rng);
      std::vector<std::size_t> users(s.n_ue());
      std::iota(users.begin(), users.end(), 0);
      const std::vector<double> truth =
          mean_sinr_all_users(s, alloc, cfg.n_micro, cfg.interferers, cfg.metric, derive_seed(seed, "micro", i), users);
      for (std::size_t u = 0; u < s.n_ue(); ++u) {
        const double est = estimate_sinr(s, alloc, u, s.association[u]);
        errors[i].push_back(std::abs(10.0 * std::log10(est) - 10.0 * std::log10(truth[u])));
      }
    });
    std::vector<double> pooled;
    for (const auto& e : errors) pooled.insert(pooled.end(), e.begin(), e.end());
    AccuracyRow row;
    row.m_bs = m_bs;
    row.mean_db = mean_of(pooled);
    row.median_db = quantile(pooled, 0.5);
    row.p90_db = quantile(pooled, 0.9);
    row.samples = pooled.size();
    rows.push_back(row);
  }
  return rows;
}

std::string eval_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "label,beta,sum_rate,sum_rate_hw,cost,cost_hw,n_ris,n_ris_hw,mean_bid_value,mean_bid_value_hw,"
         "n_macro,n_micro,seed\n";
  for (const auto& r : report.strategies)
    out << r.label << ',' << fmt(r.beta) << ',' << fmt(r.sum_rate) << ',' << fmt(r.sum_rate_hw) << ','
        << fmt(r.cost) << ',' << fmt(r.cost_hw) << ',' << fmt(r.n_ris) << ',' << fmt(r.n_ris_hw) << ','
        << fmt(r.mean_bid_value) << ',' << fmt(r.mean_bid_value_hw) << ',' << report.n_macro << ','
        << report.n_micro << ',' << report.seed << '\n';
  return out.str();
}

std::string tradeoff_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "label,beta,cost,sum_rate,n_ris,mean_bid_value\n";
  for (const auto& r : report.strategies)
    out << r.label << ',' << fmt(r.beta) << ',' << fmt(r.cost) << ',' << fmt(r.sum_rate) << ',' << fmt(r.n_ris)
        << ',' << fmt(r.mean_bid_value) << '\n';
  return out.str();
}

std::string accuracy_csv(std::span<const AccuracyRow> rows) {
  std::ostringstream out;
  out << "m_bs,mean_db,median_db,p90_db\n";
  for (const auto& r : rows)
    out << r.m_bs << ',' << fmt(r.mean_db) << ',' << fmt(r.median_db) << ',' << fmt(r.p90_db) << '\n';
  return out.str();
}

}  // namespace risauction
