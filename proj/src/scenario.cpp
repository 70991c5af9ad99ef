#include "scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>

#include "errors.hpp"
#include "rng.hpp"

namespace risauction {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

std::atomic<std::uint64_t> g_clamp_count{0};

double azimuth(Point from, Point to) { return std::atan2(to.y - from.y, to.x - from.x); }

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void ScenarioConfig::validate() const {
  if (n_bs < 1 || n_ue < 1 || n_ris < 1 || m_bs < 1 || m_ris < 1)
    throw ConfigError("scenario: all counts must be >= 1");
  if (!(region_side > 0.0)) throw ConfigError("scenario: region_side must be positive");
  if (!(carrier_freq > 0.0)) throw ConfigError("scenario: carrier_freq must be positive");
  if (!(tx_power > 0.0)) throw ConfigError("scenario: tx_power must be positive");
  if (!(subcarrier_bw > 0.0)) throw ConfigError("scenario: subcarrier_bw must be positive");
  if (!(ple_los > 0.0) || ple_nlos < ple_los) throw ConfigError("scenario: need 0 < ple_los <= ple_nlos");
  if (!(k_nlos >= 0.0) || !(k_los > k_nlos)) throw ConfigError("scenario: need k_los > k_nlos >= 0");
  if (!(los_decay > 0.0)) throw ConfigError("scenario: los_decay must be positive");
  if (!(shadow_var_db >= 0.0)) throw ConfigError("scenario: shadow_var_db must be non-negative");
  if (cluster_count < 1) throw ConfigError("scenario: cluster_count must be >= 1");
  if (!(cluster_spread >= 0.0)) throw ConfigError("scenario: cluster_spread must be non-negative");
  if (!(reference_distance > 0.0)) throw ConfigError("scenario: reference_distance must be positive");
}

double ScenarioConfig::wavelength() const { return kSpeedOfLight / carrier_freq; }

double ScenarioConfig::noise_power_w() const {
  const double dbm = noise_psd_dbm_hz + 10.0 * std::log10(subcarrier_bw) + noise_figure_db;
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

std::vector<std::size_t> Scenario::users_of(std::size_t bs) const {
  std::vector<std::size_t> users;
  for (std::size_t u = 0; u < association.size(); ++u)
    if (association[u] == bs) users.push_back(u);
  return users;
}

double los_probability(double d, double los_decay) {
  if (d < 0.0 || std::isnan(d)) throw ArgumentError("los_probability: negative distance");
  return std::exp(-d / los_decay);
}

double path_gain(double d, bool los, double shadow_db, const ScenarioConfig& cfg) {
  const double d0 = cfg.reference_distance;
  if (d < d0) {
    d = d0;
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
  }
  const double alpha = los ? cfg.ple_los : cfg.ple_nlos;
  const double anchor = cfg.wavelength() / (4.0 * std::numbers::pi * d0);
  const double power = anchor * anchor * std::pow(d / d0, -alpha) * std::pow(10.0, shadow_db / 10.0);
  return std::sqrt(power);
}

std::uint64_t path_gain_clamp_count() { return g_clamp_count.load(std::memory_order_relaxed); }

void populate_links(Scenario& s, const std::function<double()>& shadow_db,
                    const std::function<bool(double)>& los_draw) {
  const auto& cfg = s.config;
  const double d0 = cfg.reference_distance;
  const std::size_t nb = s.n_bs(), nu = s.n_ue(), nr = s.n_ris();
  s.ue_bs = LinkTable(nu, nb);
  s.ris_bs = LinkTable(nr, nb);
  s.ue_ris = LinkTable(nu, nr);
  s.clamped_links = 0;

  auto make = [&](Point tx, Point rx, bool los, double k) {
    Link link;
    double d = distance(tx, rx);
    if (d < d0) {
      d = d0;
      ++s.clamped_links;
    }
    link.distance = d;
    link.los = los;
    link.k_factor = k;
    link.gain = path_gain(d, los, shadow_db(), cfg);
    link.departure = azimuth(tx, rx);
    link.arrival = azimuth(rx, tx);
    return link;
  };

  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t b = 0; b < nb; ++b) s.ue_bs(u, b) = make(s.bs_pos[b], s.ue_pos[u], false, 0.0);
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t b = 0; b < nb; ++b)
      s.ris_bs(r, b) = make(s.bs_pos[b], s.ris_pos[r], true, std::numeric_limits<double>::infinity());
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t r = 0; r < nr; ++r) {
      const double d = std::max(distance(s.ris_pos[r], s.ue_pos[u]), d0);
      const bool los = los_draw(los_probability(d, cfg.los_decay));
      s.ue_ris(u, r) = make(s.ris_pos[r], s.ue_pos[u], los, los ? cfg.k_los : cfg.k_nlos);
    }

  s.noise_power = cfg.noise_power_w();
  s.association = associate_users(s);
}

Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed, "scenario");
  Scenario s;
  s.config = cfg;
  const double side = cfg.region_side;
  const Point center{side / 2.0, side / 2.0};

  // BSs sit on a circle through the edge midpoints; for two BSs these are the
  // midpoints of the left and right edges and the cell boundary is x = side/2.
  for (std::size_t b = 0; b < cfg.n_bs; ++b) {
    if (cfg.n_bs == 1) {
      s.bs_pos.push_back({0.0, side / 2.0});
      break;
    }
    const double angle = std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(b) / cfg.n_bs;
    Point p{center.x + side / 2.0 * std::cos(angle), center.y + side / 2.0 * std::sin(angle)};
    if (std::abs(p.x) < 1e-9) p.x = 0.0;
    if (std::abs(p.y - side / 2.0) < 1e-9) p.y = side / 2.0;
    s.bs_pos.push_back(p);
  }

  std::vector<Point> clusters(cfg.cluster_count);
  for (auto& c : clusters) c = {side / 2.0, rng.uniform(0.0, side)};

  auto clustered = [&] {
    const Point& c = clusters[rng.below(clusters.size())];
    const double x = c.x + rng.normal(0.0, cfg.cluster_spread);
    const double y = c.y + rng.normal(0.0, cfg.cluster_spread);
    return Point{std::clamp(x, 0.0, side), std::clamp(y, 0.0, side)};
  };
  for (std::size_t u = 0; u < cfg.n_ue; ++u) s.ue_pos.push_back(clustered());
  for (std::size_t r = 0; r < cfg.n_ris; ++r) s.ris_pos.push_back(clustered());

  const double shadow_std = std::sqrt(cfg.shadow_var_db);
  populate_links(
      s, [&] { return rng.normal(0.0, shadow_std); }, [&](double p) { return rng.bernoulli(p); });
  return s;
}

std::vector<std::size_t> associate_users(const Scenario& s) {
  std::vector<std::size_t> serving(s.n_ue(), 0);
  for (std::size_t u = 0; u < s.n_ue(); ++u) {
    double best = -1.0;
    for (std::size_t b = 0; b < s.n_bs(); ++b) {
      const double g = s.ue_bs(u, b).gain;
      if (g * g > best) {
        best = g * g;
        serving[u] = b;
      }
    }
  }
  return serving;
}

}  // namespace risauction
