#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace risauction {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

/// Physical and geometric parameters of one simulated deployment.
/// Defaults reproduce the reference two-cell cell-edge setup at 26 GHz.
struct ScenarioConfig {
  std::size_t n_bs = 2;
  std::size_t n_ue = 20;
  std::size_t n_ris = 10;
  std::size_t m_bs = 50;    // antennas per BS
  std::size_t m_ris = 250;  // elements per RIS
  double region_side = 100.0;         // m
  double carrier_freq = 26e9;         // Hz
  double tx_power = 0.1;              // W per subcarrier
  double subcarrier_bw = 15e3;        // Hz
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 6.0;
  double ple_los = 2.0;
  double ple_nlos = 4.25;
  double k_los = 100.0;
  double k_nlos = 3.0;
  double los_decay = 50.0;            // m, p_LOS(d) = exp(-d / los_decay)
  double shadow_var_db = 10.0;        // variance of the log-normal shadowing, dB^2
  std::size_t cluster_count = 3;
  double cluster_spread = 8.0;        // m, per-axis std-dev around a cluster center
  double reference_distance = 1.0;    // m, free-space anchor d0

  /// Throws ConfigError on violated invariants.
  void validate() const;

  double wavelength() const;
  double noise_power_w() const;
};

/// Macroscopic parameters of one directed link.
struct Link {
  double distance = 0.0;   // m, after clamping to the reference distance
  double gain = 0.0;       // amplitude path gain (gamma)
  double k_factor = 0.0;   // Rician K; +inf for pure LOS, 0 for Rayleigh
  bool los = false;
  double departure = 0.0;  // rad, angle at the transmitting end
  double arrival = 0.0;    // rad, angle at the receiving end
};

/// Row-major table of links indexed by (row, col).
class LinkTable {
 public:
  LinkTable() = default;
  LinkTable(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), links_(rows * cols) {}

  const Link& operator()(std::size_t row, std::size_t col) const { return links_[row * cols_ + col]; }
  Link& operator()(std::size_t row, std::size_t col) { return links_[row * cols_ + col]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Link> links_;
};

/// One macroscopic realization: node positions and every link's parameters.
///   ue_bs(u, b)  : BS b -> UE u, always NLOS (departure = angle at the BS)
///   ris_bs(r, b) : BS b -> RIS r, always LOS (departure = theta_{r,b} at the BS,
///                  arrival = psi_{r,b} at the RIS)
///   ue_ris(u, r) : RIS r -> UE u, LOS sampled (departure = theta_{u,r} at the RIS)
struct Scenario {
  ScenarioConfig config;
  std::vector<Point> bs_pos;
  std::vector<Point> ue_pos;
  std::vector<Point> ris_pos;
  LinkTable ue_bs;
  LinkTable ris_bs;
  LinkTable ue_ris;
  double noise_power = 0.0;  // W
  std::vector<std::size_t> association;  // serving BS per UE
  std::size_t clamped_links = 0;

  std::size_t n_bs() const { return bs_pos.size(); }
  std::size_t n_ue() const { return ue_pos.size(); }
  std::size_t n_ris() const { return ris_pos.size(); }

  std::vector<std::size_t> users_of(std::size_t bs) const;
};

double los_probability(double d, double los_decay = 50.0);

/// Amplitude path gain sqrt((lambda / (4 pi d0))^2 (d / d0)^-alpha 10^(shadow/10)).
/// Distances below d0 are clamped and counted in path_gain_clamp_count().
double path_gain(double d, bool los, double shadow_db, const ScenarioConfig& cfg);

std::uint64_t path_gain_clamp_count();

Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

/// Serving BS per UE: strongest direct macroscopic gain, ties to the lower index.
std::vector<std::size_t> associate_users(const Scenario& s);

/// Fills the link tables and association of a scenario whose positions are
/// already set. Shadowing values (dB) come from `shadow_db` in link order
/// BS-UE, BS-RIS, RIS-UE; `los_draw(p)` decides each RIS-UE LOS state.
void populate_links(Scenario& s, const std::function<double()>& shadow_db,
                    const std::function<bool(double)>& los_draw);

}  // namespace risauction
