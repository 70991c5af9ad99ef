#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "scenario.hpp"

namespace risauction {

class Rng;

using CVector = Eigen::VectorXcd;

/// Half-wavelength ULA response: element i = exp(j pi i sin(angle)).
CVector steering_vector(double angle, std::size_t m);

/// BS -> RIS channel gain * a(psi) a(theta)^T, kept in factored form.
struct RankOneChannel {
  double gain = 0.0;
  CVector ris_response;  // a(psi_{r,b}), length M_RIS
  CVector bs_response;   // a(theta_{r,b}), length M_BS

  Eigen::MatrixXcd dense() const;
};

/// One microscopic fading realization of every link in a scenario.
struct ChannelSet {
  std::size_t n_bs = 0;
  std::size_t n_ue = 0;
  std::size_t n_ris = 0;
  std::vector<CVector> direct;          // [u * n_bs + b], length M_BS
  std::vector<RankOneChannel> ris_bs;   // [r * n_bs + b]
  std::vector<CVector> ue_ris;          // [u * n_ris + r], length M_RIS

  const CVector& h_direct(std::size_t u, std::size_t b) const { return direct[u * n_bs + b]; }
  const RankOneChannel& h_ris_bs(std::size_t r, std::size_t b) const { return ris_bs[r * n_bs + b]; }
  const CVector& h_ue_ris(std::size_t u, std::size_t r) const { return ue_ris[u * n_ris + r]; }
};

/// Diagonal RIS response angles, one per element, in [0, 2 pi).
struct PhaseConfig {
  std::vector<double> phases;
};

ChannelSet realize_channels(const Scenario& s, std::uint64_t seed);

/// Phase-aligns RIS r for user u served through BS d.
PhaseConfig optimal_phase_config(std::size_t r, std::size_t u, std::size_t d, const Scenario& s);

PhaseConfig random_phase_config(std::size_t m_ris, Rng& rng);
PhaseConfig random_phase_config(std::size_t m_ris, std::uint64_t seed);

/// (h_{u,r}^T Phi_r H_{r,b})^T, the cascade through one RIS.
CVector ris_cascade(const ChannelSet& cs, const PhaseConfig& phases, std::size_t u, std::size_t r,
                    std::size_t b);

/// Direct plus all RIS-assisted paths from BS b to UE u.
CVector composite_channel(const ChannelSet& cs, std::span<const PhaseConfig> phases, std::size_t u,
                          std::size_t b);

/// Transmit vector of BS b: uniform power over steering beams towards its
/// RISs, or a random isotropic direction when it holds none.
CVector beamformer(std::size_t b, std::span<const std::size_t> assigned, double power, const Scenario& s,
                   Rng& rng);

struct SinrResult {
  double sinr = 0.0;
  double rate = 0.0;  // bit/s/Hz
};

/// SINR of the user served by `serving`. h_user[b] is the composite channel
/// from BS b to that user and f_scheduled[b] is BS b's transmit vector for its
/// scheduled user (an empty vector marks a silent BS).
SinrResult instantaneous_sinr(std::span<const CVector> h_user, std::span<const CVector> f_scheduled,
                              std::size_t serving, double noise);

}  // namespace risauction
