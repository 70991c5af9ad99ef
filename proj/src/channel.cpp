#include "channel.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "errors.hpp"
#include "rng.hpp"

namespace risauction {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double phi) {
  phi = std::fmod(phi, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  if (phi >= kTwoPi) phi = 0.0;
  return phi;
}

// Rician scattering weights k = sqrt(K / (1 + K)), kbar = sqrt(1 / (1 + K)).
std::pair<double, double> rician_weights(double k_factor) {
  if (std::isinf(k_factor)) return {1.0, 0.0};
  return {std::sqrt(k_factor / (1.0 + k_factor)), std::sqrt(1.0 / (1.0 + k_factor))};
}

}  // namespace

CVector steering_vector(double angle, std::size_t m) {
  CVector a(static_cast<Eigen::Index>(m));
  const double step = std::numbers::pi * std::sin(angle);
  for (std::size_t i = 0; i < m; ++i) a[static_cast<Eigen::Index>(i)] = std::polar(1.0, step * static_cast<double>(i));
  return a;
}

Eigen::MatrixXcd RankOneChannel::dense() const { return gain * ris_response * bs_response.transpose(); }

ChannelSet realize_channels(const Scenario& s, std::uint64_t seed) {
  const auto m_bs = static_cast<Eigen::Index>(s.config.m_bs);
  const auto m_ris = static_cast<Eigen::Index>(s.config.m_ris);
  Rng rng(seed, "fading");

  ChannelSet cs;
  cs.n_bs = s.n_bs();
  cs.n_ue = s.n_ue();
  cs.n_ris = s.n_ris();

  cs.direct.reserve(cs.n_ue * cs.n_bs);
  for (std::size_t u = 0; u < cs.n_ue; ++u)
    for (std::size_t b = 0; b < cs.n_bs; ++b) {
      CVector g(m_bs);
      for (Eigen::Index i = 0; i < m_bs; ++i) g[i] = rng.complex_normal();
      cs.direct.push_back(s.ue_bs(u, b).gain * g);
    }

  cs.ris_bs.reserve(cs.n_ris * cs.n_bs);
  for (std::size_t r = 0; r < cs.n_ris; ++r)
    for (std::size_t b = 0; b < cs.n_bs; ++b) {
      const Link& link = s.ris_bs(r, b);
      cs.ris_bs.push_back({link.gain, steering_vector(link.arrival, s.config.m_ris),
                           steering_vector(link.departure, s.config.m_bs)});
    }

  cs.ue_ris.reserve(cs.n_ue * cs.n_ris);
  for (std::size_t u = 0; u < cs.n_ue; ++u)
    for (std::size_t r = 0; r < cs.n_ris; ++r) {
      const Link& link = s.ue_ris(u, r);
      const auto [k, kbar] = rician_weights(link.k_factor);
      CVector h = k * steering_vector(link.departure, s.config.m_ris);
      if (kbar > 0.0)
        for (Eigen::Index i = 0; i < m_ris; ++i) h[i] += kbar * rng.complex_normal();
      cs.ue_ris.push_back(link.gain * h);
    }
  return cs;
}

PhaseConfig optimal_phase_config(std::size_t r, std::size_t u, std::size_t d, const Scenario& s) {
  // Cancels the phase of the LOS RIS->UE response and of the RIS-side
  // response of the BS->RIS link, element by element.
  const double ue_step = std::numbers::pi * std::sin(s.ue_ris(u, r).departure);
  const double bs_step = std::numbers::pi * std::sin(s.ris_bs(r, d).arrival);
  PhaseConfig cfg;
  cfg.phases.resize(s.config.m_ris);
  for (std::size_t i = 0; i < cfg.phases.size(); ++i) {
    const double arg_ue = std::arg(std::polar(1.0, ue_step * static_cast<double>(i)));
    const double arg_bs = std::arg(std::polar(1.0, bs_step * static_cast<double>(i)));
    cfg.phases[i] = wrap_phase(-(arg_ue + arg_bs));
  }
  return cfg;
}

PhaseConfig random_phase_config(std::size_t m_ris, Rng& rng) {
  PhaseConfig cfg;
  cfg.phases.resize(m_ris);
  for (auto& phi : cfg.phases) phi = rng.uniform(0.0, kTwoPi);
  return cfg;
}

PhaseConfig random_phase_config(std::size_t m_ris, std::uint64_t seed) {
  Rng rng(seed, "phases");
  return random_phase_config(m_ris, rng);
}

CVector ris_cascade(const ChannelSet& cs, const PhaseConfig& phases, std::size_t u, std::size_t r,
                    std::size_t b) {
  const CVector& h = cs.h_ue_ris(u, r);
  const RankOneChannel& H = cs.h_ris_bs(r, b);
  if (static_cast<std::size_t>(h.size()) != phases.phases.size() || h.size() != H.ris_response.size())
    throw StructureError("ris_cascade: RIS dimension mismatch");
  // h^T Phi (g a_ris a_bs^T) = g (sum_i h_i e^{j phi_i} a_ris_i) a_bs^T
  std::complex<double> acc = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i)
    acc += h[i] * std::polar(1.0, phases.phases[static_cast<std::size_t>(i)]) * H.ris_response[i];
  return (H.gain * acc) * H.bs_response;
}

CVector composite_channel(const ChannelSet& cs, std::span<const PhaseConfig> phases, std::size_t u,
                          std::size_t b) {
  if (phases.size() != cs.n_ris) throw StructureError("composite_channel: need one PhaseConfig per RIS");
  CVector h = cs.h_direct(u, b);
  for (std::size_t r = 0; r < cs.n_ris; ++r) {
    if (cs.h_ris_bs(r, b).gain == 0.0 || cs.h_ue_ris(u, r).isZero(0.0)) continue;
    h += ris_cascade(cs, phases[r], u, r, b);
  }
  return h;
}

CVector beamformer(std::size_t b, std::span<const std::size_t> assigned, double power, const Scenario& s,
                   Rng& rng) {
  if (!(power > 0.0)) throw ArgumentError("beamformer: power must be positive");
  const std::size_t m = s.config.m_bs;
  const auto mi = static_cast<Eigen::Index>(m);
  if (assigned.empty()) {
    CVector v(mi);
    for (Eigen::Index i = 0; i < mi; ++i) v[i] = rng.complex_normal();
    return std::sqrt(power) * v / v.norm();
  }
  const double scale = std::sqrt(power / static_cast<double>(assigned.size())) / std::sqrt(static_cast<double>(m));
  CVector f = CVector::Zero(mi);
  for (std::size_t r : assigned) f += scale * steering_vector(s.ris_bs(r, b).departure, m).conjugate();
  return f;
}

SinrResult instantaneous_sinr(std::span<const CVector> h_user, std::span<const CVector> f_scheduled,
                              std::size_t serving, double noise) {
  if (h_user.size() != f_scheduled.size() || serving >= h_user.size())
    throw StructureError("instantaneous_sinr: per-BS inputs must align");
  auto received = [&](std::size_t b) {
    if (f_scheduled[b].size() == 0) return 0.0;
    if (h_user[b].size() != f_scheduled[b].size()) throw StructureError("instantaneous_sinr: antenna mismatch");
    return std::norm((h_user[b].array() * f_scheduled[b].array()).sum());
  };
  double interference = 0.0;
  for (std::size_t b = 0; b < h_user.size(); ++b)
    if (b != serving) interference += received(b);
  SinrResult out;
  out.sinr = received(serving) / (noise + interference);
  out.rate = std::log2(1.0 + out.sinr);
  return out;
}

}  // namespace risauction
