#include "estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "errors.hpp"

namespace risauction {

namespace {

std::atomic<std::uint64_t> g_zero_denominators{0};

double square(double x) { return x * x; }

double kbar_sq(double k_factor) { return std::isinf(k_factor) ? 0.0 : 1.0 / (1.0 + k_factor); }
double k_amp(double k_factor) { return std::isinf(k_factor) ? 1.0 : std::sqrt(k_factor / (1.0 + k_factor)); }

}  // namespace

Allocation Allocation::empty(std::size_t n_bs) {
  Allocation a;
  a.assigned.resize(n_bs);
  a.payments.resize(n_bs);
  return a;
}

std::optional<std::size_t> Allocation::owner_of(std::size_t ris) const {
  for (std::size_t b = 0; b < assigned.size(); ++b)
    if (std::find(assigned[b].begin(), assigned[b].end(), ris) != assigned[b].end()) return b;
  return std::nullopt;
}

void Allocation::validate() const {
  if (payments.size() != assigned.size()) throw StructureError("Allocation: payments/assigned BS count mismatch");
  std::vector<std::size_t> all;
  for (std::size_t b = 0; b < assigned.size(); ++b) {
    if (payments[b].size() != assigned[b].size()) throw StructureError("Allocation: payment per RIS required");
    all.insert(all.end(), assigned[b].begin(), assigned[b].end());
  }
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw StructureError("Allocation: RIS assigned to more than one BS");
}

double Allocation::total_payment(std::size_t bs) const {
  double sum = 0.0;
  for (double p : payments.at(bs)) sum += p;
  return sum;
}

std::size_t Allocation::total_assigned() const {
  std::size_t n = 0;
  for (const auto& set : assigned) n += set.size();
  return n;
}

SinrTerms estimate_sinr_terms(const Scenario& s, std::span<const std::size_t> serving_set, std::size_t u,
                              std::size_t d) {
  const auto& cfg = s.config;
  const double power = cfg.tx_power;
  const double m_bs = static_cast<double>(cfg.m_bs);
  const double m_ris = static_cast<double>(cfg.m_ris);

  std::vector<char> in_set(s.n_ris(), 0);
  for (std::size_t r : serving_set) {
    if (r >= s.n_ris()) throw StructureError("estimate_sinr: RIS index out of range");
    in_set[r] = 1;
  }

  SinrTerms t;
  t.noise = s.noise_power;
  t.direct = square(s.ue_bs(u, d).gain) * power;

  if (!serving_set.empty()) {
    const double per_beam = power * m_bs / static_cast<double>(serving_set.size());
    double amplitude = 0.0;
    for (std::size_t r : serving_set) {
      const Link& ur = s.ue_ris(u, r);
      const double g = ur.gain * s.ris_bs(r, d).gain;
      amplitude += g * k_amp(ur.k_factor) * std::sqrt(per_beam) * m_ris;
      t.incoherent += square(g) * kbar_sq(ur.k_factor) * per_beam * m_ris;
    }
    t.coherent = square(amplitude);
  }

  for (std::size_t b = 0; b < s.n_bs(); ++b) {
    if (b == d) continue;
    t.interference += square(s.ue_bs(u, b).gain) * power;
    for (std::size_t r = 0; r < s.n_ris(); ++r) {
      if (in_set[r]) continue;
      t.ris_interference += square(s.ue_ris(u, r).gain) * square(s.ris_bs(r, b).gain) * power * m_ris;
    }
  }

  t.sinr = (t.direct + t.coherent + t.incoherent) / (t.noise + t.interference + t.ris_interference);
  return t;
}

double estimate_sinr(const Scenario& s, const Allocation& alloc, std::size_t u, std::size_t d) {
  if (d >= alloc.assigned.size()) throw StructureError("estimate_sinr: allocation lacks serving BS");
  return estimate_sinr_terms(s, alloc.assigned[d], u, d).sinr;
}

double estimate_rate(double beta_hat) {
  if (beta_hat < 0.0 || std::isnan(beta_hat)) throw ArgumentError("estimate_rate: negative SINR");
  return std::log2(1.0 + beta_hat);
}

UtilityModel::UtilityModel(const Scenario& s) : s_(&s), users_(s.n_bs()), baseline_(s.n_bs(), 0.0) {
  for (std::size_t b = 0; b < s.n_bs(); ++b) {
    users_[b] = s.users_of(b);
    baseline_[b] = sum_rate(b, {});
  }
}

double UtilityModel::sum_rate(std::size_t b, std::span<const std::size_t> set) const {
  double total = 0.0;
  for (std::size_t u : users_[b]) total += estimate_rate(estimate_sinr_terms(*s_, set, u, b).sinr);
  return total;
}

double UtilityModel::utility(std::size_t b, std::span<const std::size_t> set) const {
  if (b >= baseline_.size()) throw ArgumentError("utility: BS index out of range");
  if (set.empty()) return 0.0;
  if (baseline_[b] <= 0.0) {
    g_zero_denominators.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return sum_rate(b, set) / baseline_[b] - 1.0;
}

std::vector<double> UtilityModel::marginal_values(std::size_t b, std::span<const std::size_t> current,
                                                  std::span<const std::size_t> available) const {
  const double base = utility(b, current);
  std::vector<double> values;
  values.reserve(available.size());
  RisSet extended(current.begin(), current.end());
  extended.push_back(0);
  for (std::size_t r : available) {
    if (std::find(current.begin(), current.end(), r) != current.end())
      throw ArgumentError("marginal_values: available RIS already held");
    extended.back() = r;
    values.push_back(utility(b, extended) - base);
  }
  return values;
}

double utility(const Scenario& s, std::size_t b, std::span<const std::size_t> alloc_b,
               const Allocation& /*alloc_others*/) {
  return UtilityModel(s).utility(b, alloc_b);
}

std::vector<double> marginal_values(const Scenario& s, std::size_t b, std::span<const std::size_t> current,
                                    std::span<const std::size_t> available, const Allocation& /*alloc_others*/) {
  return UtilityModel(s).marginal_values(b, current, available);
}

std::vector<double> normalize_values(std::span<const double> raw) {
  double scale = 0.0;
  for (double v : raw) scale = std::max(scale, std::abs(v));
  std::vector<double> out(raw.begin(), raw.end());
  if (scale == 0.0) return out;
  for (double& v : out) v /= scale;
  return out;
}

std::uint64_t zero_denominator_count() { return g_zero_denominators.load(std::memory_order_relaxed); }

}  // namespace risauction
