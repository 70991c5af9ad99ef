#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scenario.hpp"

namespace risauction {

using RisSet = std::vector<std::size_t>;

/// RIS ownership after (or during) an auction.
struct Allocation {
  std::vector<RisSet> assigned;              // per BS, sorted
  std::vector<std::vector<double>> payments;  // per BS, aligned with assigned

  static Allocation empty(std::size_t n_bs);

  std::optional<std::size_t> owner_of(std::size_t ris) const;
  /// Throws StructureError if sets overlap or payments are misaligned.
  void validate() const;
  double total_payment(std::size_t bs) const;
  std::size_t total_assigned() const;
};

/// Macroscopic SINR decomposition for one user.
struct SinrTerms {
  double direct = 0.0;           // p_d
  double coherent = 0.0;         // p_c
  double incoherent = 0.0;       // p_i
  double interference = 0.0;     // i_d
  double ris_interference = 0.0; // i_i
  double noise = 0.0;
  double sinr = 0.0;
};

/// SINR estimate of user u served by BS d holding `serving_set`, computed from
/// expected received powers. Interferers are modeled as isotropic transmitters
/// at full power, and RISs outside the serving set reflect incoherently.
SinrTerms estimate_sinr_terms(const Scenario& s, std::span<const std::size_t> serving_set, std::size_t u,
                              std::size_t d);

double estimate_sinr(const Scenario& s, const Allocation& alloc, std::size_t u, std::size_t d);

/// log2(1 + beta_hat).
double estimate_rate(double beta_hat);

/// Cached utility evaluation for one scenario. The no-RIS reference sum rate
/// of each BS is computed once.
class UtilityModel {
 public:
  explicit UtilityModel(const Scenario& s);

  const Scenario& scenario() const { return *s_; }

  /// Relative estimated sum-rate gain of BS b's users with `set` over none.
  double utility(std::size_t b, std::span<const std::size_t> set) const;

  /// V(r) = U(current + r) - U(current) for each r in `available`.
  std::vector<double> marginal_values(std::size_t b, std::span<const std::size_t> current,
                                      std::span<const std::size_t> available) const;

  double baseline_sum_rate(std::size_t b) const { return baseline_[b]; }

 private:
  double sum_rate(std::size_t b, std::span<const std::size_t> set) const;

  const Scenario* s_;
  std::vector<std::vector<std::size_t>> users_;
  std::vector<double> baseline_;
};

/// Utility of BS b holding alloc_b. Other BSs' holdings do not enter the
/// estimate, which treats every interferer as isotropic.
double utility(const Scenario& s, std::size_t b, std::span<const std::size_t> alloc_b,
               const Allocation& alloc_others);

std::vector<double> marginal_values(const Scenario& s, std::size_t b, std::span<const std::size_t> current,
                                    std::span<const std::size_t> available, const Allocation& alloc_others);

/// Divides by the largest magnitude; an all-zero vector stays all-zero.
std::vector<double> normalize_values(std::span<const double> raw);

/// Number of utility evaluations whose no-RIS reference rate was zero.
std::uint64_t zero_denominator_count();

}  // namespace risauction
