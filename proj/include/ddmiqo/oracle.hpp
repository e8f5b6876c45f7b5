#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ddmiqo/banded.hpp"
#include "ddmiqo/path_solver.hpp"

namespace ddmiqo {

/// Every maximal run of ones in z has length at least tau.
bool runs_at_least(std::span<const std::uint8_t> z, int tau);

/// Feasibility of z under the batch-start formulation with auxiliary zeta:
///   z_1 <= zeta_1;  z_i - z_{i-1} <= zeta_i  (2 <= i <= n+1-tau);
///   z_i - z_{i-1} <= 0  (n+2-tau <= i <= n);  zeta_i <= z_{i+j-1}  (j = 1..tau),
/// in 1-based indexes. Requires 1 <= tau <= n.
bool batch_start_feasible(std::span<const std::uint8_t> z, int tau);

struct ConstraintFilter {
  enum class Kind { kNone, kContiguity, kPredicate };
  Kind kind = Kind::kNone;
  int tau = 0;
  std::function<bool(std::span<const std::uint8_t>)> predicate;

  static ConstraintFilter none() { return {}; }
  static ConstraintFilter contiguity(int tau) { return {Kind::kContiguity, tau, {}}; }
  static ConstraintFilter custom(std::function<bool(std::span<const std::uint8_t>)> p) {
    return {Kind::kPredicate, 0, std::move(p)};
  }
  bool accepts(std::span<const std::uint8_t> z) const;
};

struct OracleOptions {
  int cap = 20;
  bool parallel = true;
  int threads = 0;
};

/// Minimizes evaluate_objective over every accepted z in {0,1}^n. Ties go to
/// the lexicographically smallest z (z[0] most significant). Throws InputError
/// when n exceeds the cap or no z is accepted.
Solution brute_force(const BandedMatrix& q, const Instance& inst, const ConstraintFilter& filter = {},
                     const OracleOptions& options = {});

/// Checks over the whole cube that batch_start_feasible(z, tau) == runs_at_least(z, tau).
/// `feasible`, when non-null, receives the accepted vectors in lexicographic order.
bool contiguity_equivalence_check(int n, int tau,
                                  std::vector<std::vector<std::uint8_t>>* feasible = nullptr);

}  // namespace ddmiqo
