#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddmiqo/banded.hpp"
#include "ddmiqo/diagram.hpp"

namespace ddmiqo {

/// min c^T z + d^T x + 1/2 x^T Q x + constant  s.t.  x_i = 0 where z_i = 0, z in Z.
struct Instance {
  std::vector<double> c;
  std::vector<double> d;
  double constant = 0.0;
  std::optional<double> mu;  // set when c = mu * 1

  int size() const noexcept { return static_cast<int>(d.size()); }
  /// Throws InputError unless c and d both have length n.
  void validate(int n) const;
};

struct Solution {
  std::vector<std::uint8_t> z;
  std::vector<double> x;
  double x0 = 0.0;          // x^T Q x
  double objective = 0.0;   // h(z) + constant
  double path_length = 0.0; // h(z) as the sum of arc lengths
  std::string mode = "exact";
  double epsilon = 0.0;
  std::optional<double> fptas_bound;
  std::optional<int> truncation;
  double verification_error = 0.0;  // ||x - banded_solve x||_inf
  bool degraded = false;            // verification_error above kRecoveryTolerance
  std::map<std::string, double> timings_ms;
};

inline constexpr double kRecoveryTolerance = 1e-6;

/// l_a = c_{layer(a)} nu_a - (d^T u_a)^2 / 2.
std::vector<double> arc_lengths(const Diagram& d, const Instance& inst);

struct PathResult {
  std::vector<std::int64_t> arcs;  // one per layer, root to terminal
  double value = 0.0;
};

/// Forward pass in layer order. On equal values the nu = 0 arc wins, then the
/// lower tail id; among terminals the lower id wins.
PathResult shortest_path(const Diagram& d, std::span<const double> lengths);

/// x = -sum u_a (u_a^T d), x0 = sum (u_a^T d)^2 along the path, cross-checked
/// against a banded solve of Q_S x_S = -d_S.
Solution recover_solution(const Diagram& d, std::span<const std::int64_t> path, const Instance& inst,
                          const BandedMatrix& q);

/// h(z) + constant = c^T z - 1/2 d_S^T Q_S^{-1} d_S + constant, independent of any diagram.
double evaluate_objective(const BandedMatrix& q, const Instance& inst, std::span<const std::uint8_t> z);

/// Reusable solver bound to one diagram; per-solve buffers are allocated once.
/// Not thread-safe; use one instance per thread.
class PathSolver {
 public:
  explicit PathSolver(const Diagram& d);

  PathResult solve_path(const Instance& inst);
  /// Shortest path plus recovery. `verify` toggles the banded-solve cross-check.
  Solution solve(const Instance& inst, bool verify = true);

  const Diagram& diagram() const noexcept { return *d_; }

 private:
  void lengths_into(const Instance& inst);

  const Diagram* d_;
  std::vector<double> lengths_;
  std::vector<double> dist_;
  std::vector<std::int64_t> pred_;
};

}  // namespace ddmiqo
