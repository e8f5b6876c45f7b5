#pragma once

#include "ddmiqo/banded.hpp"
#include "ddmiqo/diagram.hpp"
#include "ddmiqo/path_solver.hpp"

namespace ddmiqo {

/// Decay constants of a banded positive definite Q:
/// |(Q_S^{-1})_ij| <= C0 gamma^{|i-j|/k} and the derived arc/path error constants.
struct FptasConstants {
  int k = 0;
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  double cond = 1.0;
  double gamma = 0.0;
  double C0 = 0.0;
  double Qmax = 0.0;
  double C1 = 0.0;
  double K = 0.0;
  double C = 0.0;
  /// gamma^{1/k}; 0 for k = 0 (no coupling between variables) or gamma = 0.
  double gamma_root() const noexcept;
};

/// Constants from given extreme eigenvalues (no eigen-solve).
FptasConstants constants_from_spectrum(double gamma_min, double gamma_max, double q_max, int k);

/// Extreme eigenvalues by power / inverse iteration, then constants_from_spectrum.
FptasConstants decay_constants(const BandedMatrix& q, double rel_tol = 1e-9);

/// Smallest m with C d_inf^2 n gamma^{m/k} <= eps, clamped to [1, n]; 1 when
/// gamma = 0, k = 0 or the log argument C d_inf^2 n / eps is at most 1.
int truncation_depth(const FptasConstants& consts, int k, int n, double d_inf, double eps);

/// C d_inf^2 n gamma^{m/k}.
double fptas_bound(const FptasConstants& consts, int n, double d_inf, int m);

struct FptasResult {
  Solution solution;
  FptasConstants constants;
  int m = 1;
  double bound = 0.0;  // C d_inf^2 n gamma^{m/k}; 0 when exact
  bool exact = false;  // m >= n: an exact diagram was solved instead
  std::int64_t arcs = 0;
};

/// Solves the unconstrained problem within additive eps. For m >= n the exact
/// compressed diagram is built; otherwise an m-truncated one. `base` supplies
/// budgets and threading.
FptasResult solve_fptas(const BandedMatrix& q, const Instance& inst, double eps,
                        const BuildConfig& base = {});

}  // namespace ddmiqo
