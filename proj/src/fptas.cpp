#include "ddmiqo/fptas.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ddmiqo/errors.hpp"
#include "ddmiqo/spectrum.hpp"

namespace ddmiqo {

double FptasConstants::gamma_root() const noexcept {
  if (k == 0 || gamma <= 0.0) return 0.0;
  return std::pow(gamma, 1.0 / k);
}

FptasConstants constants_from_spectrum(double gamma_min, double gamma_max, double q_max, int k) {
  if (!(gamma_min > 0.0) || !(gamma_max >= gamma_min) || !std::isfinite(gamma_max)) {
    throw NumericalError("eigenvalue estimates are not those of a positive definite matrix");
  }
  FptasConstants c;
  c.k = k;
  c.gamma_min = gamma_min;
  c.gamma_max = gamma_max;
  c.cond = std::max(1.0, gamma_max / gamma_min);
  const double root_cond = std::sqrt(c.cond);
  c.gamma = (root_cond - 1.0) / (root_cond + 1.0);
  c.C0 = std::max(1.0, (1.0 + root_cond) * (1.0 + root_cond) / (2.0 * c.cond)) / gamma_min;
  c.Qmax = q_max;
  const double g = c.gamma_root();
  const double one_minus = 1.0 - g;
  c.C1 = c.Qmax * (c.C0 / one_minus) * (c.C0 / one_minus);
  c.K = std::max(c.C0, c.Qmax * c.C0 * c.C0 * g / (one_minus * one_minus));
  c.C = c.C0 * c.Qmax * (2.0 * c.C0 + 2.0 * c.C1 + c.C0 * c.C1 * c.Qmax) * g /
        (2.0 * one_minus * one_minus);
  return c;
}

FptasConstants decay_constants(const BandedMatrix& q, double rel_tol) {
  const EigenEstimate hi = power_max_eigenvalue(q, rel_tol);
  const EigenEstimate lo = inverse_min_eigenvalue(q, rel_tol);
  // Estimates that agree to within the iteration tolerance are one eigenvalue (e.g. Q = I).
  double gmax = std::max(hi.value, lo.value);
  if (gmax - lo.value <= rel_tol * gmax) gmax = lo.value;
  return constants_from_spectrum(lo.value, gmax, q.max_diagonal(), q.bandwidth());
}

int truncation_depth(const FptasConstants& consts, int k, int n, double d_inf, double eps) {
  if (!(eps > 0.0)) throw InputError("FPTAS target epsilon must be positive");
  if (n < 1) throw InputError("dimension must be positive");
  if (k == 0 || consts.gamma <= 0.0) return 1;
  const double arg = consts.C * d_inf * d_inf * n / eps;
  if (!(arg > 1.0)) return 1;
  const double m = std::ceil(k / std::abs(std::log(consts.gamma)) * std::log(arg));
  if (!std::isfinite(m) || m >= n) return n;
  return std::max(1, static_cast<int>(m));
}

double fptas_bound(const FptasConstants& consts, int n, double d_inf, int m) {
  if (consts.k == 0 || consts.gamma <= 0.0) return 0.0;
  return consts.C * d_inf * d_inf * n * std::pow(consts.gamma, static_cast<double>(m) / consts.k);
}

FptasResult solve_fptas(const BandedMatrix& q, const Instance& inst, double eps, const BuildConfig& base) {
  inst.validate(q.size());
  const auto t0 = std::chrono::steady_clock::now();
  FptasResult r;
  r.constants = decay_constants(q);
  double d_inf = 0.0;
  for (double v : inst.d) d_inf = std::max(d_inf, std::abs(v));
  const int n = q.size();
  r.m = truncation_depth(r.constants, q.bandwidth(), n, d_inf, eps);
  r.exact = r.m >= n;
  // With no truncation the diagram is exact and the only error is round-off.
  r.bound = r.exact ? 0.0 : fptas_bound(r.constants, n, d_inf, r.m);

  BuildConfig cfg = base;
  cfg.keep_states = false;
  if (r.exact) {
    cfg.epsilon = 0.0;
    cfg.truncation = 0;
  } else {
    cfg.truncation = r.m;
  }
  const auto t1 = std::chrono::steady_clock::now();
  const Diagram d = build_diagram(q, cfg);
  const auto t2 = std::chrono::steady_clock::now();
  r.arcs = d.arc_count();
  PathSolver solver(d);
  r.solution = solver.solve(inst);
  r.solution.mode = "fptas";
  r.solution.epsilon = eps;
  r.solution.fptas_bound = r.bound;
  r.solution.truncation = r.m;
  using ms = std::chrono::duration<double, std::milli>;
  r.solution.timings_ms["constants"] = ms(t1 - t0).count();
  r.solution.timings_ms["build"] = ms(t2 - t1).count();
  return r;
}

}  // namespace ddmiqo
