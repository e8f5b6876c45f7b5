#pragma once

// Independent dense references for the unit and acceptance tests.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "ddmiqo/banded.hpp"
#include "ddmiqo/hull.hpp"
#include "ddmiqo/path_solver.hpp"

namespace testsupport {

inline Eigen::MatrixXd dense(const ddmiqo::BandedMatrix& q) {
  const int n = q.size();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = q(i, j);
  }
  return m;
}

/// Symmetric banded matrix, strictly diagonally dominant (hence PD). Off-band
/// entries are zeroed with probability `zero_prob` to vary the relevant indexes.
inline ddmiqo::BandedMatrix random_banded_pd(int n, int k, std::mt19937_64& rng, double zero_prob = 0.2) {
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  std::uniform_real_distribution<double> margin(0.1, 1.5);
  std::bernoulli_distribution zero(zero_prob);
  k = std::min(k, n - 1);
  std::vector<std::vector<double>> bands(static_cast<std::size_t>(k) + 1);
  for (int b = 0; b <= k; ++b) bands[static_cast<std::size_t>(b)].assign(static_cast<std::size_t>(n - b), 0.0);
  std::vector<double> rowsum(static_cast<std::size_t>(n), 0.0);
  for (int b = 1; b <= k; ++b) {
    for (int i = 0; i + b < n; ++i) {
      const double v = zero(rng) ? 0.0 : off(rng);
      bands[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] = v;
      rowsum[static_cast<std::size_t>(i)] += std::abs(v);
      rowsum[static_cast<std::size_t>(i + b)] += std::abs(v);
    }
  }
  for (int i = 0; i < n; ++i) bands[0][static_cast<std::size_t>(i)] = rowsum[static_cast<std::size_t>(i)] + margin(rng);
  return ddmiqo::BandedMatrix::from_bands(n, k, std::move(bands));
}

/// (Q o zz^T)^+ through an LU inverse of Q_S, independent of the library oracle.
inline Eigen::MatrixXd dense_pseudoinverse(const ddmiqo::BandedMatrix& q, const std::vector<std::uint8_t>& z) {
  const int n = q.size();
  std::vector<int> s;
  for (int i = 0; i < n; ++i) {
    if (z[static_cast<std::size_t>(i)]) s.push_back(i);
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  if (s.empty()) return out;
  const Eigen::MatrixXd full = dense(q);
  const auto m = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd qs(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) qs(a, b) = full(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
  }
  const Eigen::MatrixXd inv = qs.partialPivLu().inverse();
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) out(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]) = inv(a, b);
  }
  return out;
}

/// h(z) + constant via the dense pseudoinverse.
inline double dense_objective(const ddmiqo::BandedMatrix& q, const ddmiqo::Instance& inst,
                              const std::vector<std::uint8_t>& z) {
  const Eigen::MatrixXd w = dense_pseudoinverse(q, z);
  const Eigen::Map<const Eigen::VectorXd> d(inst.d.data(), static_cast<Eigen::Index>(inst.d.size()));
  double v = inst.constant - 0.5 * d.dot(w * d);
  for (std::size_t i = 0; i < z.size(); ++i) v += z[i] ? inst.c[i] : 0.0;
  return v;
}

inline std::vector<std::uint8_t> bits(std::uint64_t mask, int n) {
  std::vector<std::uint8_t> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((mask >> (n - 1 - i)) & 1U);
  return z;
}

/// Minimum run length of ones in z (n + 1 when z has no ones).
inline int shortest_run(const std::vector<std::uint8_t>& z) {
  int best = std::numeric_limits<int>::max();  // no run of ones at all
  int run = 0;
  for (std::size_t i = 0; i <= z.size(); ++i) {
    if (i < z.size() && z[i]) {
      ++run;
    } else if (run > 0) {
      best = std::min(best, run);
      run = 0;
    }
  }
  return best;
}

/// Dense minimizer over all z (optionally run-length filtered), lexicographic ties.
inline std::pair<std::vector<std::uint8_t>, double> dense_brute_force(const ddmiqo::BandedMatrix& q,
                                                                       const ddmiqo::Instance& inst, int tau = 0) {
  const int n = q.size();
  std::vector<std::uint8_t> best_z;
  double best = 0.0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    auto z = bits(m, n);
    if (tau > 0 && shortest_run(z) < tau) continue;
    const double v = dense_objective(q, inst, z);
    if (best_z.empty() || v < best) {
      best = v;
      best_z = z;
    }
  }
  return {best_z, best};
}

inline ddmiqo::Instance random_instance(int n, std::mt19937_64& rng, double c_lo = 0.0, double c_hi = 0.3) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> cost(c_lo, c_hi);
  ddmiqo::Instance inst;
  for (int i = 0; i < n; ++i) {
    inst.c.push_back(cost(rng));
    inst.d.push_back(normal(rng));
  }
  inst.constant = 0.0;
  return inst;
}

/// Every 0/1 assignment of the r variables satisfying the flow, source and sink
/// rows, found by backtracking over the rows alone (no use of the diagram's
/// path structure). Returns the number of solutions.
inline std::size_t enumerate_binary_flows(const ddmiqo::HullFormulation& h,
                                          const std::function<void(const std::vector<std::uint8_t>&)>& visit) {
  struct Row {
    double rhs;
    double sum = 0.0;
    double lo = 0.0;  // still reachable below / above sum from unassigned variables
    double hi = 0.0;
  };
  std::vector<Row> rows;
  std::vector<std::vector<std::pair<std::size_t, double>>> uses(static_cast<std::size_t>(h.arcs));
  for (const auto& row : h.rows) {
    if (row.family != "flow" && row.family != "source" && row.family != "sink") continue;
    Row r{row.rhs};
    for (const auto& [v, coef] : row.terms) {
      if (v >= h.arcs) throw std::logic_error("flow row touches a non-flow variable");
      uses[static_cast<std::size_t>(v)].push_back({rows.size(), coef});
      (coef < 0 ? r.lo : r.hi) += coef;
    }
    rows.push_back(r);
  }
  std::vector<std::uint8_t> r(static_cast<std::size_t>(h.arcs), 0);
  std::size_t found = 0;
  const auto ok = [&](std::size_t a) {
    for (const auto& [ri, coef] : uses[a]) {
      const Row& row = rows[ri];
      if (row.rhs < row.sum + row.lo - 1e-9 || row.rhs > row.sum + row.hi + 1e-9) return false;
    }
    return true;
  };
  std::function<void(std::size_t)> rec = [&](std::size_t a) {
    if (a == r.size()) {
      ++found;
      visit(r);
      return;
    }
    for (std::uint8_t val : {std::uint8_t{0}, std::uint8_t{1}}) {
      for (const auto& [ri, coef] : uses[a]) {
        (coef < 0 ? rows[ri].lo : rows[ri].hi) -= coef;
        rows[ri].sum += val * coef;
      }
      r[a] = val;
      if (ok(a)) rec(a + 1);
      for (const auto& [ri, coef] : uses[a]) {
        (coef < 0 ? rows[ri].lo : rows[ri].hi) += coef;
        rows[ri].sum -= val * coef;
      }
    }
    r[a] = 0;
  };
  rec(0);
  return found;
}

}  // namespace testsupport
