#include "ddmiqo/path_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ddmiqo/errors.hpp"

namespace ddmiqo {

void Instance::validate(int n) const {
  if (c.size() != static_cast<std::size_t>(n) || d.size() != static_cast<std::size_t>(n)) {
    throw InputError("instance has |c|=" + std::to_string(c.size()) + ", |d|=" + std::to_string(d.size()) +
                     " but the problem dimension is " + std::to_string(n));
  }
}

namespace {

void fill_lengths(const Diagram& d, const Instance& inst, std::vector<double>& out) {
  inst.validate(d.n);
  out.resize(d.arcs.size());
  for (std::size_t a = 0; a < d.arcs.size(); ++a) {
    const Arc& arc = d.arcs[a];
    if (arc.nu == 0) {
      out[a] = 0.0;
      continue;
    }
    const double ud = d.u_dot(static_cast<std::int64_t>(a), inst.d);
    out[a] = inst.c[static_cast<std::size_t>(arc.layer)] - 0.5 * ud * ud;
  }
}

PathResult run_dp(const Diagram& d, std::span<const double> lengths, std::vector<double>& dist,
                  std::vector<std::int64_t>& pred) {
  if (lengths.size() != d.arcs.size()) throw InputError("shortest_path: one length per arc is required");
  const auto nodes = static_cast<std::size_t>(d.node_count());
  dist.assign(nodes, std::numeric_limits<double>::infinity());
  pred.assign(nodes, -1);
  dist[0] = 0.0;
  for (std::size_t a = 0; a < d.arcs.size(); ++a) {
    const Arc& arc = d.arcs[a];
    const double cand = dist[static_cast<std::size_t>(arc.tail)] + lengths[a];
    const auto h = static_cast<std::size_t>(arc.head);
    bool take = cand < dist[h];
    if (!take && cand == dist[h] && pred[h] >= 0) {
      const Arc& cur = d.arcs[static_cast<std::size_t>(pred[h])];
      take = arc.nu < cur.nu || (arc.nu == cur.nu && arc.tail < cur.tail);
    }
    if (take) {
      dist[h] = cand;
      pred[h] = static_cast<std::int64_t>(a);
    }
  }
  std::int32_t best = -1;
  for (auto v = static_cast<std::size_t>(d.layer_begin[static_cast<std::size_t>(d.n)]); v < nodes; ++v) {
    if (best < 0 || dist[v] < dist[static_cast<std::size_t>(best)]) best = static_cast<std::int32_t>(v);
  }
  if (best < 0 || !std::isfinite(dist[static_cast<std::size_t>(best)])) {
    throw InputError("diagram has no root-to-terminal path");
  }
  PathResult r;
  r.value = dist[static_cast<std::size_t>(best)];
  r.arcs.resize(static_cast<std::size_t>(d.n));
  std::int32_t v = best;
  for (int l = d.n - 1; l >= 0; --l) {
    const std::int64_t a = pred[static_cast<std::size_t>(v)];
    r.arcs[static_cast<std::size_t>(l)] = a;
    v = d.arcs[static_cast<std::size_t>(a)].tail;
  }
  return r;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// q == nullptr skips the banded-solve cross-check.
Solution recover(const Diagram& d, std::span<const std::int64_t> path, const Instance& inst,
                 const BandedMatrix* q) {
  inst.validate(d.n);
  if (path.size() != static_cast<std::size_t>(d.n)) throw InputError("recover_solution: path must have one arc per layer");
  Solution s;
  s.z.assign(static_cast<std::size_t>(d.n), 0);
  s.x.assign(static_cast<std::size_t>(d.n), 0.0);
  s.mode = to_string(d.mode);
  s.epsilon = d.epsilon;
  if (d.mode == DiagramMode::kTruncated) s.truncation = d.truncation;
  double cz = 0.0;
  for (std::int64_t a : path) {
    const Arc& arc = d.arcs.at(static_cast<std::size_t>(a));
    s.z[static_cast<std::size_t>(arc.layer)] = arc.nu;
    if (arc.nu == 0) continue;
    cz += inst.c[static_cast<std::size_t>(arc.layer)];
    const double ud = d.u_dot(a, inst.d);
    s.x0 += ud * ud;
    const auto sup = d.u_support(a);
    const auto val = d.u_values(a);
    for (std::size_t t = 0; t < sup.size(); ++t) s.x[static_cast<std::size_t>(sup[t])] -= val[t] * ud;
  }
  s.path_length = cz - 0.5 * s.x0;
  s.objective = s.path_length + inst.constant;
  if (q == nullptr) return s;

  const std::vector<int> support = support_of(s.z);
  if (!support.empty()) {
    std::vector<double> rhs(inst.d.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -inst.d[i];
    const std::vector<double> ref = banded_solve(*q, support, rhs);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      s.verification_error = std::max(s.verification_error, std::abs(ref[i] - s.x[i]));
    }
    s.degraded = s.verification_error > kRecoveryTolerance;
  }
  return s;
}

}  // namespace

std::vector<double> arc_lengths(const Diagram& d, const Instance& inst) {
  std::vector<double> out;
  fill_lengths(d, inst, out);
  return out;
}

PathResult shortest_path(const Diagram& d, std::span<const double> lengths) {
  std::vector<double> dist;
  std::vector<std::int64_t> pred;
  return run_dp(d, lengths, dist, pred);
}

Solution recover_solution(const Diagram& d, std::span<const std::int64_t> path, const Instance& inst,
                          const BandedMatrix& q) {
  return recover(d, path, inst, &q);
}

double evaluate_objective(const BandedMatrix& q, const Instance& inst, std::span<const std::uint8_t> z) {
  inst.validate(q.size());
  if (z.size() != static_cast<std::size_t>(q.size())) throw InputError("evaluate_objective: z length mismatch");
  const std::vector<int> support = support_of(z);
  double value = inst.constant;
  for (int i : support) value += inst.c[static_cast<std::size_t>(i)];
  if (support.empty()) return value;
  std::vector<double> ds(support.size());
  for (std::size_t a = 0; a < support.size(); ++a) ds[a] = inst.d[static_cast<std::size_t>(support[a])];
  BandCholesky chol(q, support);
  std::vector<double> sol = ds;
  chol.solve(sol);
  double quad = 0.0;
  for (std::size_t a = 0; a < ds.size(); ++a) quad += ds[a] * sol[a];
  return value - 0.5 * quad;
}

PathSolver::PathSolver(const Diagram& d) : d_(&d) {
  lengths_.reserve(d.arcs.size());
  dist_.reserve(static_cast<std::size_t>(d.node_count()));
  pred_.reserve(static_cast<std::size_t>(d.node_count()));
}

void PathSolver::lengths_into(const Instance& inst) { fill_lengths(*d_, inst, lengths_); }

PathResult PathSolver::solve_path(const Instance& inst) {
  lengths_into(inst);
  return run_dp(*d_, lengths_, dist_, pred_);
}

Solution PathSolver::solve(const Instance& inst, bool verify) {
  const auto t0 = std::chrono::steady_clock::now();
  const PathResult path = solve_path(inst);
  const double solve_ms = elapsed_ms(t0);
  Solution s = recover(*d_, path.arcs, inst, verify ? &d_->q : nullptr);
  s.timings_ms["shortest_path"] = solve_ms;
  s.timings_ms["total"] = elapsed_ms(t0);
  return s;
}

}  // namespace ddmiqo
