#include "ddmiqo/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ddmiqo/errors.hpp"

#ifdef DDMIQO_HAVE_OPENMP
#include <omp.h>
#endif

namespace ddmiqo {

bool runs_at_least(std::span<const std::uint8_t> z, int tau) {
  int run = 0;
  for (std::uint8_t v : z) {
    if (v != 0) {
      ++run;
    } else {
      if (run > 0 && run < tau) return false;
      run = 0;
    }
  }
  return run == 0 || run >= tau;
}

bool batch_start_feasible(std::span<const std::uint8_t> z, int tau) {
  const int n = static_cast<int>(z.size());
  if (tau < 1 || tau > n) throw InputError("batch-start formulation needs 1 <= tau <= n");
  auto zz = [&](int i) { return static_cast<int>(z[static_cast<std::size_t>(i - 1)] != 0); };
  const int starts = n + 1 - tau;
  // zeta only appears as a lower bound in the start rows and an upper bound in
  // the coverage rows, so the smallest admissible zeta is feasible iff any is.
  std::vector<int> zeta(static_cast<std::size_t>(starts) + 1, 0);
  zeta[1] = zz(1);
  for (int i = 2; i <= starts; ++i) zeta[static_cast<std::size_t>(i)] = std::max(0, zz(i) - zz(i - 1));
  for (int i = starts + 1; i <= n; ++i) {
    if (i >= 2 && zz(i) - zz(i - 1) > 0) return false;
  }
  for (int i = 1; i <= starts; ++i) {
    for (int j = 1; j <= tau; ++j) {
      if (zeta[static_cast<std::size_t>(i)] > zz(i + j - 1)) return false;
    }
  }
  return true;
}

bool ConstraintFilter::accepts(std::span<const std::uint8_t> z) const {
  switch (kind) {
    case Kind::kNone: return true;
    case Kind::kContiguity: return runs_at_least(z, tau);
    case Kind::kPredicate: return predicate ? predicate(z) : true;
  }
  return true;
}

namespace {

// Bit i of the mask is z[n-1-i], so mask order is lexicographic order of z.
void decode(std::uint64_t mask, int n, std::vector<std::uint8_t>& z) {
  for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((mask >> (n - 1 - i)) & 1U);
}

struct Best {
  double value = std::numeric_limits<double>::infinity();
  std::uint64_t mask = std::numeric_limits<std::uint64_t>::max();
  bool found = false;

  // Total order: smaller value, then smaller mask.
  void offer(double v, std::uint64_t m) {
    if (!found || v < value || (v == value && m < mask)) {
      value = v;
      mask = m;
      found = true;
    }
  }
  void merge(const Best& o) {
    if (o.found) offer(o.value, o.mask);
  }
};

Best scan(const BandedMatrix& q, const Instance& inst, const ConstraintFilter& filter,
          std::uint64_t begin, std::uint64_t end) {
  const int n = q.size();
  std::vector<std::uint8_t> z(static_cast<std::size_t>(n));
  Best best;
  for (std::uint64_t m = begin; m < end; ++m) {
    decode(m, n, z);
    if (!filter.accepts(z)) continue;
    best.offer(evaluate_objective(q, inst, z), m);
  }
  return best;
}

}  // namespace

Solution brute_force(const BandedMatrix& q, const Instance& inst, const ConstraintFilter& filter,
                     const OracleOptions& options) {
  const int n = q.size();
  inst.validate(n);
  if (n > options.cap || n > 62) {
    throw InputError("brute force limited to n <= " + std::to_string(std::min(options.cap, 62)) +
                     " (n=" + std::to_string(n) + ")");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t total = std::uint64_t{1} << n;
  Best best;
#ifdef DDMIQO_HAVE_OPENMP
  if (options.parallel && total >= 1024) {
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
    const auto chunks = static_cast<std::int64_t>(std::min<std::uint64_t>(total / 256, 4096));
    std::vector<Best> partial(static_cast<std::size_t>(chunks));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t c = 0; c < chunks; ++c) {
      const std::uint64_t b = total * static_cast<std::uint64_t>(c) / static_cast<std::uint64_t>(chunks);
      const std::uint64_t e = total * static_cast<std::uint64_t>(c + 1) / static_cast<std::uint64_t>(chunks);
      try {
        partial[static_cast<std::size_t>(c)] = scan(q, inst, filter, b, e);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (const Best& p : partial) best.merge(p);
  } else {
    best = scan(q, inst, filter, 0, total);
  }
#else
  (void)options;
  best = scan(q, inst, filter, 0, total);
#endif
  if (!best.found) throw InputError("no z satisfies the constraint filter");

  Solution s;
  s.mode = "oracle";
  s.z.resize(static_cast<std::size_t>(n));
  decode(best.mask, n, s.z);
  s.objective = best.value;
  s.path_length = best.value - inst.constant;
  s.x.assign(static_cast<std::size_t>(n), 0.0);
  const std::vector<int> support = support_of(s.z);
  if (!support.empty()) {
    std::vector<double> rhs(inst.d.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -inst.d[i];
    s.x = banded_solve(q, support, rhs);
    for (int i : support) s.x0 -= s.x[static_cast<std::size_t>(i)] * inst.d[static_cast<std::size_t>(i)];
  }
  s.timings_ms["enumerate"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

bool contiguity_equivalence_check(int n, int tau, std::vector<std::vector<std::uint8_t>>* feasible) {
  if (n < 1 || n > 16) throw InputError("contiguity_equivalence_check supports 1 <= n <= 16");
  if (tau < 1 || tau > n) throw InputError("contiguity_equivalence_check needs 1 <= tau <= n");
  if (feasible != nullptr) feasible->clear();
  std::vector<std::uint8_t> z(static_cast<std::size_t>(n));
  bool ok = true;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    decode(m, n, z);
    const bool by_runs = runs_at_least(z, tau);
    if (by_runs != batch_start_feasible(z, tau)) ok = false;
    if (by_runs && feasible != nullptr) feasible->push_back(z);
  }
  return ok;
}

}  // namespace ddmiqo
