#include <doctest.h>

#include "ddmiqo/oracle.hpp"
#include "ddmiqo/report.hpp"
#include "support.hpp"

using namespace ddmiqo;

TEST_CASE("latency summary") {
  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(i);
  const LatencySummary s = summarize_latency(v);
  CHECK(s.count == 100);
  CHECK(s.mean == doctest::Approx(50.5));
  CHECK(s.median == doctest::Approx(50.5));
  CHECK(s.p99 == 99.0);
  CHECK(s.max == 100.0);
  CHECK(summarize_latency({7.0}).p99 == 7.0);
  CHECK(summarize_latency({}).count == 0);
  CHECK(latency_to_json(s)["median"] == 50.5);
}

TEST_CASE("gap metrics") {
  std::mt19937_64 rng(67);
  const BandedMatrix q = testsupport::random_banded_pd(8, 2, rng);
  Instance inst = testsupport::random_instance(8, rng);
  inst.constant = 0.5;
  const Solution ref = brute_force(q, inst);
  const GapMetrics same = gap_metrics(q, inst, ref, ref);
  CHECK(same.same_z);
  CHECK(same.objective_gap == 0.0);
  CHECK(same.solution_gap == 0.0);

  Solution other = ref;
  other.z.assign(8, 0);
  other.objective = evaluate_objective(q, inst, other.z);
  const GapMetrics g = gap_metrics(q, inst, other, ref);
  const double h = evaluate_objective(q, inst, other.z) - 0.5;
  const double href = evaluate_objective(q, inst, ref.z) - 0.5;
  CHECK_FALSE(g.same_z);
  CHECK(g.solution_gap == doctest::Approx((h - href) / href));
  CHECK(g.objective_gap == doctest::Approx((other.objective - ref.objective) / ref.objective));

  Instance zero = inst;
  std::fill(zero.d.begin(), zero.d.end(), 0.0);
  std::fill(zero.c.begin(), zero.c.end(), 0.0);
  zero.constant = 0.0;
  Solution a = brute_force(q, zero);
  Solution b = a;
  b.z.assign(8, 1);
  b.objective = a.objective + 0.25;
  const GapMetrics abs = gap_metrics(q, zero, b, a);
  CHECK(abs.objective_gap == doctest::Approx(0.25));
}

TEST_CASE("solution json") {
  Solution s;
  s.z = {1, 0};
  s.x = {0.5, 0.0};
  s.objective = -1.0;
  s.fptas_bound = 1e-3;
  const auto j = solution_to_json(s);
  CHECK(j["z"] == std::vector<int>{1, 0});
  CHECK(j["objective"] == -1.0);
  CHECK(j["fptas_bound"] == 1e-3);
  CHECK(j.contains("timings_ms"));
  CHECK_FALSE(solution_to_json(s, false).contains("x"));
}
