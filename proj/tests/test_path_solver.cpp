#include <doctest.h>

#include <cmath>

#include "ddmiqo/automaton.hpp"
#include "ddmiqo/errors.hpp"
#include "ddmiqo/path_solver.hpp"
#include "support.hpp"

using namespace ddmiqo;

namespace {

BandedMatrix coupled3() {
  return BandedMatrix::from_dense(2, {{2, -1, -1}, {-1, 3, -1}, {-1, -1, 2}});
}

}  // namespace

TEST_CASE("single variable arc length and optimum") {
  const BandedMatrix q = BandedMatrix::from_bands(1, 0, {{2.0}});
  const Diagram d = build_diagram(q, BuildConfig{});
  Instance inst{{1.0}, {-3.0}, 0.0, std::nullopt};
  const auto len = arc_lengths(d, inst);
  REQUIRE(len.size() == 2);
  for (std::size_t a = 0; a < 2; ++a) CHECK(len[a] == doctest::Approx(d.arcs[a].nu ? -1.25 : 0.0).epsilon(1e-14));
  PathSolver solver(d);
  const Solution s = solver.solve(inst);
  CHECK(s.z == std::vector<std::uint8_t>{1});
  CHECK(s.objective == doctest::Approx(-1.25).epsilon(1e-14));
  CHECK(s.x[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK_FALSE(s.degraded);
  CHECK(s.timings_ms.count("shortest_path") == 1);
}

TEST_CASE("recovery on the three variable example") {
  const BandedMatrix q = coupled3();
  const Diagram d = build_diagram(q, BuildConfig{});
  Instance inst{{0, 0, 0}, {1, 1, 0}, 0.0, std::nullopt};
  const std::vector<std::uint8_t> z{1, 1, 0};
  const Solution s = recover_solution(d, find_path(d, z), inst, q);
  CHECK(s.x[0] == doctest::Approx(-0.8).epsilon(1e-12));
  CHECK(s.x[1] == doctest::Approx(-0.6).epsilon(1e-12));
  CHECK(s.x[2] == 0.0);
  CHECK(s.x0 == doctest::Approx(1.4).epsilon(1e-12));
  CHECK(s.verification_error < 1e-12);

  Instance full{{0, 0, 0}, {1, 1, 1}, 0.0, std::nullopt};
  const std::vector<std::uint8_t> ones{1, 1, 1};
  const auto dq = testsupport::dense(q);
  const Eigen::VectorXd dv = Eigen::VectorXd::Ones(3);
  const double expect = -0.5 * dv.dot(dq.partialPivLu().solve(dv));
  CHECK(evaluate_objective(q, full, ones) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(recover_solution(d, find_path(d, ones), full, q).objective == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("path lengths equal h(z) for every path") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 1 + rep % 10;
    const BandedMatrix q = testsupport::random_banded_pd(n, 1 + rep % 3, rng);
    const Diagram d = build_diagram(q, BuildConfig{});
    Instance inst = testsupport::random_instance(n, rng, -0.5, 0.5);
    inst.constant = 0.75;
    const auto len = arc_lengths(d, inst);
    for (const auto& z : enumerate_paths(d)) {
      const auto path = find_path(d, z);
      double total = 0.0;
      for (auto a : path) total += len[static_cast<std::size_t>(a)];
      CHECK(total + inst.constant == doctest::Approx(evaluate_objective(q, inst, z)).epsilon(1e-10));
      CHECK(total + inst.constant == doctest::Approx(testsupport::dense_objective(q, inst, z)).epsilon(1e-10));
    }
  }
}

TEST_CASE("shortest path matches dense enumeration, with and without contiguity") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 1 + rep % 12;
    const int tau = rep % 4;
    const BandedMatrix q = testsupport::random_banded_pd(n, 1 + rep % 3, rng);
    std::unique_ptr<ConstraintAutomaton> aut;
    if (tau > 0) aut = std::make_unique<ContiguityAutomaton>(tau);
    const Diagram d = build_diagram(q, BuildConfig{}, aut.get());
    const Instance inst = testsupport::random_instance(n, rng);
    const auto [zb, vb] = testsupport::dense_brute_force(q, inst, tau);
    PathSolver solver(d);
    const Solution s = solver.solve(inst);
    CHECK(s.objective == doctest::Approx(vb).epsilon(1e-10));
    CHECK(s.path_length == doctest::Approx(vb - inst.constant).epsilon(1e-10));
    CHECK(path_assignment(d, solver.solve_path(inst).arcs) == s.z);
    CHECK_FALSE(s.degraded);
  }
}

TEST_CASE("one diagram serves many cost vectors") {
  std::mt19937_64 rng(19);
  const BandedMatrix q = testsupport::random_banded_pd(10, 2, rng);
  const Diagram d = build_diagram(q, BuildConfig{});
  PathSolver solver(d);
  for (int rep = 0; rep < 100; ++rep) {
    const Instance inst = testsupport::random_instance(10, rng, -0.2, 0.6);
    const auto [zb, vb] = testsupport::dense_brute_force(q, inst, 0);
    const Solution s = solver.solve(inst);
    CHECK(s.objective == doctest::Approx(vb).epsilon(1e-10));
    CHECK(s.verification_error <= kRecoveryTolerance);
  }
}

TEST_CASE("recovery agrees with a direct banded solve") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 2 + rep % 15;
    const BandedMatrix q = testsupport::random_banded_pd(n, 1 + rep % 3, rng);
    const Diagram d = build_diagram(q, BuildConfig{});
    const Instance inst = testsupport::random_instance(n, rng, -0.3, 0.3);
    const Solution s = PathSolver(d).solve(inst);
    const auto supp = support_of(s.z);
    std::vector<double> rhs(s.z.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -inst.d[i];
    const auto x = banded_solve(q, supp, rhs);
    double x0 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(s.x[i] == doctest::Approx(x[i]).epsilon(1e-9).scale(1.0));
      x0 -= inst.d[i] * x[i];
    }
    CHECK(s.x0 == doctest::Approx(x0).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("instance validation") {
  Instance inst{{1.0}, {1.0, 2.0}, 0.0, std::nullopt};
  CHECK_THROWS_AS(inst.validate(2), InputError);
  const Diagram d = build_diagram(BandedMatrix::from_bands(2, 0, {{1.0, 1.0}}), BuildConfig{});
  PathSolver solver(d);
  CHECK_THROWS_AS(solver.solve(inst), InputError);
}
