#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ddmiqo/diagram.hpp"
#include "ddmiqo/path_solver.hpp"

namespace ddmiqo {

enum class HullFormat { kJson, kConeText };

HullFormat parse_hull_format(const std::string& name);

struct LinearRow {
  std::string family;  // "flow", "source", "sink", "coupling_x", "coupling_z", "epigraph"
  std::int64_t index = 0;  // node id, variable index or 0
  std::vector<std::pair<std::int64_t, double>> terms;
  char sense = '=';  // '=' or '<' (terms <= rhs)
  double rhs = 0.0;
};

struct ConeBlock {
  std::int64_t arc = 0;
  std::int64_t w = 0;
  std::int64_t r = 0;
  std::int64_t s = 0;  // w^2 <= s * r, with r, s >= 0
};

/// Extended formulation of the closed convex hull of
/// { (x, z, x0) : x0 >= x^T Q x, x_i = 0 if z_i = 0, z encoded by the diagram }.
/// Variables, in order: r (per arc), w (per arc), s (per arc), x (n), z (n), x0.
/// The epigraph x0 >= sum_a w_a^2 / r_a (0/0 = 0) is disaggregated into
/// per-arc rotated cones w_a^2 <= s_a r_a and the row sum_a s_a <= x0.
struct HullFormulation {
  int n = 0;
  std::int64_t arcs = 0;
  std::vector<LinearRow> rows;
  std::vector<ConeBlock> cones;
  std::vector<std::string> flags;

  std::int64_t r(std::int64_t a) const noexcept { return a; }
  std::int64_t w(std::int64_t a) const noexcept { return arcs + a; }
  std::int64_t s(std::int64_t a) const noexcept { return 2 * arcs + a; }
  std::int64_t x(int i) const noexcept { return 3 * arcs + i; }
  std::int64_t z(int i) const noexcept { return 3 * arcs + n + i; }
  std::int64_t x0() const noexcept { return 3 * arcs + 2 * n; }
  std::int64_t variable_count() const noexcept { return 3 * arcs + 2 * n + 1; }
  std::string variable_name(std::int64_t v) const;
};

HullFormulation build_hull(const Diagram& d);

void export_hull(const Diagram& d, HullFormat format, std::ostream& out);
std::string export_hull(const Diagram& d, HullFormat format);

/// Largest violation per family ("flow", "coupling_x", "coupling_z", "epigraph",
/// "cone", "nonnegative") at a point over all variables.
std::map<std::string, double> hull_residuals(const HullFormulation& h, std::span<const double> point);

struct HullWitness {
  std::vector<double> point;   // all variables, HullFormulation order
  std::map<std::string, double> residuals;
  double path_length = 0.0;    // sum of arc lengths along the path
  double reduced_objective = 0.0;  // c^T z - x0 / 2
  double objective = 0.0;          // c^T z + d^T x + x0 / 2
  double max_residual() const;
};

/// r = path indicator, w_a = -d^T u_a on the path, s_a = w_a^2 / r_a, (x, z, x0) recovered.
HullWitness certify_path_feasible(const Diagram& d, std::span<const std::int64_t> path, const Instance& inst);

/// Residuals of an arbitrary point (e.g. a convex combination of witnesses).
HullWitness evaluate_witness(const HullFormulation& h, std::vector<double> point, const Instance& inst);

}  // namespace ddmiqo
