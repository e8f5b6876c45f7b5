#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ddmiqo/automaton.hpp"
#include "ddmiqo/banded.hpp"

namespace ddmiqo {

enum class DiagramMode : std::uint8_t { kExact = 0, kEpsExact = 1, kTruncated = 2 };

std::string to_string(DiagramMode mode);

struct BuildConfig {
  double epsilon = 0.0;          // merge tolerance; 0 selects exact mode
  int truncation = 0;            // m >= 1 selects m-truncated mode (epsilon ignored)
  std::int64_t arc_budget = 50'000'000;
  std::int64_t state_bytes_budget = std::int64_t{4} << 30;  // live child states of one layer
  int threads = 0;               // 0: OpenMP default
  bool parallel = true;          // false runs the serial reference path
  bool keep_states = false;      // retain every node's DiagramState in Diagram::states
};

struct Arc {
  std::int32_t tail = 0;
  std::int32_t head = 0;
  std::int32_t layer = 0;  // variable decided by this arc
  std::uint8_t nu = 0;
};

struct LayerStats {
  int nodes = 0;
  std::int64_t arcs_out = 0;   // arcs leaving this layer
  std::int64_t merges = 0;     // children folded into an existing node
  double max_merge_distance = 0.0;
};

/// Layered DAG. Nodes are numbered consecutively layer by layer; layer 0 holds
/// the single root and layer n the terminals (one per final constraint state).
/// Arcs are ordered by tail, and by nu within a tail.
struct Diagram {
  int n = 0;
  DiagramMode mode = DiagramMode::kExact;
  double epsilon = 0.0;
  int truncation = 0;
  std::string automaton_kind = "none";
  int automaton_parameter = 0;
  BandedMatrix q;

  std::vector<std::int32_t> layer_begin;       // n+2 entries
  std::vector<std::int32_t> node_constraint;   // per node
  std::vector<std::int64_t> out_begin;         // per node + 1, into arcs
  std::vector<Arc> arcs;
  std::vector<std::int64_t> u_begin;           // per arc + 1, into u_index/u_value
  std::vector<std::int32_t> u_index;
  std::vector<double> u_value;
  std::vector<LayerStats> stats;               // n+1 entries
  std::vector<DiagramState> states;            // empty unless keep_states

  std::int32_t node_count() const noexcept { return layer_begin.empty() ? 0 : layer_begin.back(); }
  std::int64_t arc_count() const noexcept { return static_cast<std::int64_t>(arcs.size()); }
  int layer_size(int layer) const {
    return layer_begin[static_cast<std::size_t>(layer) + 1] - layer_begin[static_cast<std::size_t>(layer)];
  }
  int node_layer(std::int32_t node) const;

  std::span<const std::int32_t> u_support(std::int64_t arc) const {
    const auto b = static_cast<std::size_t>(u_begin[static_cast<std::size_t>(arc)]);
    const auto e = static_cast<std::size_t>(u_begin[static_cast<std::size_t>(arc) + 1]);
    return {u_index.data() + b, e - b};
  }
  std::span<const double> u_values(std::int64_t arc) const {
    const auto b = static_cast<std::size_t>(u_begin[static_cast<std::size_t>(arc)]);
    const auto e = static_cast<std::size_t>(u_begin[static_cast<std::size_t>(arc) + 1]);
    return {u_value.data() + b, e - b};
  }
  /// u_a^T d over the sparse support.
  double u_dot(std::int64_t arc, std::span<const double> d) const noexcept;
  TransitionVector arc_u(std::int64_t arc) const;

  bool exact_hull() const noexcept { return mode == DiagramMode::kExact; }
};

/// Max over relevant columns of the infinity norm of the column difference;
/// +inf when the constraint states differ. Throws InputError on layer or
/// column-set mismatch.
double state_distance(const DiagramState& a, const DiagramState& b);

/// `automaton` may be null (Z = {0,1}^n); it must be null in truncated mode.
Diagram build_diagram(const BandedMatrix& q, const BuildConfig& config,
                      const ConstraintAutomaton* automaton = nullptr);

inline constexpr std::int64_t kDefaultPathCap = std::int64_t{1} << 20;

/// Number of root-to-terminal paths (as a double; may exceed 2^63).
double count_paths(const Diagram& d);

/// Every root-to-terminal assignment, as bit strings z[0..n-1]. Throws
/// BudgetError when the path count exceeds `cap`.
std::set<std::vector<std::uint8_t>> enumerate_paths(const Diagram& d,
                                                    std::int64_t cap = kDefaultPathCap);

/// Arc ids along the path that encodes z, or empty when z is not encoded.
std::vector<std::int64_t> find_path(const Diagram& d, std::span<const std::uint8_t> z);

/// z encoded by a root-to-terminal arc sequence.
std::vector<std::uint8_t> path_assignment(const Diagram& d, std::span<const std::int64_t> path);

}  // namespace ddmiqo
