#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "ddmiqo/banded.hpp"
#include "ddmiqo/diagram.hpp"
#include "ddmiqo/path_solver.hpp"

namespace ddmiqo {

/// {"z", "x", "objective", "x0", "mode", "timings_ms"} plus "fptas_bound",
/// "epsilon", "truncation" and verification fields when present.
nlohmann::json solution_to_json(const Solution& s, bool include_x = true);

struct LatencySummary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

LatencySummary summarize_latency(std::vector<double> samples_ms);
nlohmann::json latency_to_json(const LatencySummary& s);

/// Mode, node/arc counts per layer and merge statistics.
nlohmann::json diagram_stats_json(const Diagram& d);

/// Relative gaps of a candidate against a reference solution:
///   objective gap (obj - obj_ref) / obj_ref on the reported objectives;
///   solution gap (h(z) - h(z_ref)) / h(z_ref), both re-evaluated without the constant.
/// A zero denominator falls back to the absolute difference.
struct GapMetrics {
  double objective_gap = 0.0;
  double solution_gap = 0.0;
  bool same_z = false;
};

GapMetrics gap_metrics(const BandedMatrix& q, const Instance& inst, const Solution& candidate,
                       const Solution& reference);

}  // namespace ddmiqo
