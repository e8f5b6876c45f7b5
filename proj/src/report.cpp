#include "ddmiqo/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ddmiqo {

nlohmann::json solution_to_json(const Solution& s, bool include_x) {
  nlohmann::json j;
  std::vector<int> z(s.z.begin(), s.z.end());
  j["z"] = z;
  if (include_x) j["x"] = s.x;
  j["objective"] = s.objective;
  j["x0"] = s.x0;
  j["mode"] = s.mode;
  j["timings_ms"] = s.timings_ms;
  if (s.mode == "eps_exact" || s.mode == "fptas") j["epsilon"] = s.epsilon;
  if (s.fptas_bound) j["fptas_bound"] = *s.fptas_bound;
  if (s.truncation) j["truncation"] = *s.truncation;
  j["verification_error"] = s.verification_error;
  if (s.degraded) j["warning"] = "recovered x deviates from the banded solve by more than 1e-6";
  return j;
}

LatencySummary summarize_latency(std::vector<double> samples) {
  LatencySummary s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  const std::size_t n = samples.size();
  s.median = n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
  s.p99 = samples[std::min(n - 1, rank == 0 ? 0 : rank - 1)];
  s.max = samples.back();
  return s;
}

nlohmann::json latency_to_json(const LatencySummary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"p99", s.p99}, {"max", s.max}};
}

nlohmann::json diagram_stats_json(const Diagram& d) {
  std::vector<int> nodes;
  std::vector<std::int64_t> arcs;
  std::vector<std::int64_t> merges;
  double max_merge = 0.0;
  for (const auto& st : d.stats) {
    nodes.push_back(st.nodes);
    arcs.push_back(st.arcs_out);
    merges.push_back(st.merges);
    max_merge = std::max(max_merge, st.max_merge_distance);
  }
  nlohmann::json j = {{"n", d.n},
                      {"k", d.q.bandwidth()},
                      {"mode", to_string(d.mode)},
                      {"node_count", d.node_count()},
                      {"arc_count", d.arc_count()},
                      {"nodes_per_layer", nodes},
                      {"arcs_per_layer", arcs},
                      {"merges_per_layer", merges},
                      {"max_merge_distance", max_merge},
                      {"automaton", {{"kind", d.automaton_kind}, {"parameter", d.automaton_parameter}}}};
  if (d.mode == DiagramMode::kEpsExact) j["epsilon"] = d.epsilon;
  if (d.mode == DiagramMode::kTruncated) j["truncation"] = d.truncation;
  return j;
}

namespace {

double relative(double value, double ref) {
  const double diff = value - ref;
  return ref == 0.0 ? diff : diff / ref;
}

}  // namespace

GapMetrics gap_metrics(const BandedMatrix& q, const Instance& inst, const Solution& candidate,
                       const Solution& reference) {
  GapMetrics g;
  g.same_z = candidate.z == reference.z;
  g.objective_gap = relative(candidate.objective, reference.objective);
  if (g.same_z) return g;  // identical supports: solution gap is exactly zero
  const double h = evaluate_objective(q, inst, candidate.z) - inst.constant;
  const double h_ref = evaluate_objective(q, inst, reference.z) - inst.constant;
  g.solution_gap = relative(h, h_ref);
  return g;
}

}  // namespace ddmiqo
