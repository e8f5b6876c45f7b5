#include "bench_kit.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

#include "ddmiqo/diagram.hpp"
#include "ddmiqo/oracle.hpp"
#include "ddmiqo/report.hpp"
#include "ddmiqo/stream.hpp"

#ifdef DDMIQO_HAVE_OPENMP
#include <omp.h>
#endif

namespace ddmiqo::tools {

namespace {

using Clock = std::chrono::steady_clock;

/// Best-of-`repeats` wall time in milliseconds.
double best_ms(int repeats, const std::function<void()>& fn) {
  double best = 0.0;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    const Clock::time_point t0 = Clock::now();
    fn();
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (r == 0 || ms < best) best = ms;
  }
  return best;
}

bool same_diagram(const Diagram& a, const Diagram& b) {
  if (a.layer_begin != b.layer_begin || a.u_value != b.u_value || a.u_index != b.u_index) return false;
  if (a.arcs.size() != b.arcs.size()) return false;
  for (std::size_t i = 0; i < a.arcs.size(); ++i) {
    if (a.arcs[i].tail != b.arcs[i].tail || a.arcs[i].head != b.arcs[i].head || a.arcs[i].nu != b.arcs[i].nu) return false;
  }
  return true;
}

nlohmann::json comparison(double serial_ms, double parallel_ms, bool identical) {
  return {{"serial_ms", serial_ms},
          {"parallel_ms", parallel_ms},
          {"speedup", parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0},
          {"identical", identical}};
}

}  // namespace

nlohmann::json run_bench(const BenchOptions& o) {
  int threads = o.threads;
#ifdef DDMIQO_HAVE_OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
#else
  threads = 1;
#endif
  nlohmann::json report{{"n", o.n}, {"epsilon", o.epsilon}, {"threads", threads}, {"repeats", o.repeats}};

  const BandedMatrix q = filter_matrix(o.n, o.filter);
  const BandedMatrix qq = identity_plus(q);
  BuildConfig serial_cfg;
  serial_cfg.epsilon = o.epsilon;
  serial_cfg.parallel = false;
  BuildConfig par_cfg = serial_cfg;
  par_cfg.parallel = true;
  par_cfg.threads = threads;
  Diagram ds, dp;
  const double build_serial = best_ms(o.repeats, [&] { ds = build_diagram(qq, serial_cfg); });
  const double build_par = best_ms(o.repeats, [&] { dp = build_diagram(qq, par_cfg); });
  report["build"] = comparison(build_serial, build_par, same_diagram(ds, dp));
  report["build"]["nodes"] = ds.node_count();
  report["build"]["arcs"] = ds.arc_count();

  const Signal series = random_signal(o.n + std::max(1, o.windows) - 1, o.seed);
  const WindowStream stream(series, o.n);
  StreamOptions serial_stream;
  serial_stream.parallel = false;
  serial_stream.keep_x = false;
  StreamOptions par_stream = serial_stream;
  par_stream.parallel = true;
  par_stream.threads = threads;
  StreamResult rs, rp;
  const double stream_serial = best_ms(o.repeats, [&] { rs = solve_stream(ds, stream, o.mu, serial_stream); });
  const double stream_par = best_ms(o.repeats, [&] { rp = solve_stream(ds, stream, o.mu, par_stream); });
  bool same_stream = rs.solutions.size() == rp.solutions.size();
  for (std::size_t t = 0; same_stream && t < rs.solutions.size(); ++t) {
    same_stream = rs.solutions[t].z == rp.solutions[t].z && rs.solutions[t].objective == rp.solutions[t].objective;
  }
  report["stream"] = comparison(stream_serial, stream_par, same_stream);
  report["stream"]["windows"] = stream.count();
  report["stream"]["per_solve_ms"] = latency_to_json(summarize_latency(rs.latency_ms));

  const BandedMatrix qo = identity_plus(filter_matrix(o.oracle_n, o.filter));
  const Instance inst = inference_instance(random_signal(o.oracle_n, o.seed + 1).y, o.mu);
  OracleOptions serial_oracle;
  serial_oracle.parallel = false;
  serial_oracle.cap = std::max(20, o.oracle_n);
  OracleOptions par_oracle = serial_oracle;
  par_oracle.parallel = true;
  par_oracle.threads = threads;
  Solution os, op;
  const double oracle_serial = best_ms(o.repeats, [&] { os = brute_force(qo, inst, {}, serial_oracle); });
  const double oracle_par = best_ms(o.repeats, [&] { op = brute_force(qo, inst, {}, par_oracle); });
  report["oracle"] = comparison(oracle_serial, oracle_par, os.z == op.z && os.objective == op.objective);
  report["oracle"]["n"] = o.oracle_n;
  return report;
}

}  // namespace ddmiqo::tools
