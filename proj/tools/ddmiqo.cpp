#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bench_kit.hpp"
#include "ddmiqo/automaton.hpp"
#include "ddmiqo/diagram.hpp"
#include "ddmiqo/errors.hpp"
#include "ddmiqo/fptas.hpp"
#include "ddmiqo/hull.hpp"
#include "ddmiqo/instance_kit.hpp"
#include "ddmiqo/oracle.hpp"
#include "ddmiqo/path_solver.hpp"
#include "ddmiqo/report.hpp"
#include "ddmiqo/serialize.hpp"
#include "ddmiqo/stream.hpp"

using namespace ddmiqo;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct MatrixFlags {
  std::string matrix_path;
  int n = 0;
  std::string filter = "movavg";
  int k = 2;
  double lambda = 1.0;
  bool anchor_first = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--matrix", matrix_path, "Banded matrix JSON (or an instance file from gen)");
    cmd->add_option("--n", n, "Dimension when building Q = I + R from a filter");
    cmd->add_option("--filter", filter, "Regularizer: movavg | diff")->check(CLI::IsMember({"movavg", "diff"}));
    cmd->add_option("--k", k, "Filter order / bandwidth");
    cmd->add_option("--lambda", lambda, "Smoothness weight");
    cmd->add_flag("--movavg-anchor-first", anchor_first, "Include the first period in the moving-average penalty");
  }

  FilterSpec spec() const {
    FilterSpec f;
    f.kind = filter == "diff" ? FilterKind::kKthDiff : FilterKind::kMovingAverage;
    f.k = k;
    f.lambda = lambda;
    f.boundary = anchor_first ? MovingAverageBoundary::kAnchorFirst : MovingAverageBoundary::kSkipFirst;
    return f;
  }

  json describe() const {
    if (!matrix_path.empty()) return {{"matrix", matrix_path}};
    return {{"filter", filter}, {"n", n}, {"k", k}, {"lambda", lambda}, {"anchor_first", anchor_first}};
  }
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

BandedMatrix resolve_matrix(const MatrixFlags& f) {
  if (!f.matrix_path.empty()) {
    const json j = read_json_file(f.matrix_path);
    return matrix_from_json(j.contains("matrix") ? j.at("matrix") : j);
  }
  if (f.n <= 0) throw InputError("give --matrix or a positive --n");
  return identity_plus(filter_matrix(f.n, f.spec()));
}

struct InstanceFlags {
  std::string instance_path;
  std::string csv_path;
  std::optional<std::uint64_t> seed;
  double mu = 0.01;
  bool raw = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--instance", instance_path, "Instance JSON with c and d, or a signal and mu (see gen)");
    cmd->add_option("--csv", csv_path, "Signal CSV of length n");
    cmd->add_option("--seed", seed, "Random standardized signal seed");
    cmd->add_option("--mu", mu, "Sparsity cost per nonzero");
    cmd->add_flag("--raw", raw, "Do not standardize the CSV signal");
  }

  Instance resolve(int n, bool mu_given) const {
    Instance inst;
    if (!instance_path.empty()) {
      const json j = read_json_file(instance_path);
      if (j.contains("d")) {
        try {
          inst.d = j.at("d").get<std::vector<double>>();
          inst.c = j.contains("c") ? j.at("c").get<std::vector<double>>() : std::vector<double>(inst.d.size(), mu);
          inst.constant = j.value("constant", 0.0);
        } catch (const json::exception& e) {
          throw InputError(instance_path + ": " + e.what());
        }
      } else if (j.contains("signal")) {
        const double m = mu_given || !j.contains("mu") ? mu : j.at("mu").get<double>();
        inst = inference_instance(j.at("signal").get<std::vector<double>>(), m);
      } else {
        throw InputError(instance_path + ": expected \"d\" or \"signal\"");
      }
    } else if (!csv_path.empty()) {
      std::vector<double> y = read_signal_csv(csv_path);
      if (!raw) y = standardize(y).y;
      inst = inference_instance(y, mu);
    } else {
      inst = inference_instance(random_signal(n, seed.value_or(1)).y, mu);
    }
    inst.validate(n);
    return inst;
  }

  json describe() const {
    json j{{"mu", mu}};
    if (!instance_path.empty()) j["instance"] = instance_path;
    else if (!csv_path.empty()) j["csv"] = csv_path;
    else j["seed"] = seed.value_or(1);
    return j;
  }
};

struct Output {
  std::string path;
  std::string format = "json";

  void add(CLI::App* cmd, bool csv = true) {
    cmd->add_option("--out", path, "Write the report here instead of stdout");
    if (csv) cmd->add_option("--format", format, "Report format: json | csv")->check(CLI::IsMember({"json", "csv"}));
  }

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      if (!text.empty() && text.back() != '\n') std::cout << '\n';
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
  }

  void emit(const json& report) const { write(report.dump(2)); }
};

std::unique_ptr<ConstraintAutomaton> automaton_for(int tau) {
  if (tau <= 0) return nullptr;
  return std::make_unique<ContiguityAutomaton>(tau);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string solution_csv(const Solution& s) {
  std::ostringstream out;
  out << "i,z,x\n";
  for (std::size_t i = 0; i < s.z.size(); ++i) {
    out << i << ',' << static_cast<int>(s.z[i]) << ',' << fmt(i < s.x.size() ? s.x[i] : 0.0) << '\n';
  }
  return out.str();
}

std::size_t nnz(const Solution& s) {
  std::size_t c = 0;
  for (auto b : s.z) c += b;
  return c;
}

struct BuildFlags {
  double epsilon = 1e-5;
  std::optional<int> m;
  int tau = 0;
  int threads = 0;
  double arc_budget = 5e7;

  void add(CLI::App* cmd) {
    cmd->add_option("--epsilon", epsilon, "State merging tolerance (0 = exact)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--m", m, "Build an m-truncated diagram instead")->check(CLI::PositiveNumber);
    cmd->add_option("--tau", tau, "Contiguity: runs of ones of length >= tau (0 = none)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--threads", threads, "Worker threads (0 = OpenMP default)");
    cmd->add_option("--arc-budget", arc_budget, "Maximum number of arcs");
  }

  BuildConfig config() const {
    BuildConfig c;
    c.epsilon = epsilon;
    c.truncation = m.value_or(0);
    c.threads = threads;
    c.arc_budget = static_cast<std::int64_t>(arc_budget);
    return c;
  }
};

Diagram build_or_load(const std::string& diagram_path, const MatrixFlags& mf, const BuildFlags& bf,
                      double* build_ms) {
  const Clock::time_point t0 = Clock::now();
  Diagram d;
  if (!diagram_path.empty()) {
    d = load_diagram(diagram_path);
  } else {
    const BandedMatrix q = resolve_matrix(mf);
    const auto aut = automaton_for(bf.tau);
    d = build_diagram(q, bf.config(), aut.get());
  }
  if (build_ms) *build_ms = ms_since(t0);
  return d;
}

int run(int argc, char** argv) {
  CLI::App app{"Decision-diagram solver for banded MIQO with indicators"};
  app.require_subcommand(1);

  // gen
  CLI::App* gen = app.add_subcommand("gen", "Generate a random inference instance (matrix + standardized signal)");
  MatrixFlags gen_m;
  gen_m.add(gen);
  std::uint64_t gen_seed = 1;
  double gen_mu = 0.01;
  int gen_length = 0;
  std::string gen_csv;
  Output gen_out;
  gen->add_option("--seed", gen_seed, "Signal seed");
  gen->add_option("--mu", gen_mu, "Sparsity cost stored in the instance");
  gen->add_option("--length", gen_length, "Signal length (default n)");
  gen->add_option("--csv", gen_csv, "Also write the signal as one-column CSV");
  gen_out.add(gen, false);

  // build
  CLI::App* build = app.add_subcommand("build", "Build and serialize a decision diagram");
  MatrixFlags build_m;
  BuildFlags build_b;
  build_m.add(build);
  build_b.add(build);
  std::string build_diagram_path;
  std::string build_diagram_format = "binary";
  Output build_out;
  build->add_option("--diagram", build_diagram_path, "Output diagram file");
  build->add_option("--diagram-format", build_diagram_format, "binary | json")->check(CLI::IsMember({"binary", "json"}));
  build_out.add(build);

  // solve
  CLI::App* solve = app.add_subcommand("solve", "Solve one instance on a diagram");
  MatrixFlags solve_m;
  BuildFlags solve_b;
  InstanceFlags solve_i;
  std::string solve_diagram;
  std::optional<double> solve_fptas_eps;
  Output solve_out;
  solve_m.add(solve);
  solve_b.add(solve);
  solve_i.add(solve);
  solve->add_option("--diagram", solve_diagram, "Prebuilt diagram (otherwise built from the matrix flags)");
  solve->add_option("--fptas", solve_fptas_eps, "Solve with the additive-error approximation scheme")->check(CLI::PositiveNumber);
  solve_out.add(solve);

  // stream
  CLI::App* stream = app.add_subcommand("stream", "Solve every sliding window of a series on one diagram");
  std::string stream_diagram;
  std::string stream_csv;
  int stream_width = 0;
  double stream_mu = 0.01;
  int stream_threads = 0;
  bool stream_serial = false;
  bool stream_per_window = false;
  bool stream_quiet = false;
  bool stream_raw = false;
  std::optional<std::uint64_t> stream_seed;
  int stream_length = 1000;
  Output stream_out;
  stream->add_option("--diagram", stream_diagram, "Prebuilt diagram")->required();
  stream->add_option("--csv", stream_csv, "Series CSV");
  stream->add_option("--seed", stream_seed, "Synthetic standardized series seed (when no --csv)");
  stream->add_option("--length", stream_length, "Synthetic series length");
  stream->add_option("--width", stream_width, "Window width (default: diagram n)");
  stream->add_option("--mu", stream_mu, "Sparsity cost per nonzero");
  stream->add_option("--threads", stream_threads, "Worker threads (0 = OpenMP default)");
  stream->add_flag("--serial", stream_serial, "Solve windows sequentially");
  stream->add_flag("--per-window-standardize", stream_per_window, "Standardize each window on its own");
  stream->add_flag("--raw", stream_raw, "Do not standardize the series");
  stream->add_flag("--quiet", stream_quiet, "Omit per-window solutions");
  stream_out.add(stream);

  // oracle
  CLI::App* oracle = app.add_subcommand("oracle", "Brute-force reference solve");
  MatrixFlags oracle_m;
  InstanceFlags oracle_i;
  int oracle_tau = 0;
  int oracle_cap = 20;
  int oracle_threads = 0;
  Output oracle_out;
  oracle_m.add(oracle);
  oracle_i.add(oracle);
  oracle->add_option("--tau", oracle_tau, "Contiguity filter (0 = none)");
  oracle->add_option("--cap", oracle_cap, "Largest n to enumerate");
  oracle->add_option("--threads", oracle_threads, "Worker threads (0 = OpenMP default)");
  oracle_out.add(oracle);

  // export-hull
  CLI::App* hull = app.add_subcommand("export-hull", "Write the extended convex-hull formulation of a diagram");
  std::string hull_diagram;
  std::string hull_format = "json";
  std::string hull_path;
  hull->add_option("--diagram", hull_diagram, "Prebuilt diagram")->required();
  hull->add_option("--format", hull_format, "json | cone-text");
  hull->add_option("--out", hull_path, "Output file (default stdout)");

  // gap-report
  CLI::App* gap = app.add_subcommand("gap-report", "Relative objective and solution gaps against the oracle");
  MatrixFlags gap_m;
  BuildFlags gap_b;
  std::string gap_diagram;
  int gap_count = 100;
  std::uint64_t gap_seed = 1;
  double gap_mu = 0.01;
  int gap_cap = 20;
  Output gap_out;
  gap_m.add(gap);
  gap_b.add(gap);
  gap->add_option("--diagram", gap_diagram, "Prebuilt diagram");
  gap->add_option("--count", gap_count, "Number of random signals");
  gap->add_option("--seed", gap_seed, "First signal seed");
  gap->add_option("--mu", gap_mu, "Sparsity cost per nonzero");
  gap->add_option("--cap", gap_cap, "Oracle cap on n");
  gap_out.add(gap);

  // bench
  CLI::App* bench = app.add_subcommand("bench", "Serial vs parallel timings for build, stream and oracle");
  MatrixFlags bench_m;
  tools::BenchOptions bench_o;
  Output bench_out;
  bench_m.n = bench_o.n;
  bench_m.k = bench_o.filter.k;
  bench_m.lambda = bench_o.filter.lambda;
  bench_m.add(bench);
  bench->add_option("--epsilon", bench_o.epsilon, "State merging tolerance");
  bench->add_option("--windows", bench_o.windows, "Streamed windows");
  bench->add_option("--mu", bench_o.mu, "Sparsity cost per nonzero");
  bench->add_option("--oracle-n", bench_o.oracle_n, "Oracle dimension");
  bench->add_option("--threads", bench_o.threads, "Worker threads (0 = OpenMP default)");
  bench->add_option("--repeats", bench_o.repeats, "Best-of repetitions");
  bench->add_option("--seed", bench_o.seed, "Signal seed");
  bench_out.add(bench, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (gen->parsed()) {
    const BandedMatrix q = resolve_matrix(gen_m);
    const int length = gen_length > 0 ? gen_length : q.size();
    const Signal s = random_signal(length, gen_seed);
    json doc = gen_m.describe();
    doc["n"] = q.size();
    doc["seed"] = gen_seed;
    doc["mu"] = gen_mu;
    doc["matrix"] = matrix_to_json(q);
    doc["signal"] = s.y;
    if (!gen_csv.empty()) {
      std::ofstream out(gen_csv);
      if (!out) throw InputError("cannot write " + gen_csv);
      out << "y\n";
      for (double v : s.y) out << fmt(v) << '\n';
    }
    gen_out.emit(doc);
    return 0;
  }

  if (build->parsed()) {
    double build_ms = 0.0;
    const Diagram d = build_or_load("", build_m, build_b, &build_ms);
    if (!build_diagram_path.empty()) {
      save_diagram(d, build_diagram_path, build_diagram_format == "json" ? DiagramFormat::kJson : DiagramFormat::kBinary);
    }
    if (build_out.format == "csv") {
      std::ostringstream out;
      out << "layer,nodes,arcs_out,merges,max_merge_distance\n";
      for (std::size_t l = 0; l < d.stats.size(); ++l) {
        const LayerStats& st = d.stats[l];
        out << l << ',' << st.nodes << ',' << st.arcs_out << ',' << st.merges << ',' << fmt(st.max_merge_distance) << '\n';
      }
      build_out.write(out.str());
      return 0;
    }
    json report{{"inputs", build_m.describe()}, {"diagram", diagram_stats_json(d)}, {"time_dd_ms", build_ms}};
    report["inputs"]["epsilon"] = build_b.epsilon;
    report["inputs"]["tau"] = build_b.tau;
    if (build_b.m) report["inputs"]["m"] = *build_b.m;
    if (!build_diagram_path.empty()) report["diagram_file"] = build_diagram_path;
    build_out.emit(report);
    return 0;
  }

  if (solve->parsed()) {
    const bool mu_given = solve->count("--mu") > 0;
    Solution s;
    json extra;
    if (solve_fptas_eps) {
      if (!solve_diagram.empty()) throw InputError("--fptas builds its own diagram; pass matrix flags instead of --diagram");
      if (solve_b.tau > 0) throw InputError("--fptas applies to unconstrained problems only");
      const BandedMatrix q = resolve_matrix(solve_m);
      const Instance inst = solve_i.resolve(q.size(), mu_given);
      const FptasResult r = solve_fptas(q, inst, *solve_fptas_eps, solve_b.config());
      s = r.solution;
      extra = {{"m", r.m}, {"exact", r.exact}, {"arcs", r.arcs}, {"gamma", r.constants.gamma}, {"C", r.constants.C}};
    } else {
      double build_ms = 0.0;
      const Diagram d = build_or_load(solve_diagram, solve_m, solve_b, &build_ms);
      const Instance inst = solve_i.resolve(d.n, mu_given);
      PathSolver solver(d);
      s = solver.solve(inst);
      s.timings_ms[solve_diagram.empty() ? "build" : "load"] = build_ms;
    }
    if (solve_out.format == "csv") {
      solve_out.write(solution_csv(s));
      return 0;
    }
    json report = solution_to_json(s);
    report["inputs"] = solve_i.describe();
    if (!extra.is_null()) report["fptas"] = extra;
    solve_out.emit(report);
    return 0;
  }

  if (stream->parsed()) {
    const Clock::time_point t0 = Clock::now();
    const Diagram d = load_diagram(stream_diagram);
    const double load_ms = ms_since(t0);
    const int width = stream_width > 0 ? stream_width : d.n;
    Signal series;
    if (!stream_csv.empty()) {
      series.y = read_signal_csv(stream_csv);
      if (!stream_raw && !stream_per_window) series = standardize(series.y);
    } else {
      series = random_signal(stream_length, stream_seed.value_or(1));
    }
    const WindowStream ws(series, width, stream_per_window ? WindowScaling::kPerWindow : WindowScaling::kGlobal);
    StreamOptions opts;
    opts.parallel = !stream_serial;
    opts.threads = stream_threads;
    opts.keep_x = !stream_quiet;
    const StreamResult r = solve_stream(d, ws, stream_mu, opts);
    if (stream_out.format == "csv") {
      std::ostringstream out;
      out << "window,objective,nnz,x0,solve_ms,degraded\n";
      for (std::size_t t = 0; t < r.solutions.size(); ++t) {
        const Solution& s = r.solutions[t];
        out << t << ',' << fmt(s.objective) << ',' << nnz(s) << ',' << fmt(s.x0) << ',' << fmt(r.latency_ms[t]) << ','
            << (s.degraded ? 1 : 0) << '\n';
      }
      stream_out.write(out.str());
      return 0;
    }
    std::size_t degraded = 0;
    for (const Solution& s : r.solutions) degraded += s.degraded ? 1 : 0;
    json report{{"inputs", {{"diagram", stream_diagram}, {"width", width}, {"mu", stream_mu},
                            {"windows", ws.count()}, {"per_window_standardize", stream_per_window}}},
                {"timings_ms", {{"load", load_ms}, {"wall", r.wall_ms}}},
                {"per_solve_ms", latency_to_json(summarize_latency(r.latency_ms))},
                {"degraded", degraded}};
    if (!stream_quiet) {
      json sols = json::array();
      for (std::size_t t = 0; t < r.solutions.size(); ++t) {
        json j = solution_to_json(r.solutions[t]);
        j["window"] = t;
        sols.push_back(std::move(j));
      }
      report["solutions"] = std::move(sols);
    }
    stream_out.emit(report);
    return 0;
  }

  if (oracle->parsed()) {
    const BandedMatrix q = resolve_matrix(oracle_m);
    const Instance inst = oracle_i.resolve(q.size(), oracle->count("--mu") > 0);
    OracleOptions opts;
    opts.cap = oracle_cap;
    opts.threads = oracle_threads;
    const Clock::time_point t0 = Clock::now();
    Solution s = brute_force(q, inst, oracle_tau > 0 ? ConstraintFilter::contiguity(oracle_tau) : ConstraintFilter::none(), opts);
    s.timings_ms["total"] = ms_since(t0);
    if (oracle_out.format == "csv") {
      oracle_out.write(solution_csv(s));
      return 0;
    }
    json report = solution_to_json(s);
    report["inputs"] = oracle_i.describe();
    oracle_out.emit(report);
    return 0;
  }

  if (hull->parsed()) {
    const HullFormat format = parse_hull_format(hull_format);
    const Diagram d = load_diagram(hull_diagram);
    if (hull_path.empty()) {
      export_hull(d, format, std::cout);
    } else {
      std::ofstream out(hull_path, std::ios::binary);
      if (!out) throw InputError("cannot write " + hull_path);
      export_hull(d, format, out);
    }
    return 0;
  }

  if (gap->parsed()) {
    double build_ms = 0.0;
    const Diagram d = build_or_load(gap_diagram, gap_m, gap_b, &build_ms);
    if (d.automaton_kind != "none") throw InputError("gap-report compares against the unconstrained oracle; build without --tau");
    if (d.n > gap_cap) throw InputError("n = " + std::to_string(d.n) + " exceeds the oracle cap " + std::to_string(gap_cap));
    OracleOptions opts;
    opts.cap = gap_cap;
    PathSolver solver(d);
    json rows = json::array();
    std::ostringstream csv;
    csv << "seed,objective_gap,solution_gap,same_z\n";
    std::size_t zero = 0;
    double max_sol = 0.0;
    double max_obj = 0.0;
    for (int i = 0; i < gap_count; ++i) {
      const std::uint64_t seed = gap_seed + static_cast<std::uint64_t>(i);
      const Instance inst = inference_instance(random_signal(d.n, seed).y, gap_mu);
      const Solution cand = solver.solve(inst);
      const Solution ref = brute_force(d.q, inst, ConstraintFilter::none(), opts);
      const GapMetrics g = gap_metrics(d.q, inst, cand, ref);
      zero += g.solution_gap == 0.0 ? 1 : 0;
      max_sol = std::max(max_sol, std::abs(g.solution_gap));
      max_obj = std::max(max_obj, std::abs(g.objective_gap));
      rows.push_back({{"seed", seed}, {"objective_gap", g.objective_gap}, {"solution_gap", g.solution_gap}, {"same_z", g.same_z}});
      csv << seed << ',' << fmt(g.objective_gap) << ',' << fmt(g.solution_gap) << ',' << (g.same_z ? 1 : 0) << '\n';
    }
    if (gap_out.format == "csv") {
      gap_out.write(csv.str());
      return 0;
    }
    json report{{"diagram", diagram_stats_json(d)},
                {"count", gap_count},
                {"mu", gap_mu},
                {"zero_solution_gap_fraction", gap_count > 0 ? static_cast<double>(zero) / gap_count : 0.0},
                {"max_abs_solution_gap", max_sol},
                {"max_abs_objective_gap", max_obj},
                {"instances", std::move(rows)}};
    gap_out.emit(report);
    return 0;
  }

  if (bench->parsed()) {
    bench_o.n = bench_m.n;
    bench_o.filter = bench_m.spec();
    bench_out.emit(tools::run_bench(bench_o));
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
