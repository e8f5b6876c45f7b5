#pragma once

#include <vector>

#include "ddmiqo/diagram.hpp"
#include "ddmiqo/instance_kit.hpp"
#include "ddmiqo/path_solver.hpp"

namespace ddmiqo {

struct StreamOptions {
  bool parallel = true;
  int threads = 0;
  bool verify = true;
  bool keep_x = true;
};

struct StreamResult {
  std::vector<Solution> solutions;   // indexed by window
  std::vector<double> latency_ms;    // per-window solve time (lengths, path, recovery)
  double wall_ms = 0.0;
};

/// Solves every window of `stream` on one shared diagram. Each worker owns a
/// PathSolver; results are stored by window index, so the output does not
/// depend on the thread count.
StreamResult solve_stream(const Diagram& d, const WindowStream& stream, double mu,
                          const StreamOptions& options = {});

}  // namespace ddmiqo
