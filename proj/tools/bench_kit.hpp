#pragma once

#include <cstdint>

#include <json.hpp>

#include "ddmiqo/instance_kit.hpp"

namespace ddmiqo::tools {

struct BenchOptions {
  int n = 200;
  FilterSpec filter{FilterKind::kMovingAverage, 2, 0.25, MovingAverageBoundary::kSkipFirst};
  double epsilon = 1e-5;
  int windows = 500;
  double mu = 0.01;
  int oracle_n = 16;
  int threads = 0;
  int repeats = 3;
  std::uint64_t seed = 1;
};

/// Times the serial reference against the OpenMP kernels for diagram
/// construction, window streaming and brute-force enumeration, and checks that
/// both produce the same results.
nlohmann::json run_bench(const BenchOptions& options);

}  // namespace ddmiqo::tools
