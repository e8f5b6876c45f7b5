#include <cstdlib>
#include <iostream>

#include "bench_kit.hpp"

// Usage: ddmiqo_bench [n] [windows] [threads]
int main(int argc, char** argv) {
  ddmiqo::tools::BenchOptions o;
  if (argc > 1) o.n = std::atoi(argv[1]);
  if (argc > 2) o.windows = std::atoi(argv[2]);
  if (argc > 3) o.threads = std::atoi(argv[3]);
  try {
    std::cout << ddmiqo::tools::run_bench(o).dump(2) << '\n';
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
