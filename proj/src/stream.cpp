#include "ddmiqo/stream.hpp"

#include <chrono>
#include <exception>
#include <string>

#include "ddmiqo/errors.hpp"

#ifdef DDMIQO_HAVE_OPENMP
#include <omp.h>
#endif

namespace ddmiqo {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void solve_window(const WindowStream& stream, double mu, const StreamOptions& options, PathSolver& solver,
                  std::size_t t, StreamResult& out) {
  const Clock::time_point t0 = Clock::now();
  Solution s = solver.solve(stream.instance(t, mu), options.verify);
  out.latency_ms[t] = ms_since(t0);
  if (!options.keep_x) s.x.clear();
  out.solutions[t] = std::move(s);
}

}  // namespace

StreamResult solve_stream(const Diagram& d, const WindowStream& stream, double mu, const StreamOptions& options) {
  if (stream.width() != d.n) {
    throw InputError("window width " + std::to_string(stream.width()) + " does not match diagram n = " +
                     std::to_string(d.n));
  }
  StreamResult out;
  const std::size_t count = stream.count();
  out.solutions.resize(count);
  out.latency_ms.assign(count, 0.0);
  const Clock::time_point t0 = Clock::now();
#ifdef DDMIQO_HAVE_OPENMP
  if (options.parallel && count > 1) {
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
    std::exception_ptr failure;
#pragma omp parallel num_threads(threads)
    {
      PathSolver solver(d);
#pragma omp for schedule(dynamic, 4)
      for (std::int64_t t = 0; t < static_cast<std::int64_t>(count); ++t) {
        try {
          solve_window(stream, mu, options, solver, static_cast<std::size_t>(t), out);
        } catch (...) {
#pragma omp critical(ddmiqo_stream_failure)
          if (!failure) failure = std::current_exception();
        }
      }
    }
    if (failure) std::rethrow_exception(failure);
    out.wall_ms = ms_since(t0);
    return out;
  }
#endif
  PathSolver solver(d);
  for (std::size_t t = 0; t < count; ++t) solve_window(stream, mu, options, solver, t, out);
  out.wall_ms = ms_since(t0);
  return out;
}

}  // namespace ddmiqo
