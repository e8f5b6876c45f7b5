#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ddmiqo/banded.hpp"
#include "ddmiqo/path_solver.hpp"

namespace ddmiqo {

/// R = lambda D^T D with D the (n-k) x n k-th order difference operator.
BandedMatrix kth_diff_matrix(int n, int k, double lambda);

/// How the first period enters the moving-average penalty, whose average over
/// zero predecessors is undefined.
enum class MovingAverageBoundary {
  kSkipFirst,    // sum over i = 2..n
  kAnchorFirst,  // sum over i = 1..n with an empty average taken as 0 (adds x_1^2)
};

/// R = lambda M^T M, row i of M encoding x_i - mean(x_{i-min(k,i-1)}, ..., x_{i-1}).
BandedMatrix moving_average_matrix(int n, int k, double lambda,
                                   MovingAverageBoundary boundary = MovingAverageBoundary::kSkipFirst);

/// Largest eigenvalue of a PSD banded matrix by power iteration (relative tolerance 1e-6).
double max_eigenvalue(const BandedMatrix& r);

/// Q = I + R.
BandedMatrix identity_plus(const BandedMatrix& r);

struct Signal {
  std::vector<double> y;
  bool standardized = false;
};

/// Centers y and scales it to unit 2-norm. Throws InputError for constant input.
Signal standardize(std::span<const double> y);

enum class FilterKind { kKthDiff, kMovingAverage };

struct FilterSpec {
  FilterKind kind = FilterKind::kMovingAverage;
  int k = 2;
  double lambda = 1.0;
  MovingAverageBoundary boundary = MovingAverageBoundary::kSkipFirst;
};

BandedMatrix filter_matrix(int n, const FilterSpec& filter);

/// c = mu 1, d = -y, constant = ||y||^2 / 2.
Instance inference_instance(std::span<const double> y, double mu);

struct InferenceProblem {
  BandedMatrix q;
  Instance instance;
};

/// Q = I + R(filter) with the inference instance of the signal.
InferenceProblem build_instance(const Signal& signal, const FilterSpec& filter, double mu);

enum class WindowScaling {
  kGlobal,     // standardize the whole series once, windows are raw slices of it
  kPerWindow,  // standardize every window on its own
};

/// Sliding windows y^t = y[t .. t+width-1], t = 0 .. |y| - width.
class WindowStream {
 public:
  WindowStream(const Signal& source, int width, WindowScaling scaling = WindowScaling::kGlobal);

  std::size_t count() const noexcept { return count_; }
  int width() const noexcept { return width_; }
  std::span<const double> series() const noexcept { return series_; }

  /// Window t as a signal (standardized per the scaling mode).
  std::vector<double> window(std::size_t t) const;
  Instance instance(std::size_t t, double mu) const;

 private:
  std::vector<double> series_;
  int width_;
  std::size_t count_;
  WindowScaling scaling_;
};

/// One numeric column per line (first comma-separated field); a non-numeric
/// first line is treated as a header. Blank lines are skipped.
std::vector<double> read_signal_csv(std::istream& in);
std::vector<double> read_signal_csv(const std::string& path);

/// Standard normal samples, then standardized.
Signal random_signal(int n, std::uint64_t seed);

}  // namespace ddmiqo
