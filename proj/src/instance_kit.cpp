#include "ddmiqo/instance_kit.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>

#include "ddmiqo/errors.hpp"
#include "ddmiqo/spectrum.hpp"

namespace ddmiqo {

namespace {

// Accumulates lambda * sum_rows (row . x)^2 into band storage.
class GramBuilder {
 public:
  GramBuilder(int n, int k) : n_(n), k_(k), bands_(static_cast<std::size_t>(k) + 1) {
    for (int b = 0; b <= k; ++b) bands_[static_cast<std::size_t>(b)].assign(static_cast<std::size_t>(n - b), 0.0);
  }

  // Row with coefficients coef[t] at column first + t.
  void add_row(int first, const std::vector<double>& coef, double weight) {
    for (std::size_t a = 0; a < coef.size(); ++a) {
      for (std::size_t b = a; b < coef.size(); ++b) {
        bands_[b - a][static_cast<std::size_t>(first) + a] += weight * coef[a] * coef[b];
      }
    }
  }

  BandedMatrix finish() {
    return BandedMatrix::from_bands(n_, k_, std::move(bands_), BandedMatrix::DiagonalCheck::kNonNegative);
  }

 private:
  int n_;
  int k_;
  std::vector<std::vector<double>> bands_;
};

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be finite and non-negative");
}

}  // namespace

BandedMatrix kth_diff_matrix(int n, int k, double lambda) {
  check_lambda(lambda);
  if (n < 1) throw InputError("dimension must be positive");
  if (k < 0 || k >= n) throw InputError("difference order must satisfy 0 <= k < n");
  std::vector<double> coef(static_cast<std::size_t>(k) + 1);
  // Delta^{(k)}_i x = sum_j (-1)^{k-j} C(k, j) x_{i+j}
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    coef[static_cast<std::size_t>(j)] = ((k - j) % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (k - j) / (j + 1);
  }
  GramBuilder g(n, k);
  for (int i = 0; i + k < n; ++i) g.add_row(i, coef, lambda);
  return g.finish();
}

BandedMatrix moving_average_matrix(int n, int k, double lambda, MovingAverageBoundary boundary) {
  check_lambda(lambda);
  if (k < 1) throw InputError("moving-average width k must be at least 1");
  if (n < 2) throw InputError("moving-average filter needs n >= 2");
  const int kk = std::min(k, n - 1);
  GramBuilder g(n, kk);
  if (boundary == MovingAverageBoundary::kAnchorFirst) g.add_row(0, {1.0}, lambda);
  for (int i = 1; i < n; ++i) {
    const int w = std::min(kk, i);
    std::vector<double> coef(static_cast<std::size_t>(w) + 1, -1.0 / w);
    coef.back() = 1.0;
    g.add_row(i - w, coef, lambda);
  }
  return g.finish();
}

double max_eigenvalue(const BandedMatrix& r) { return power_max_eigenvalue(r, 1e-6).value; }

BandedMatrix identity_plus(const BandedMatrix& r) {
  std::vector<std::vector<double>> bands = r.bands();
  for (double& v : bands[0]) v += 1.0;
  return BandedMatrix::from_bands(r.size(), r.bandwidth(), std::move(bands));
}

Signal standardize(std::span<const double> y) {
  if (y.empty()) throw InputError("cannot standardize an empty signal");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  Signal s;
  s.y.resize(y.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s.y[i] = y[i] - mean;
    sq += s.y[i] * s.y[i];
  }
  const double nrm = std::sqrt(sq);
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (!(nrm > 1e-14 * std::max(scale, 1e-300))) throw InputError("cannot standardize a constant signal");
  for (double& v : s.y) v /= nrm;
  s.standardized = true;
  return s;
}

BandedMatrix filter_matrix(int n, const FilterSpec& filter) {
  if (filter.kind == FilterKind::kKthDiff) return kth_diff_matrix(n, filter.k, filter.lambda);
  return moving_average_matrix(n, filter.k, filter.lambda, filter.boundary);
}

Instance inference_instance(std::span<const double> y, double mu) {
  if (!std::isfinite(mu)) throw InputError("mu must be finite");
  Instance inst;
  inst.c.assign(y.size(), mu);
  inst.d.resize(y.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    inst.d[i] = -y[i];
    sq += y[i] * y[i];
  }
  inst.constant = 0.5 * sq;
  inst.mu = mu;
  return inst;
}

InferenceProblem build_instance(const Signal& signal, const FilterSpec& filter, double mu) {
  const int n = static_cast<int>(signal.y.size());
  return {identity_plus(filter_matrix(n, filter)), inference_instance(signal.y, mu)};
}

WindowStream::WindowStream(const Signal& source, int width, WindowScaling scaling)
    : width_(width), scaling_(scaling) {
  if (width < 1) throw InputError("window width must be positive");
  if (source.y.size() < static_cast<std::size_t>(width)) {
    throw InputError("series has " + std::to_string(source.y.size()) + " points, fewer than the window width " +
                     std::to_string(width));
  }
  series_ = (scaling == WindowScaling::kGlobal && !source.standardized) ? standardize(source.y).y : source.y;
  count_ = series_.size() - static_cast<std::size_t>(width) + 1;
}

std::vector<double> WindowStream::window(std::size_t t) const {
  if (t >= count_) throw InputError("window index out of range");
  std::vector<double> w(series_.begin() + static_cast<std::ptrdiff_t>(t),
                        series_.begin() + static_cast<std::ptrdiff_t>(t) + width_);
  if (scaling_ == WindowScaling::kPerWindow) return standardize(w).y;
  return w;
}

Instance WindowStream::instance(std::size_t t, double mu) const { return inference_instance(window(t), mu); }

std::vector<double> read_signal_csv(std::istream& in) {
  std::vector<double> out;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comma = line.find(',');
    std::string field = line.substr(0, comma);
    field.erase(0, field.find_first_not_of(" \t\r"));
    const auto last = field.find_last_not_of(" \t\r");
    field.erase(last == std::string::npos ? 0 : last + 1);
    if (field.empty()) continue;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(field.c_str(), &end);
    const bool numeric = end != field.c_str() && *end == '\0' && errno == 0 && std::isfinite(v);
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw InputError("line " + std::to_string(lineno) + ": '" + field + "' is not a number");
    }
    first = false;
    out.push_back(v);
  }
  if (out.empty()) throw InputError("signal file holds no numeric values");
  return out;
}

std::vector<double> read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open signal file '" + path + "'");
  return read_signal_csv(in);
}

Signal random_signal(int n, std::uint64_t seed) {
  if (n < 2) throw InputError("random signal needs n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> y(static_cast<std::size_t>(n));
  for (double& v : y) v = normal(rng);
  return standardize(y);
}

}  // namespace ddmiqo
