#include "ddmiqo/spectrum.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "ddmiqo/errors.hpp"

namespace ddmiqo {

namespace {

// Fixed seed: eigenvalue estimates must be reproducible run to run.
std::vector<double> start_vector(int n) {
  std::mt19937_64 rng(0x5eed1234abcdULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = normal(rng);
  return v;
}

double norm2(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

double normalize(std::vector<double>& v) {
  const double nrm = norm2(v);
  if (nrm > 0.0) {
    for (double& x : v) x /= nrm;
  }
  return nrm;
}

double residual_of(const BandedMatrix& q, const std::vector<double>& v, double theta) {
  std::vector<double> qv(v.size());
  q.multiply(v, qv);
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) r += (qv[i] - theta * v[i]) * (qv[i] - theta * v[i]);
  return std::sqrt(r) / std::max(std::abs(theta), 1e-300);
}

[[noreturn]] void not_converged(const char* what, int iters, double theta) {
  std::ostringstream msg;
  msg << what << " did not converge in " << iters << " iterations (last estimate " << theta << ")";
  throw NumericalError(msg.str());
}

}  // namespace

EigenEstimate power_max_eigenvalue(const BandedMatrix& q, double rel_tol, int max_iter) {
  const int n = q.size();
  std::vector<double> v = start_vector(n);
  normalize(v);
  std::vector<double> w(v.size());
  double theta = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    q.multiply(v, w);
    const double next = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
    if (normalize(w) == 0.0) return {0.0, it, 0.0};  // q v = 0: the zero matrix
    v.swap(w);
    if (it > 1 && std::abs(next - theta) <= rel_tol * std::abs(next)) {
      return {next, it, residual_of(q, v, next)};
    }
    theta = next;
  }
  not_converged("power iteration", max_iter, theta);
}

EigenEstimate inverse_min_eigenvalue(const BandedMatrix& q, double rel_tol, int max_iter) {
  const int n = q.size();
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  const BandCholesky chol(q, all);
  std::vector<double> v = start_vector(n);
  normalize(v);
  std::vector<double> w(v.size());
  double theta = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    w = v;
    chol.solve(w);
    // v^T Q^{-1} v is the Rayleigh quotient of the inverse.
    const double mu = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
    const double next = 1.0 / mu;
    normalize(w);
    v.swap(w);
    if (it > 1 && std::abs(next - theta) <= rel_tol * std::abs(next)) {
      return {next, it, residual_of(q, v, next)};
    }
    theta = next;
  }
  not_converged("inverse iteration", max_iter, theta);
}

}  // namespace ddmiqo
