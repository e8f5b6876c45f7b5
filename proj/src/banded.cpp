#include "ddmiqo/banded.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ddmiqo/errors.hpp"

namespace ddmiqo {

BandedMatrix BandedMatrix::from_bands(int n, int k, std::vector<std::vector<double>> bands,
                                      DiagonalCheck check) {
  if (n <= 0) throw InputError("matrix dimension must be positive");
  if (k < 0 || (k >= n && n > 1) || (n == 1 && k != 0)) {
    throw InputError("bandwidth must satisfy 0 <= k < n (n=" + std::to_string(n) +
                     ", k=" + std::to_string(k) + ")");
  }
  if (bands.size() != static_cast<std::size_t>(k) + 1) {
    throw InputError("expected " + std::to_string(k + 1) + " bands, got " +
                     std::to_string(bands.size()));
  }
  for (int b = 0; b <= k; ++b) {
    if (bands[static_cast<std::size_t>(b)].size() != static_cast<std::size_t>(n - b)) {
      throw InputError("band " + std::to_string(b) + " must have " + std::to_string(n - b) +
                       " entries");
    }
  }
  for (int i = 0; i < n; ++i) {
    const double diag = bands[0][static_cast<std::size_t>(i)];
    const bool ok = check == DiagonalCheck::kPositive ? diag > 0.0 : diag >= 0.0;
    if (!ok || !std::isfinite(diag)) {
      throw InputError("diagonal entry " + std::to_string(i) + " must be " +
                       (check == DiagonalCheck::kPositive ? "positive" : "non-negative") +
                       " and finite");
    }
  }
  for (const auto& band : bands) {
    for (double v : band) {
      if (!std::isfinite(v)) throw InputError("matrix entries must be finite");
    }
  }
  BandedMatrix m;
  m.n_ = n;
  m.k_ = k;
  m.bands_ = std::move(bands);
  return m;
}

BandedMatrix BandedMatrix::from_dense(int k, const std::vector<std::vector<double>>& dense) {
  const int n = static_cast<int>(dense.size());
  for (const auto& row : dense) {
    if (row.size() != dense.size()) throw InputError("dense matrix must be square");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double a = dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      const double b = dense[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      if (j - i > k && (a != 0.0 || b != 0.0)) {
        throw InputError("entry (" + std::to_string(i) + "," + std::to_string(j) +
                         ") lies outside the band k=" + std::to_string(k));
      }
      if (a != b) {
        throw InputError("matrix is not symmetric at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      }
    }
  }
  const int kk = std::min(k, std::max(n - 1, 0));
  std::vector<std::vector<double>> bands(static_cast<std::size_t>(kk) + 1);
  for (int b = 0; b <= kk; ++b) {
    auto& band = bands[static_cast<std::size_t>(b)];
    band.resize(static_cast<std::size_t>(n - b));
    for (int i = 0; i + b < n; ++i) {
      band[static_cast<std::size_t>(i)] =
          dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(i + b)];
    }
  }
  return from_bands(n, kk, std::move(bands));
}

double BandedMatrix::max_diagonal() const noexcept {
  double m = 0.0;
  for (double v : bands_.front()) m = std::max(m, v);
  return m;
}

void BandedMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(n_) || y.size() != static_cast<std::size_t>(n_)) {
    throw InputError("multiply: vector length does not match matrix dimension");
  }
  for (int i = 0; i < n_; ++i) y[static_cast<std::size_t>(i)] = bands_[0][static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  for (int b = 1; b <= k_; ++b) {
    const auto& band = bands_[static_cast<std::size_t>(b)];
    for (int i = 0; i + b < n_; ++i) {
      const double v = band[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(i)] += v * x[static_cast<std::size_t>(i + b)];
      y[static_cast<std::size_t>(i + b)] += v * x[static_cast<std::size_t>(i)];
    }
  }
}

std::vector<std::vector<double>> BandedMatrix::to_dense() const {
  std::vector<std::vector<double>> d(static_cast<std::size_t>(n_),
                                     std::vector<double>(static_cast<std::size_t>(n_), 0.0));
  for (int i = 0; i < n_; ++i) {
    for (int j = std::max(0, i - k_); j <= std::min(n_ - 1, i + k_); ++j) {
      d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (*this)(i, j);
    }
  }
  return d;
}

RelevanceIndex relevance_indexes(const BandedMatrix& q) {
  const int n = q.size();
  const int k = q.bandwidth();
  RelevanceIndex r;
  r.pi.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int last = i;
    for (int j = std::min(n - 1, i + k); j > i; --j) {
      if (q(i, j) != 0.0) {
        last = j;
        break;
      }
    }
    r.pi[static_cast<std::size_t>(i)] = last;
    r.reach = std::max(r.reach, last - i);
  }
  return r;
}

std::vector<int> relevant_columns(const RelevanceIndex& pi, int layer) {
  std::vector<int> cols;
  const int n = static_cast<int>(pi.pi.size());
  // pi[j] <= j + reach, so only the trailing window can qualify.
  for (int j = std::max(0, layer - pi.reach); j < std::min(layer, n); ++j) {
    if (pi.relevant(j, layer)) cols.push_back(j);
  }
  return cols;
}

DiagramState initial_state(std::int32_t constraint_state) {
  DiagramState s;
  s.constraint_state = constraint_state;
  return s;
}

double TransitionVector::dot(std::span<const double> d) const noexcept {
  double acc = 0.0;
  for (std::size_t t = 0; t < support.size(); ++t) {
    acc += values[t] * d[static_cast<std::size_t>(support[t])];
  }
  return acc;
}

namespace {

// Dense u over rows 0..l (length l+1).
std::vector<double> dense_transition(const DiagramState& state, const BandedMatrix& q) {
  const int l = state.layer;
  if (l >= q.size()) {
    throw InputError("transition requested past the last layer (layer " + std::to_string(l) + ")");
  }
  std::vector<double> u(static_cast<std::size_t>(l) + 1, 0.0);
  // v = W Q_l restricted to rows < l; only relevant columns have Q(j, l) != 0.
  for (std::size_t c = 0; c < state.columns.size(); ++c) {
    const double qjl = q(state.columns[c], l);
    if (qjl == 0.0) continue;
    const auto col = state.column(c);
    for (int r = 0; r < l; ++r) u[static_cast<std::size_t>(r)] += col[static_cast<std::size_t>(r)] * qjl;
  }
  const double qll = q(l, l);
  double quad = 0.0;
  for (int j : state.columns) quad += q(j, l) * u[static_cast<std::size_t>(j)];
  const double delta = qll - quad;
  if (!(delta >= kSchurTolerance * qll)) {
    std::ostringstream msg;
    msg << "matrix is not positive definite: Schur complement at layer " << l << " is " << delta;
    throw NumericalError(msg.str());
  }
  const double scale = 1.0 / std::sqrt(delta);
  for (int r = 0; r < l; ++r) u[static_cast<std::size_t>(r)] *= -scale;
  u[static_cast<std::size_t>(l)] = scale;
  return u;
}

TransitionVector sparsify(const std::vector<double>& dense, int layer) {
  TransitionVector t;
  t.layer = layer;
  for (std::size_t r = 0; r < dense.size(); ++r) {
    if (dense[r] != 0.0) {
      t.support.push_back(static_cast<std::int32_t>(r));
      t.values.push_back(dense[r]);
    }
  }
  return t;
}

}  // namespace

TransitionVector transition_vector(const DiagramState& state, const BandedMatrix& q) {
  return sparsify(dense_transition(state, q), state.layer);
}

DiagramState state_extend(const DiagramState& state, const BandedMatrix& q,
                          const RelevanceIndex& pi, bool assign, TransitionVector* u_out) {
  const int l = state.layer;
  if (l >= q.size()) throw InputError("cannot extend a terminal state");
  std::vector<double> u;
  if (assign) u = dense_transition(state, q);

  DiagramState next;
  next.layer = l + 1;
  next.constraint_state = state.constraint_state;
  next.columns = relevant_columns(pi, l + 1);
  const auto rows = static_cast<std::size_t>(l) + 1;
  next.values.assign(next.columns.size() * rows, 0.0);

  std::size_t old = 0;
  for (std::size_t c = 0; c < next.columns.size(); ++c) {
    const int j = next.columns[c];
    auto dst = next.column(c);
    if (j < l) {
      while (state.columns[old] != j) ++old;  // retained columns are a subsequence
      const auto src = state.column(old);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    if (assign) {
      const double uj = u[static_cast<std::size_t>(j)];
      if (uj != 0.0) {
        for (std::size_t r = 0; r < rows; ++r) dst[r] += u[r] * uj;
      }
    }
  }
  if (u_out != nullptr) {
    *u_out = assign ? sparsify(u, l) : TransitionVector{l, {}, {}};
  }
  return next;
}

DenseMatrix DenseMatrix::from_banded(const BandedMatrix& q) {
  DenseMatrix d(q.size());
  for (int i = 0; i < q.size(); ++i) {
    for (int j = 0; j < q.size(); ++j) d(i, j) = q(i, j);
  }
  return d;
}

std::vector<int> support_of(std::span<const std::uint8_t> z) {
  std::vector<int> s;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] != 0) s.push_back(static_cast<int>(i));
  }
  return s;
}

DenseMatrix pseudoinverse_oracle(const DenseMatrix& q, std::span<const std::uint8_t> z) {
  if (z.size() != static_cast<std::size_t>(q.n)) {
    throw InputError("pseudoinverse_oracle: z length does not match matrix dimension");
  }
  const std::vector<int> s = support_of(z);
  DenseMatrix out(q.n);
  if (s.empty()) return out;
  const auto m = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd qs(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      qs(a, b) = q(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(qs);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || (ldlt.vectorD().array() <= 0.0).any()) {
    throw NumericalError("pseudoinverse_oracle: Q_S is not positive definite");
  }
  const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(m, m));
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      out(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]) = inv(a, b);
    }
  }
  return out;
}

DenseMatrix pseudoinverse_oracle(const BandedMatrix& q, std::span<const std::uint8_t> z) {
  return pseudoinverse_oracle(DenseMatrix::from_banded(q), z);
}

BandCholesky::BandCholesky(const BandedMatrix& q, std::span<const int> support)
    : n_(static_cast<int>(support.size())), k_(std::min(q.bandwidth(), std::max(n_ - 1, 0))) {
  const auto w = static_cast<std::size_t>(k_) + 1;
  lower_.assign(static_cast<std::size_t>(n_) * w, 0.0);
  auto at = [&](int i, int b) -> double& { return lower_[static_cast<std::size_t>(i) * w + static_cast<std::size_t>(b)]; };
  for (int i = 0; i < n_; ++i) {
    for (int b = 0; b <= k_ && b <= i; ++b) at(i, b) = q(support[static_cast<std::size_t>(i)], support[static_cast<std::size_t>(i - b)]);
  }
  // L D L^T without square roots: at(i, 0) holds D(i), at(i, b) holds L(i, i-b).
  for (int i = 0; i < n_; ++i) {
    const int first = std::max(0, i - k_);
    for (int j = first; j < i; ++j) {
      double s = at(i, i - j);
      for (int t = std::max(first, j - k_); t < j; ++t) s -= at(i, i - t) * at(t, 0) * at(j, j - t);
      at(i, i - j) = s / at(j, 0);
    }
    double d = at(i, 0);
    for (int t = first; t < i; ++t) d -= at(i, i - t) * at(i, i - t) * at(t, 0);
    if (!(d > kSchurTolerance * q(support[static_cast<std::size_t>(i)], support[static_cast<std::size_t>(i)]))) {
      std::ostringstream msg;
      msg << "banded factorization failed at compacted index " << i << " (pivot " << d
          << "): submatrix is not positive definite";
      throw NumericalError(msg.str());
    }
    at(i, 0) = d;
  }
}

void BandCholesky::solve(std::span<double> rhs) const {
  if (rhs.size() != static_cast<std::size_t>(n_)) throw InputError("BandCholesky::solve: size mismatch");
  const auto w = static_cast<std::size_t>(k_) + 1;
  auto at = [&](int i, int b) { return lower_[static_cast<std::size_t>(i) * w + static_cast<std::size_t>(b)]; };
  for (int i = 0; i < n_; ++i) {
    double s = rhs[static_cast<std::size_t>(i)];
    for (int b = 1; b <= std::min(k_, i); ++b) s -= at(i, b) * rhs[static_cast<std::size_t>(i - b)];
    rhs[static_cast<std::size_t>(i)] = s;
  }
  for (int i = 0; i < n_; ++i) rhs[static_cast<std::size_t>(i)] /= at(i, 0);
  for (int i = n_ - 1; i >= 0; --i) {
    double s = rhs[static_cast<std::size_t>(i)];
    for (int b = 1; b <= k_ && i + b < n_; ++b) s -= at(i + b, b) * rhs[static_cast<std::size_t>(i + b)];
    rhs[static_cast<std::size_t>(i)] = s;
  }
}

std::vector<double> banded_solve(const BandedMatrix& q, std::span<const int> support,
                                 std::span<const double> rhs) {
  const auto n = static_cast<std::size_t>(q.size());
  if (support.empty()) throw InputError("banded_solve: support must be non-empty");
  for (std::size_t a = 0; a < support.size(); ++a) {
    if (support[a] < 0 || static_cast<std::size_t>(support[a]) >= n || (a > 0 && support[a] <= support[a - 1])) {
      throw InputError("banded_solve: support must be strictly increasing indexes in [0, n)");
    }
  }
  std::vector<double> compact(support.size());
  if (rhs.size() == n) {
    for (std::size_t a = 0; a < support.size(); ++a) compact[a] = rhs[static_cast<std::size_t>(support[a])];
  } else if (rhs.size() == support.size()) {
    std::copy(rhs.begin(), rhs.end(), compact.begin());
  } else {
    throw InputError("banded_solve: rhs must have length n or |support|");
  }
  BandCholesky chol(q, support);
  chol.solve(compact);
  std::vector<double> x(n, 0.0);
  for (std::size_t a = 0; a < support.size(); ++a) x[static_cast<std::size_t>(support[a])] = compact[a];
  return x;
}

}  // namespace ddmiqo
