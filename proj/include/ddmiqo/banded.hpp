#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ddmiqo {

// All indexes are 0-based. Variable i is decided by the arcs leaving layer i;
// a state at layer l has decided variables 0..l-1, so layers run 0..n.

/// Symmetric matrix with bandwidth k stored by diagonals.
///
/// band(b)[i] holds Q(i, i+b) for 0 <= b <= k and 0 <= i < n-b. Entries with
/// |i-j| > k are structurally zero. Positive definiteness is not certified at
/// construction; it surfaces as a NumericalError when a Schur complement
/// collapses during state construction or factorization.
class BandedMatrix {
 public:
  /// Positive diagonals are required for Q; regularizers R may have zeros (lambda = 0).
  enum class DiagonalCheck { kPositive, kNonNegative };

  BandedMatrix() = default;

  /// bands.size() must be k+1 and bands[b].size() must be n-b.
  static BandedMatrix from_bands(int n, int k, std::vector<std::vector<double>> bands,
                                 DiagonalCheck check = DiagonalCheck::kPositive);

  /// Square dense input; any nonzero with |i-j| > k or an asymmetric pair is rejected.
  static BandedMatrix from_dense(int k, const std::vector<std::vector<double>>& dense);

  int size() const noexcept { return n_; }
  int bandwidth() const noexcept { return k_; }

  double operator()(int i, int j) const noexcept {
    const int b = i < j ? j - i : i - j;
    if (b > k_) return 0.0;
    return bands_[static_cast<std::size_t>(b)][static_cast<std::size_t>(i < j ? i : j)];
  }

  std::span<const double> band(int b) const { return bands_.at(static_cast<std::size_t>(b)); }
  const std::vector<std::vector<double>>& bands() const noexcept { return bands_; }

  /// Q_max = max_i Q(i, i).
  double max_diagonal() const noexcept;

  /// y = Q x.
  void multiply(std::span<const double> x, std::span<double> y) const;

  std::vector<std::vector<double>> to_dense() const;

  bool operator==(const BandedMatrix&) const = default;

 private:
  int n_ = 0;
  int k_ = 0;
  std::vector<std::vector<double>> bands_;
};

/// pi[i] = max{ j : Q(i, j) != 0 }: the last variable whose transition reads column i.
struct RelevanceIndex {
  std::vector<int> pi;
  int reach = 0;  // max_i pi[i] - i, at most the bandwidth

  /// Column j is stored by states of layer l iff j < l <= pi[j].
  bool relevant(int column, int layer) const noexcept {
    return column < layer && layer <= pi[static_cast<std::size_t>(column)];
  }
};

RelevanceIndex relevance_indexes(const BandedMatrix& q);

/// Relevant columns {j : j < layer <= pi[j]}, ascending.
std::vector<int> relevant_columns(const RelevanceIndex& pi, int layer);

inline constexpr std::int32_t kNoConstraintState = -1;

/// The relevant columns of (Q o zz^T)^+ for the partial assignment reaching a node.
///
/// Only rows 0..layer-1 are stored; rows >= layer are zero by construction.
struct DiagramState {
  int layer = 0;
  std::vector<int> columns;
  std::vector<double> values;  // column-major, columns.size() x layer
  std::int32_t constraint_state = kNoConstraintState;

  std::span<const double> column(std::size_t c) const {
    return {values.data() + c * static_cast<std::size_t>(layer), static_cast<std::size_t>(layer)};
  }
  std::span<double> column(std::size_t c) {
    return {values.data() + c * static_cast<std::size_t>(layer), static_cast<std::size_t>(layer)};
  }

  bool operator==(const DiagramState&) const = default;
};

/// Root state: layer 0, no columns.
DiagramState initial_state(std::int32_t constraint_state = kNoConstraintState);

/// Sparse rank-one update direction u with (Q o z'z'^T)^+ - (Q o zz^T)^+ = u u^T.
///
/// Exact zeros are not stored. A non-empty vector always carries index `layer`
/// with value 1/sqrt(delta) > 0.
struct TransitionVector {
  int layer = 0;
  std::vector<std::int32_t> support;  // ascending, subset of [0, layer]
  std::vector<double> values;

  bool empty() const noexcept { return support.empty(); }
  double dot(std::span<const double> d) const noexcept;
  bool operator==(const TransitionVector&) const = default;
};

/// Schur complements below this fraction of Q(l, l) are treated as loss of definiteness.
inline constexpr double kSchurTolerance = 1e-12;

/// u = (-W Q_l + e_l) / sqrt(Q_ll - Q_l^T W Q_l), reading only the stored relevant columns.
/// Throws NumericalError (naming the layer and delta) when Q is not positive definite.
TransitionVector transition_vector(const DiagramState& state, const BandedMatrix& q);

/// Layer-(l+1) state after assigning `assign` to variable l. Expired columns are
/// dropped; for assign = 1 the rank-one update u u^T is applied to the retained
/// columns and column l is appended when it stays relevant. When `u_out` is
/// non-null it receives the transition vector (empty for assign = 0).
DiagramState state_extend(const DiagramState& state, const BandedMatrix& q,
                          const RelevanceIndex& pi, bool assign,
                          TransitionVector* u_out = nullptr);

/// Row-major dense square matrix used by the reference oracles.
struct DenseMatrix {
  int n = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  explicit DenseMatrix(int size) : n(size), data(static_cast<std::size_t>(size) * size, 0.0) {}
  static DenseMatrix from_banded(const BandedMatrix& q);

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }
};

/// (Q o zz^T)^+ by dense Cholesky of Q_S and zero padding. O(n^3); reference only.
DenseMatrix pseudoinverse_oracle(const DenseMatrix& q, std::span<const std::uint8_t> z);
DenseMatrix pseudoinverse_oracle(const BandedMatrix& q, std::span<const std::uint8_t> z);

/// Square-root-free L D L^T factor of a banded SPD matrix (lower band storage).
class BandCholesky {
 public:
  BandCholesky() = default;

  /// Factor the principal submatrix of q on `support` (ascending). Its compacted
  /// bandwidth is at most q.bandwidth().
  BandCholesky(const BandedMatrix& q, std::span<const int> support);

  int size() const noexcept { return n_; }

  /// Solve in place on a compacted right-hand side of length size().
  void solve(std::span<double> rhs) const;

 private:
  int n_ = 0;
  int k_ = 0;
  std::vector<double> lower_;  // lower_[i * (k+1) + b] = L(i, i-b) for b > 0, D(i) for b = 0
};

/// Solves Q_S x_S = rhs_S and returns x zero-padded to length n. `rhs` may be
/// either full length n or already compacted to |S|.
std::vector<double> banded_solve(const BandedMatrix& q, std::span<const int> support,
                                 std::span<const double> rhs);

/// Indexes of the ones in z.
std::vector<int> support_of(std::span<const std::uint8_t> z);

}  // namespace ddmiqo
