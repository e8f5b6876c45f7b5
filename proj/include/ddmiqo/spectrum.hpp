#pragma once

#include "ddmiqo/banded.hpp"

namespace ddmiqo {

struct EigenEstimate {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  // ||Q v - value v|| / max(|value|, tiny) at the returned vector
};

inline constexpr int kEigenIterationCap = 100000;

/// Largest eigenvalue of a symmetric PSD banded matrix by power iteration.
/// Stops when the Rayleigh quotient changes by at most rel_tol relative to
/// itself; throws NumericalError when max_iter is reached first.
EigenEstimate power_max_eigenvalue(const BandedMatrix& q, double rel_tol = 1e-9,
                                   int max_iter = kEigenIterationCap);

/// Smallest eigenvalue of a positive definite banded matrix by inverse iteration
/// on its banded Cholesky factor. Same stopping rule as power_max_eigenvalue.
EigenEstimate inverse_min_eigenvalue(const BandedMatrix& q, double rel_tol = 1e-9,
                                     int max_iter = kEigenIterationCap);

}  // namespace ddmiqo
