#pragma once

#include "bdl/types.hpp"

#include <cstdint>
#include <vector>

namespace bdl {

struct PursuitConfig {
  std::int64_t sparsity_t = 1;
  double residual_tol = 0.0;
};

// Orthogonal matching pursuit. Atoms are picked by |phi_k' r| / ||phi_k||
// (lowest index wins ties) and the weights are refit by least squares on the
// selected set through an updated QR factorization. Stops after sparsity_t
// atoms, once ||r|| <= residual_tol, or when no remaining atom extends the
// span of the selection.
SparseCode omp(const Matrix& phi, const Vector& y, const PursuitConfig& cfg);

// Column-wise omp; columns may be coded in parallel.
std::vector<SparseCode> batch_omp(const Matrix& phi, const Matrix& y, const PursuitConfig& cfg);

}  // namespace bdl
