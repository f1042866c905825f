#include "bdl/pursuit.hpp"

#include "bdl/error.hpp"
#include "bdl/parallel.hpp"

#include <cmath>
#include <string>

namespace bdl {

namespace {

// Relative size below which a residual or a new orthogonal direction counts
// as numerically zero.
constexpr double kNumericalFloor = 1e-12;

}  // namespace

SparseCode omp(const Matrix& phi, const Vector& y, const PursuitConfig& cfg) {
  if (phi.cols() == 0) throw Error(ErrorCode::ZeroDictionary, "empty dictionary");
  if (y.size() != phi.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "signal length " + std::to_string(y.size()) +
                                                  " vs dictionary rows " +
                                                  std::to_string(phi.rows()));
  }
  const Vector norms = phi.colwise().norm().transpose();
  if (!(norms.array() > 0.0).any()) throw Error(ErrorCode::ZeroDictionary, "all atoms are zero");

  const Eigen::Index m = phi.rows();
  const Eigen::Index max_atoms =
      std::min<Eigen::Index>({static_cast<Eigen::Index>(std::max<std::int64_t>(cfg.sparsity_t, 0)),
                              phi.cols(), m});

  SparseCode code;
  code.dictionary_size = phi.cols();

  Matrix q(m, max_atoms);
  Matrix r_factor = Matrix::Zero(max_atoms, max_atoms);
  Vector qty(max_atoms);
  std::vector<bool> used(static_cast<std::size_t>(phi.cols()), false);
  Vector residual = y;
  const double y_norm = y.norm();
  Eigen::Index selected = 0;

  while (selected < max_atoms) {
    const double res_norm = residual.norm();
    if (res_norm <= cfg.residual_tol || res_norm <= kNumericalFloor * y_norm) break;

    Eigen::Index best = -1;
    double best_score = 0.0;
    for (Eigen::Index k = 0; k < phi.cols(); ++k) {
      if (used[static_cast<std::size_t>(k)] || norms(k) == 0.0) continue;
      const double score = std::abs(phi.col(k).dot(residual)) / norms(k);
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    if (best < 0) break;

    // Gram-Schmidt with one reorthogonalization pass.
    Vector v = phi.col(best);
    Vector coeffs = Vector::Zero(selected);
    for (int pass = 0; pass < 2; ++pass) {
      const Vector proj = q.leftCols(selected).transpose() * v;
      v.noalias() -= q.leftCols(selected) * proj;
      coeffs += proj;
    }
    const double v_norm = v.norm();
    if (v_norm <= kNumericalFloor * norms(best)) {
      // Already in the span: nothing left to gain from this atom.
      used[static_cast<std::size_t>(best)] = true;
      continue;
    }
    q.col(selected) = v / v_norm;
    r_factor.col(selected).head(selected) = coeffs;
    r_factor(selected, selected) = v_norm;
    qty(selected) = q.col(selected).dot(y);
    residual.noalias() -= qty(selected) * q.col(selected);
    used[static_cast<std::size_t>(best)] = true;
    code.support.push_back(best);
    ++selected;
  }

  if (selected > 0) {
    const Vector w = r_factor.topLeftCorner(selected, selected)
                         .triangularView<Eigen::Upper>()
                         .solve(qty.head(selected));
    code.weights.assign(w.data(), w.data() + w.size());
  }
  return code;
}

std::vector<SparseCode> batch_omp(const Matrix& phi, const Matrix& y, const PursuitConfig& cfg) {
  if (y.rows() != phi.rows() && y.cols() > 0) {
    throw Error(ErrorCode::DimensionMismatch, "signal matrix rows vs dictionary rows");
  }
  std::vector<SparseCode> codes(static_cast<std::size_t>(y.cols()));
  parallel_for(codes.size(), [&](std::size_t j) {
    codes[j] = omp(phi, y.col(static_cast<Eigen::Index>(j)), cfg);
  });
  return codes;
}

}  // namespace bdl
