#pragma once

// Reference computations written directly from the model definitions, kept
// independent of the library's own arithmetic.

#include "bdl/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const bdl::Matrix& m) {
  Dense d(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) d[r][c] = m(r, c);
  }
  return d;
}

// log N(x | mean, sigma^2 I) evaluated term by term.
inline double log_gaussian(const std::vector<double>& x, const std::vector<double>& mean,
                           double precision) {
  double sq = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) sq += (x[j] - mean[j]) * (x[j] - mean[j]);
  const double dim = static_cast<double>(x.size());
  return 0.5 * dim * std::log(precision / (2.0 * std::numbers::pi)) - 0.5 * precision * sq;
}

// P(z_ik = 1 | rest) by enumerating z_ik in {0, 1}: prior times the Gaussian
// likelihood of x_i under each reconstruction, normalized.
inline double z_posterior(const Dense& x, const Dense& phi, const Dense& z, const Dense& s,
                          double pi, double lambda_eps, std::size_t i, std::size_t k) {
  const std::size_t m = x.size();
  std::vector<double> xi(m);
  for (std::size_t r = 0; r < m; ++r) xi[r] = x[r][i];
  double log_joint[2];
  for (int bit = 0; bit < 2; ++bit) {
    std::vector<double> recon(m, 0.0);
    for (std::size_t a = 0; a < phi[0].size(); ++a) {
      const double zz = a == k ? bit : z[a][i];
      for (std::size_t r = 0; r < m; ++r) recon[r] += phi[r][a] * zz * s[a][i];
    }
    log_joint[bit] = std::log(bit == 1 ? pi : 1.0 - pi) + log_gaussian(xi, recon, lambda_eps);
  }
  return 1.0 / (1.0 + std::exp(log_joint[0] - log_joint[1]));
}

// Solves A X = B by Gauss-Jordan elimination with partial pivoting.
inline Dense solve(Dense a, Dense b) {
  const std::size_t n = a.size();
  const std::size_t cols = b[0].size();
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t best = p;
    for (std::size_t r = p + 1; r < n; ++r) {
      if (std::abs(a[r][p]) > std::abs(a[best][p])) best = r;
    }
    if (a[best][p] == 0.0) throw std::runtime_error("singular");
    std::swap(a[p], a[best]);
    std::swap(b[p], b[best]);
    const double pivot = a[p][p];
    for (std::size_t c = 0; c < n; ++c) a[p][c] /= pivot;
    for (std::size_t c = 0; c < cols; ++c) b[p][c] /= pivot;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == p || a[r][p] == 0.0) continue;
      const double f = a[r][p];
      for (std::size_t c = 0; c < n; ++c) a[r][c] -= f * a[p][c];
      for (std::size_t c = 0; c < cols; ++c) b[r][c] -= f * b[p][c];
    }
  }
  return b;
}

// W from the normal equations (A A' + lambda I) W' = A H'.
inline bdl::Matrix ridge(const bdl::Matrix& codes, const bdl::Matrix& labels, double lambda) {
  const Dense a = to_dense(codes);
  const Dense h = to_dense(labels);
  const std::size_t k = a.size();
  const std::size_t n = a[0].size();
  const std::size_t c = h.size();
  Dense gram(k, std::vector<double>(k, 0.0));
  Dense rhs(k, std::vector<double>(c, 0.0));
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = 0; q < k; ++q) {
      for (std::size_t i = 0; i < n; ++i) gram[p][q] += a[p][i] * a[q][i];
    }
    gram[p][p] += lambda;
    for (std::size_t r = 0; r < c; ++r) {
      for (std::size_t i = 0; i < n; ++i) rhs[p][r] += a[p][i] * h[r][i];
    }
  }
  const Dense wt = solve(gram, rhs);
  bdl::Matrix w(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < c; ++r) {
    for (std::size_t p = 0; p < k; ++p) w(r, p) = wt[p][r];
  }
  return w;
}

inline double relative_error(const bdl::Matrix& got, const bdl::Matrix& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

}  // namespace oracle
