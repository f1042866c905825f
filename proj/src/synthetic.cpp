#include "bdl/synthetic.hpp"

#include "bdl/error.hpp"
#include "bdl/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace bdl {

namespace {

double bounded_weight(RngStream& rng) {
  for (;;) {
    const double w = std::abs(rng.normal());
    if (w >= kMinSyntheticWeight) return w;
  }
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 1 || spec.atoms_per_class < 1 || spec.shared_atoms < 0 ||
      spec.feature_dim < 1 || spec.per_class < 2 || spec.sparsity < 1 ||
      !(spec.noise_std >= 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter, "synthetic corpus sizes must be positive");
  }
  const int pool = spec.atoms_per_class + spec.shared_atoms;
  if (spec.sparsity > pool) {
    throw Error(ErrorCode::InfeasibleSparsity, "sparsity " + std::to_string(spec.sparsity) +
                                                   " exceeds the " + std::to_string(pool) +
                                                   " atoms available per class");
  }

  RngStream rng(spec.seed, 0);
  const int total_atoms = spec.classes * spec.atoms_per_class + spec.shared_atoms;
  const Eigen::Index m = spec.feature_dim;

  SyntheticCorpus out;
  out.dictionary.resize(m, total_atoms);
  for (int k = 0; k < total_atoms; ++k) {
    for (Eigen::Index d = 0; d < m; ++d) out.dictionary(d, k) = rng.normal();
    out.dictionary.col(k).normalize();
  }
  out.atom_owner.assign(static_cast<std::size_t>(total_atoms), 0);
  for (int k = 0; k < spec.classes * spec.atoms_per_class; ++k) {
    out.atom_owner[static_cast<std::size_t>(k)] = k / spec.atoms_per_class + 1;
  }

  // The first ceil(n/2) instances of each class train, the rest test.
  const int split_size[2] = {(spec.per_class + 1) / 2, spec.per_class / 2};
  Matrix x[2];
  Matrix codes[2];
  std::vector<int> labels[2];
  for (int split = 0; split < 2; ++split) {
    const Eigen::Index n = static_cast<Eigen::Index>(spec.classes) * split_size[split];
    x[split].resize(m, n);
    codes[split] = Matrix::Zero(total_atoms, n);
    labels[split].resize(static_cast<std::size_t>(n));
  }

  for (int c = 0; c < spec.classes; ++c) {
    std::vector<int> class_pool(static_cast<std::size_t>(pool));
    std::iota(class_pool.begin(), class_pool.begin() + spec.atoms_per_class,
              c * spec.atoms_per_class);
    std::iota(class_pool.begin() + spec.atoms_per_class, class_pool.end(),
              spec.classes * spec.atoms_per_class);
    for (int split = 0; split < 2; ++split) {
      for (int j = 0; j < split_size[split]; ++j) {
        const Eigen::Index col = static_cast<Eigen::Index>(c) * split_size[split] + j;
        labels[split][static_cast<std::size_t>(col)] = c + 1;
        // Partial Fisher-Yates picks `sparsity` distinct atoms.
        std::vector<int> picks = class_pool;
        for (int t = 0; t < spec.sparsity; ++t) {
          const auto u = static_cast<std::size_t>(t) +
                         rng.uniform_index(static_cast<std::uint64_t>(pool - t));
          std::swap(picks[static_cast<std::size_t>(t)], picks[u]);
          codes[split](picks[static_cast<std::size_t>(t)], col) = bounded_weight(rng);
        }
        Vector v = out.dictionary * codes[split].col(col);
        for (Eigen::Index d = 0; d < m; ++d) v(d) += spec.noise_std * rng.normal();
        x[split].col(col) = v;
      }
    }
  }

  out.train = TrainingSet(std::move(x[0]), std::move(labels[0]), spec.classes);
  out.test = TrainingSet(std::move(x[1]), std::move(labels[1]), spec.classes);
  out.train_codes = std::move(codes[0]);
  out.test_codes = std::move(codes[1]);
  return out;
}

Matrix projection_matrix(Eigen::Index target_dim, Eigen::Index input_dim, std::uint64_t seed) {
  RngStream rng(seed, 0);
  Matrix p(target_dim, input_dim);
  for (Eigen::Index r = 0; r < target_dim; ++r) {
    for (Eigen::Index c = 0; c < input_dim; ++c) p(r, c) = rng.normal();
  }
  return p;
}

Matrix random_projection(const Matrix& raw, Eigen::Index target_dim, std::uint64_t seed) {
  return projection_matrix(target_dim, raw.rows(), seed) * raw;
}

}  // namespace bdl
