#pragma once

#include "bdl/types.hpp"

#include <cstdint>
#include <vector>

namespace bdl {

struct SyntheticSpec {
  int classes = 4;
  int atoms_per_class = 8;
  int shared_atoms = 4;
  Eigen::Index feature_dim = 32;
  int per_class = 50;  // instances per class, split evenly into train and test
  int sparsity = 3;
  double noise_std = 0.05;
  std::uint64_t seed = 1;
};

struct SyntheticCorpus {
  TrainingSet train;
  TrainingSet test;
  Matrix dictionary;             // unit-norm ground-truth atoms
  std::vector<int> atom_owner;   // class 1..C, 0 for shared atoms
  Matrix train_codes;            // ground-truth codes over `dictionary`
  Matrix test_codes;
};

// Class c owns atoms [c*k, (c+1)*k); shared atoms come last. Every instance
// combines `sparsity` distinct atoms from its class pool (own + shared) with
// standard-normal weights of magnitude at least kMinSyntheticWeight, plus
// N(0, noise_std^2) noise.
inline constexpr double kMinSyntheticWeight = 0.5;

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

// Gaussian random projection: returns P * raw with P (target_dim x d) drawn
// i.i.d. standard normal from the seeded stream, row-major.
Matrix projection_matrix(Eigen::Index target_dim, Eigen::Index input_dim, std::uint64_t seed);
Matrix random_projection(const Matrix& raw, Eigen::Index target_dim, std::uint64_t seed);

}  // namespace bdl
