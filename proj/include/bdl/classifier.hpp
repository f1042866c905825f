#pragma once

#include "bdl/gibbs.hpp"
#include "bdl/rng.hpp"
#include "bdl/types.hpp"

#include <vector>

namespace bdl {

// C x N indicator matrix with a single 1 per column at row label-1.
Matrix label_matrix(const std::vector<int>& labels, int num_classes);

// Closed-form ridge regression W = H A' (A A' + lambda I)^-1.
Matrix ridge_init(const Matrix& codes, const Matrix& labels, double lambda);

struct ClassifierTraining {
  Matrix w;
  InferenceTrace trace;
};

/// Bayesian refinement of the linear classifier.
///
/// Runs the dictionary sampler on the label matrix H: the columns of W play
/// the role of atoms, the supports and weights start from the dictionary
/// stage's `z_init` / `s_init`, the selection probabilities stay fixed at
/// `pi_frozen` and no atom is ever pruned. W starts from ridge_init and is
/// returned as the mean of its post-burn-in draws; with zero iterations the
/// ridge solution is returned as is. The atom prior precision is C.
ClassifierTraining train_classifier(const std::vector<int>& labels, int num_classes,
                                    const Matrix& pi_frozen, const BinaryMatrix& z_init,
                                    const Matrix& s_init, const Hyperparams& hyper,
                                    RngStream& rng);

struct Classification {
  int label = 1;  // 1-based
  Vector scores;
};

// scores = W * code; label is the arg-max, lowest class on ties.
Classification classify(const Matrix& w, const SparseCode& code);

// OMP over the model dictionary followed by classify().
Classification predict(const LearnedModel& model, const Vector& y);

}  // namespace bdl
