#pragma once

#include "bdl/gibbs.hpp"
#include "bdl/rng.hpp"
#include "bdl/types.hpp"

#include <cstdint>
#include <vector>

namespace bdl {

// Dictionary = K_init training columns drawn with replacement; supports and
// weights from OMP over that dictionary; pi = 0.5 everywhere; precisions at
// their prior values. `hyper` must be validated.
GibbsState init_state(const TrainingSet& data, const Hyperparams& hyper, RngStream& rng);

struct TrainResult {
  LearnedModel model;
  Matrix ridge_w;  // classifier before Bayesian refinement
  InferenceTrace trace;
  InferenceTrace classifier_trace;
  double reconstruction_error = 0.0;
};

// Validation, initialization, dictionary inference and finalization, then
// classifier training on the final codes. Pure function of its arguments.
TrainResult train_model(const TrainingSet& data, const Hyperparams& hyper, std::uint64_t seed);

struct Evaluation {
  std::vector<int> predictions;
  double accuracy = 0.0;    // percent
  double latency_ms = 0.0;  // mean per query
};

std::vector<int> predict_labels(const LearnedModel& model, const Matrix& queries);
Evaluation evaluate(const LearnedModel& model, const Matrix& queries,
                    const std::vector<int>& truth);
double accuracy_percent(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace bdl
