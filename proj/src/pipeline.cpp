#include "bdl/pipeline.hpp"

#include "bdl/classifier.hpp"
#include "bdl/error.hpp"
#include "bdl/pursuit.hpp"

#include <chrono>
#include <cmath>

namespace bdl {

namespace {

enum Stream : std::uint64_t { kInitStream = 1, kDictionaryStream = 2, kClassifierStream = 3 };

}  // namespace

GibbsState init_state(const TrainingSet& data, const Hyperparams& hyper, RngStream& rng) {
  const Eigen::Index atoms = hyper.k_init.value();
  const Matrix& x = data.features();
  Matrix phi(x.rows(), atoms);
  for (Eigen::Index k = 0; k < atoms; ++k) {
    phi.col(k) = x.col(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(x.cols()))));
  }

  // Off-support weights do not enter the codes; they start from their prior.
  BinaryMatrix z = BinaryMatrix::Zero(atoms, x.cols());
  Matrix s(atoms, x.cols());
  const double prior_sd = 1.0 / std::sqrt(hyper.lambda_s0.value());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index k = 0; k < atoms; ++k) s(k, i) = prior_sd * rng.normal();
  }
  const std::vector<SparseCode> codes = batch_omp(phi, x, {hyper.sparsity_t.value(), 0.0});
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const SparseCode& code = codes[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < code.support.size(); ++j) {
      z(code.support[j], i) = 1;
      s(code.support[j], i) = code.weights[j];
    }
  }

  const int classes = data.num_classes();
  return make_state(data, Priors::from(hyper), std::move(phi), std::move(z), std::move(s),
                    Matrix::Constant(classes, atoms, 0.5),
                    Vector::Constant(classes, hyper.lambda_s0.value()),
                    hyper.lambda_eps0.value());
}

TrainResult train_model(const TrainingSet& data, const Hyperparams& hyper, std::uint64_t seed) {
  const Hyperparams h = validate_hyperparams(hyper, data);

  RngStream init_rng(seed, kInitStream);
  GibbsState state = init_state(data, h, init_rng);

  RngStream dict_rng(seed, kDictionaryStream);
  InferenceResult inferred = run_inference(std::move(state), RunOptions::from(h), dict_rng);

  TrainResult out;
  out.trace = std::move(inferred.trace);
  out.reconstruction_error = inferred.state.residual.squaredNorm();

  const GibbsState& final_state = inferred.state;
  out.model.phi = finalize_dictionary(final_state.atom_samples);
  out.model.pi = final_state.pi;
  out.model.sparsity_t = h.sparsity_t.value();
  out.model.hyper = h;
  out.model.seed = seed;

  out.ridge_w = ridge_init(final_state.codes(), label_matrix(data.labels(), data.num_classes()),
                           h.ridge_lambda.value());
  RngStream cls_rng(seed, kClassifierStream);
  ClassifierTraining cls = train_classifier(data.labels(), data.num_classes(), final_state.pi,
                                            final_state.z, final_state.s, h, cls_rng);
  out.model.w = std::move(cls.w);
  out.classifier_trace = std::move(cls.trace);
  return out;
}

std::vector<int> predict_labels(const LearnedModel& model, const Matrix& queries) {
  if (queries.cols() > 0 && queries.rows() != model.feature_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "queries have " + std::to_string(queries.rows()) + " features, model expects " +
                    std::to_string(model.feature_dim()));
  }
  const std::vector<SparseCode> codes = batch_omp(model.phi, queries, {model.sparsity_t, 0.0});
  std::vector<int> labels;
  labels.reserve(codes.size());
  for (const auto& code : codes) labels.push_back(classify(model.w, code).label);
  return labels;
}

double accuracy_percent(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction and label counts differ");
  }
  if (truth.empty()) throw Error(ErrorCode::InvalidData, "accuracy of an empty set is undefined");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

Evaluation evaluate(const LearnedModel& model, const Matrix& queries,
                    const std::vector<int>& truth) {
  if (queries.cols() == 0) throw Error(ErrorCode::InvalidData, "no test instances");
  if (static_cast<Eigen::Index>(truth.size()) != queries.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "label count differs from test column count");
  }
  if (queries.rows() != model.feature_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "queries have " + std::to_string(queries.rows()) + " features, model expects " +
                    std::to_string(model.feature_dim()));
  }
  Evaluation out;
  out.predictions.reserve(truth.size());
  // One untimed query warms the caches; then each query is timed in turn.
  predict(model, queries.col(0));
  const auto start = std::chrono::steady_clock::now();
  for (Eigen::Index j = 0; j < queries.cols(); ++j) {
    out.predictions.push_back(predict(model, queries.col(j)).label);
  }
  const std::chrono::duration<double, std::milli> elapsed =
      std::chrono::steady_clock::now() - start;
  out.latency_ms = elapsed.count() / static_cast<double>(queries.cols());
  out.accuracy = accuracy_percent(out.predictions, truth);
  return out;
}

}  // namespace bdl
