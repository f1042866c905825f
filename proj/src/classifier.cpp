#include "bdl/classifier.hpp"

#include "bdl/error.hpp"
#include "bdl/pursuit.hpp"

#include <string>

namespace bdl {

Matrix label_matrix(const std::vector<int>& labels, int num_classes) {
  Matrix h = Matrix::Zero(num_classes, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 1 || labels[i] > num_classes) {
      throw Error(ErrorCode::ClassOutOfRange, "label " + std::to_string(labels[i]));
    }
    h(labels[i] - 1, static_cast<Eigen::Index>(i)) = 1.0;
  }
  return h;
}

Matrix ridge_init(const Matrix& codes, const Matrix& labels, double lambda) {
  if (codes.cols() != labels.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "codes and labels disagree on instance count");
  }
  const Eigen::Index k = codes.rows();
  Matrix gram = codes * codes.transpose();
  gram.diagonal().array() += lambda;
  const Matrix rhs = codes * labels.transpose();  // A H'

  // gram is symmetric, so W' = gram^-1 A H'.
  Eigen::LDLT<Matrix> ldlt(gram);
  if (lambda > 0.0 && ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    return ldlt.solve(rhs).transpose();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(gram);
  if (qr.rank() < k) {
    throw Error(ErrorCode::SingularSystem,
                "code Gram matrix has rank " + std::to_string(qr.rank()) + " < " +
                    std::to_string(k));
  }
  return qr.solve(rhs).transpose();
}

ClassifierTraining train_classifier(const std::vector<int>& labels, int num_classes,
                                    const Matrix& pi_frozen, const BinaryMatrix& z_init,
                                    const Matrix& s_init, const Hyperparams& hyper,
                                    RngStream& rng) {
  const Eigen::Index atoms = z_init.rows();
  if (pi_frozen.cols() != atoms || pi_frozen.rows() != num_classes) {
    throw Error(ErrorCode::DimensionMismatch,
                "frozen selection probabilities are " + std::to_string(pi_frozen.rows()) + "x" +
                    std::to_string(pi_frozen.cols()) + ", expected " +
                    std::to_string(num_classes) + "x" + std::to_string(atoms));
  }
  if (s_init.rows() != atoms || s_init.cols() != z_init.cols() ||
      z_init.cols() != static_cast<Eigen::Index>(labels.size())) {
    throw Error(ErrorCode::DimensionMismatch, "initial supports and weights disagree");
  }

  const Matrix h = label_matrix(labels, num_classes);
  const Matrix codes = z_init.cast<double>().cwiseProduct(s_init);
  ClassifierTraining out;
  out.w = ridge_init(codes, h, hyper.ridge_lambda.value());
  if (hyper.gibbs_iters.value() <= 0) return out;

  Priors priors = Priors::from(hyper);
  priors.lambda_k0 = static_cast<double>(num_classes);
  GibbsState state =
      make_state(TrainingSet(h, labels, num_classes), priors, out.w, z_init, s_init, pi_frozen,
                 Vector::Constant(num_classes, hyper.lambda_s0.value()),
                 hyper.lambda_eps0.value());

  RunOptions opts = RunOptions::from(hyper);
  opts.sweep.update_pi = false;
  opts.sweep.prune = false;
  InferenceResult result = run_inference(std::move(state), opts, rng);
  out.w = finalize_dictionary(result.state.atom_samples);
  out.trace = std::move(result.trace);
  return out;
}

Classification classify(const Matrix& w, const SparseCode& code) {
  if (code.dictionary_size != w.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "code over " +
                                                  std::to_string(code.dictionary_size) +
                                                  " atoms, classifier expects " +
                                                  std::to_string(w.cols()));
  }
  Classification out;
  out.scores = Vector::Zero(w.rows());
  for (std::size_t j = 0; j < code.support.size(); ++j) {
    out.scores += w.col(code.support[j]) * code.weights[j];
  }
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < out.scores.size(); ++c) {
    if (out.scores(c) > out.scores(best)) best = c;
  }
  out.label = static_cast<int>(best) + 1;
  return out;
}

Classification predict(const LearnedModel& model, const Vector& y) {
  if (y.size() != model.feature_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "query has " + std::to_string(y.size()) +
                                                  " features, model expects " +
                                                  std::to_string(model.feature_dim()));
  }
  const SparseCode code = omp(model.phi, y, {model.sparsity_t, 0.0});
  return classify(model.w, code);
}

}  // namespace bdl
