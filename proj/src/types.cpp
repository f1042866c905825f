#include "bdl/types.hpp"

#include "bdl/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bdl {

namespace {

int max_label(const std::vector<int>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

void require_positive(const std::optional<double>& v, const char* name) {
  if (!(std::isfinite(*v) && *v > 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter,
                std::string(name) + " must be positive and finite, got " + std::to_string(*v));
  }
}

void require_positive(const std::optional<std::int64_t>& v, const char* name) {
  if (*v <= 0) {
    throw Error(ErrorCode::NonPositiveParameter,
                std::string(name) + " must be positive, got " + std::to_string(*v));
  }
}

}  // namespace

TrainingSet::TrainingSet(Matrix features, std::vector<int> labels)
    : TrainingSet(std::move(features), labels, max_label(labels)) {}

TrainingSet::TrainingSet(Matrix features, std::vector<int> labels, int num_classes)
    : x_(std::move(features)), labels_(std::move(labels)), num_classes_(num_classes) {
  if (x_.rows() < 1 || x_.cols() < 1) {
    throw Error(ErrorCode::InvalidData, "feature matrix must be non-empty");
  }
  if (static_cast<Eigen::Index>(labels_.size()) != x_.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(x_.cols()) + " labels, got " +
                    std::to_string(labels_.size()));
  }
  if (num_classes_ < 1) throw Error(ErrorCode::EmptyClass, "no classes");
  if (!x_.allFinite()) throw Error(ErrorCode::InvalidData, "non-finite feature value");

  class_indices_.assign(static_cast<std::size_t>(num_classes_), {});
  for (Eigen::Index i = 0; i < x_.cols(); ++i) {
    const int l = labels_[static_cast<std::size_t>(i)];
    if (l < 1 || l > num_classes_) {
      throw Error(ErrorCode::InvalidData, "label " + std::to_string(l) + " outside 1.." +
                                              std::to_string(num_classes_));
    }
    class_indices_[static_cast<std::size_t>(l - 1)].push_back(i);
  }
  for (int c = 0; c < num_classes_; ++c) {
    if (class_indices_[static_cast<std::size_t>(c)].empty()) {
      throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c + 1) + " has no instances");
    }
  }
}

Eigen::Index TrainingSet::min_class_size() const {
  Eigen::Index best = 0;
  for (const auto& idx : class_indices_) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    if (best == 0 || n < best) best = n;
  }
  return best;
}

Hyperparams validate_hyperparams(const Hyperparams& h, const TrainingSet& data) {
  if (data.num_classes() < 1 || data.min_class_size() < 1) {
    throw Error(ErrorCode::EmptyClass, "training set has an empty class");
  }
  const auto m = data.feature_dim();
  const auto n = data.size();
  const double min_nc = static_cast<double>(data.min_class_size());

  Hyperparams out = h;
  if (!out.a0) out.a0 = min_nc / 2.0;
  if (!out.b0) out.b0 = min_nc / 2.0;
  if (!out.c0) out.c0 = defaults::kGammaHyper;
  if (!out.d0) out.d0 = defaults::kGammaHyper;
  if (!out.e0) out.e0 = defaults::kGammaHyper;
  if (!out.f0) out.f0 = defaults::kGammaHyper;
  if (!out.lambda_s0) out.lambda_s0 = defaults::kLambdaS0;
  if (!out.lambda_k0) out.lambda_k0 = static_cast<double>(m);
  if (!out.lambda_eps0) out.lambda_eps0 = defaults::kLambdaEps0;
  if (!out.k_init) out.k_init = static_cast<std::int64_t>(std::ceil(1.5 * static_cast<double>(n)));
  if (!out.gibbs_iters) out.gibbs_iters = defaults::kGibbsIters;
  if (!out.burn_in) {
    out.burn_in = *out.gibbs_iters - std::min(defaults::kDictSamples, *out.gibbs_iters);
  }
  if (!out.dict_samples) out.dict_samples = *out.gibbs_iters - *out.burn_in;
  if (!out.sparsity_t) {
    out.sparsity_t = std::clamp<std::int64_t>(m / 4, 1, defaults::kMaxSparsity);
  }
  if (!out.ridge_lambda) out.ridge_lambda = defaults::kRidgeLambda;

  require_positive(out.a0, "a0");
  require_positive(out.b0, "b0");
  require_positive(out.c0, "c0");
  require_positive(out.d0, "d0");
  require_positive(out.e0, "e0");
  require_positive(out.f0, "f0");
  require_positive(out.lambda_s0, "lambda_s0");
  require_positive(out.lambda_k0, "lambda_k0");
  require_positive(out.lambda_eps0, "lambda_eps0");
  require_positive(out.k_init, "k_init");
  require_positive(out.gibbs_iters, "gibbs_iters");
  require_positive(out.sparsity_t, "sparsity_t");

  if (*out.a0 >= min_nc || *out.b0 >= min_nc) {
    throw Error(ErrorCode::BetaMassOutOfRange,
                "a0 and b0 must lie strictly below the smallest class size " +
                    std::to_string(data.min_class_size()));
  }
  if (*out.burn_in < 0 || *out.burn_in >= *out.gibbs_iters) {
    throw Error(ErrorCode::InvalidParameter, "burn_in must lie in [0, gibbs_iters)");
  }
  require_positive(out.dict_samples, "dict_samples");
  if (*out.dict_samples > *out.gibbs_iters - *out.burn_in) {
    throw Error(ErrorCode::InvalidParameter,
                "dict_samples exceeds the number of post-burn-in iterations");
  }
  if (!(std::isfinite(*out.ridge_lambda) && *out.ridge_lambda >= 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter, "ridge_lambda must be non-negative");
  }
  return out;
}

Vector SparseCode::dense() const {
  Vector v = Vector::Zero(dictionary_size);
  for (std::size_t j = 0; j < support.size(); ++j) v(support[j]) = weights[j];
  return v;
}

}  // namespace bdl
