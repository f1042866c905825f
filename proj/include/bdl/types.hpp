#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace bdl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Labelled feature matrix: one instance per column, labels in 1..C.
class TrainingSet {
 public:
  TrainingSet() = default;
  // Throws EmptyClass when some label in 1..num_classes has no instances and
  // InvalidData for shape, label range or non-finite entries.
  TrainingSet(Matrix features, std::vector<int> labels, int num_classes);
  // Infers C as the largest label.
  TrainingSet(Matrix features, std::vector<int> labels);

  const Matrix& features() const noexcept { return x_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int label(Eigen::Index i) const { return labels_[static_cast<std::size_t>(i)]; }

  Eigen::Index feature_dim() const noexcept { return x_.rows(); }
  Eigen::Index size() const noexcept { return x_.cols(); }
  int num_classes() const noexcept { return num_classes_; }

  // Column indices of class c (0-based class index).
  const std::vector<Eigen::Index>& class_indices(int c) const {
    return class_indices_[static_cast<std::size_t>(c)];
  }
  Eigen::Index class_size(int c) const {
    return static_cast<Eigen::Index>(class_indices(c).size());
  }
  Eigen::Index min_class_size() const;

 private:
  Matrix x_;
  std::vector<int> labels_;
  int num_classes_ = 0;
  std::vector<std::vector<Eigen::Index>> class_indices_;
};

// Model and sampler settings. Unset fields take data-dependent defaults in
// validate_hyperparams().
struct Hyperparams {
  std::optional<double> a0;
  std::optional<double> b0;
  std::optional<double> c0;
  std::optional<double> d0;
  std::optional<double> e0;
  std::optional<double> f0;
  std::optional<double> lambda_s0;
  std::optional<double> lambda_k0;
  std::optional<double> lambda_eps0;
  std::optional<std::int64_t> k_init;
  std::optional<std::int64_t> gibbs_iters;
  std::optional<std::int64_t> burn_in;
  std::optional<std::int64_t> dict_samples;
  std::optional<std::int64_t> sparsity_t;
  std::optional<double> ridge_lambda;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

namespace defaults {
inline constexpr double kGammaHyper = 1e-6;
inline constexpr double kLambdaS0 = 1.0;
inline constexpr double kLambdaEps0 = 1e6;
inline constexpr std::int64_t kGibbsIters = 35;
inline constexpr std::int64_t kDictSamples = 10;
inline constexpr std::int64_t kMaxSparsity = 50;
inline constexpr double kRidgeLambda = 1.0;
}  // namespace defaults

// Fills unset fields and checks every constraint. Idempotent.
Hyperparams validate_hyperparams(const Hyperparams& h, const TrainingSet& data);

// Sparse code over a dictionary of `dictionary_size` atoms.
struct SparseCode {
  std::vector<Eigen::Index> support;
  std::vector<double> weights;
  Eigen::Index dictionary_size = 0;

  Vector dense() const;
};

struct LearnedModel {
  Matrix phi;  // m x |K|
  Matrix pi;   // C x |K|
  Matrix w;    // C x |K|
  std::int64_t sparsity_t = 1;
  Hyperparams hyper;
  std::uint64_t seed = 0;

  Eigen::Index feature_dim() const noexcept { return phi.rows(); }
  Eigen::Index num_atoms() const noexcept { return phi.cols(); }
  int num_classes() const noexcept { return static_cast<int>(pi.rows()); }
};

}  // namespace bdl
