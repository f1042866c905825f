#include "bdl/classifier.hpp"
#include "bdl/error.hpp"
#include "bdl/gibbs.hpp"
#include "bdl/io.hpp"
#include "bdl/parallel.hpp"
#include "bdl/pipeline.hpp"
#include "bdl/synthetic.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(bdl::ErrorCode code) {
  using bdl::ErrorCode;
  switch (code) {
    case ErrorCode::NonPositiveParameter:
    case ErrorCode::InvalidParameter:
    case ErrorCode::BetaMassOutOfRange:
    case ErrorCode::ClassOutOfRange:
      return kExitUsage;
    case ErrorCode::AllAtomsPruned:
    case ErrorCode::NoSamplesCollected:
    case ErrorCode::ZeroDictionary:
    case ErrorCode::SingularSystem:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

struct Overrides {
  std::optional<std::int64_t> iters;
  std::optional<std::int64_t> burn_in;
  std::optional<double> a0;
  std::optional<double> b0;
  std::optional<double> lambda_eps0;
  std::optional<std::int64_t> sparsity;
  std::optional<double> ridge_lambda;

  bdl::Hyperparams hyper() const {
    bdl::Hyperparams h;
    h.gibbs_iters = iters;
    h.burn_in = burn_in;
    h.a0 = a0;
    h.b0 = b0;
    h.lambda_eps0 = lambda_eps0;
    h.sparsity_t = sparsity;
    h.ridge_lambda = ridge_lambda;
    return h;
  }
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--iters", o.iters, "Gibbs sampling iterations");
  cmd->add_option("--burn-in", o.burn_in, "Iterations discarded before collecting atom draws");
  cmd->add_option("--a0", o.a0, "Beta-process mass parameter a0");
  cmd->add_option("--b0", o.b0, "Beta-process mass parameter b0");
  cmd->add_option("--lambda-eps0", o.lambda_eps0, "Initial noise precision");
  cmd->add_option("--sparsity", o.sparsity, "OMP sparsity threshold");
  cmd->add_option("--ridge-lambda", o.ridge_lambda, "Ridge regularization weight");
}

bdl::TrainingSet load_set(const std::string& x_path, const std::string& labels_path) {
  return bdl::TrainingSet(bdl::load_matrix(x_path), bdl::load_labels(labels_path));
}

void check_dims(const bdl::LearnedModel& model, const bdl::Matrix& x) {
  if (x.rows() != model.feature_dim()) {
    throw bdl::Error(bdl::ErrorCode::DimensionMismatch,
                     "test features have " + std::to_string(x.rows()) +
                         " rows, model expects " + std::to_string(model.feature_dim()));
  }
}

struct Paths {
  std::string train_x;
  std::string labels;
  std::string test_x;
  std::string model;
  std::string trace;
  std::string output;
  std::string input;
};

int cmd_train(const Paths& p, const Overrides& o, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const bdl::TrainingSet data = load_set(p.train_x, p.labels);
  const bdl::TrainResult result = bdl::train_model(data, o.hyper(), seed);
  bdl::save_model(p.model, result.model);
  if (!p.trace.empty()) {
    std::ofstream out(p.trace);
    if (!out) throw bdl::Error(bdl::ErrorCode::IoError, "cannot open " + p.trace);
    bdl::write_trace(out, result.trace);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "atoms=" << result.model.num_atoms() << "\n"
            << "reconstruction_error=" << result.reconstruction_error << "\n"
            << "wall_time_s=" << secs << "\n";
  return kExitOk;
}

int cmd_classify(const Paths& p) {
  const bdl::LearnedModel model = bdl::load_model(p.model);
  const bdl::Matrix x = bdl::load_matrix(p.test_x);
  check_dims(model, x);
  const std::vector<int> labels = bdl::predict_labels(model, x);
  if (p.output.empty()) {
    for (int label : labels) std::cout << label << "\n";
  } else {
    bdl::save_labels(p.output, labels);
  }
  return kExitOk;
}

int cmd_eval(const Paths& p) {
  const bdl::LearnedModel model = bdl::load_model(p.model);
  const bdl::Matrix x = bdl::load_matrix(p.test_x);
  const std::vector<int> truth = bdl::load_labels(p.labels);
  if (x.cols() == 0) throw bdl::Error(bdl::ErrorCode::InvalidData, "test set is empty");
  check_dims(model, x);
  const bdl::Evaluation e = bdl::evaluate(model, x, truth);
  std::cout << "accuracy=" << e.accuracy << "%\n"
            << "latency_ms=" << e.latency_ms << "\n";
  return kExitOk;
}

int cmd_inspect_pi(const Paths& p, int cls) {
  const bdl::LearnedModel model = bdl::load_model(p.model);
  if (cls < 1 || cls > model.num_classes()) {
    throw bdl::Error(bdl::ErrorCode::ClassOutOfRange,
                     "class " + std::to_string(cls) + " not in 1.." +
                         std::to_string(model.num_classes()));
  }
  std::cout << "atom\tprob\n";
  for (Eigen::Index k = 0; k < model.num_atoms(); ++k) {
    std::cout << k + 1 << "\t" << model.pi(cls - 1, k) << "\n";
  }
  return kExitOk;
}

int cmd_synth(const std::string& dir, bdl::SyntheticSpec spec) {
  const bdl::SyntheticCorpus corpus = bdl::generate_synthetic(spec);
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  bdl::save_matrix((d / "train_x.bin").string(), corpus.train.features());
  bdl::save_labels((d / "train_labels.txt").string(), corpus.train.labels());
  bdl::save_matrix((d / "test_x.bin").string(), corpus.test.features());
  bdl::save_labels((d / "test_labels.txt").string(), corpus.test.labels());
  bdl::save_matrix((d / "dictionary.bin").string(), corpus.dictionary);
  return kExitOk;
}

int cmd_project(const Paths& p, Eigen::Index dim, std::uint64_t seed) {
  bdl::save_matrix(p.output, bdl::random_projection(bdl::load_matrix(p.input), dim, seed));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian dictionary learning and classification"};
  app.require_subcommand(1);

  Paths paths;
  Overrides overrides;
  std::uint64_t seed = 1;
  int cls = 1;
  std::string out_dir;
  bdl::SyntheticSpec synth;
  Eigen::Index project_dim = 0;

  auto* train = app.add_subcommand("train", "Learn a dictionary and classifier");
  train->add_option("--train-x", paths.train_x, "Training feature matrix")->required();
  train->add_option("--labels", paths.labels, "Training labels, one per line")->required();
  train->add_option("--model", paths.model, "Output model file")->required();
  train->add_option("--trace", paths.trace, "Optional per-iteration trace (TSV)");
  auto* train_seed = train->add_option("--seed", seed, "Random seed");
  add_overrides(train, overrides);

  auto* classify = app.add_subcommand("classify", "Predict one label per test column");
  classify->add_option("--test-x", paths.test_x, "Test feature matrix")->required();
  classify->add_option("--model", paths.model, "Model file")->required();
  classify->add_option("--output", paths.output, "Write labels here instead of stdout");

  auto* eval = app.add_subcommand("eval", "Report accuracy and per-query latency");
  eval->add_option("--test-x", paths.test_x, "Test feature matrix")->required();
  eval->add_option("--labels", paths.labels, "Ground-truth labels")->required();
  eval->add_option("--model", paths.model, "Model file")->required();

  auto* inspect = app.add_subcommand("inspect-pi", "Print selection probabilities of a class");
  inspect->add_option("--model", paths.model, "Model file")->required();
  inspect->add_option("--class", cls, "Class index, 1-based")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic labelled corpus");
  synth_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--classes", synth.classes, "Number of classes");
  synth_cmd->add_option("--atoms-per-class", synth.atoms_per_class, "Class-specific atoms");
  synth_cmd->add_option("--shared-atoms", synth.shared_atoms, "Atoms shared by all classes");
  synth_cmd->add_option("--dim", synth.feature_dim, "Feature dimension");
  synth_cmd->add_option("--per-class", synth.per_class, "Instances per class (train + test)");
  synth_cmd->add_option("--sparsity", synth.sparsity, "Atoms per instance");
  synth_cmd->add_option("--noise", synth.noise_std, "Noise standard deviation");

  auto* project = app.add_subcommand("project", "Gaussian random projection of a matrix");
  project->add_option("--input", paths.input, "Input matrix")->required();
  project->add_option("--output", paths.output, "Output matrix")->required();
  project->add_option("--dim", project_dim, "Target dimension")->required();
  project->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (const char* threads = std::getenv("BDL_THREADS")) {
    try {
      const long n = std::stol(threads);
      if (n < 1) throw std::invalid_argument("non-positive");
      bdl::set_thread_cap(static_cast<std::size_t>(n));
    } catch (const std::exception&) {
      std::cerr << "BDL_THREADS must be a positive integer\n";
      return kExitUsage;
    }
  }

  try {
    if (train->parsed()) {
      if (std::getenv("CI") != nullptr && train_seed->count() == 0) {
        std::cerr << "--seed is required when CI is set\n";
        return kExitUsage;
      }
      return cmd_train(paths, overrides, seed);
    }
    if (classify->parsed()) return cmd_classify(paths);
    if (eval->parsed()) return cmd_eval(paths);
    if (inspect->parsed()) return cmd_inspect_pi(paths, cls);
    if (synth_cmd->parsed()) return cmd_synth(out_dir, synth);
    if (project->parsed()) return cmd_project(paths, project_dim, seed);
  } catch (const bdl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
