#pragma once

#include "bdl/rng.hpp"
#include "bdl/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace bdl {

// Prior constants of the factor model. `truncation` is the Beta-process
// truncation level K used in the Beta prior over the selection probabilities;
// it stays fixed when atoms are pruned.
struct Priors {
  double a0 = 1.0;
  double b0 = 1.0;
  double c0 = 1e-6;
  double d0 = 1e-6;
  double e0 = 1e-6;
  double f0 = 1e-6;
  double lambda_s0 = 1.0;
  double lambda_k0 = 1.0;
  std::int64_t truncation = 1;

  // Takes the fields from validated hyperparameters.
  static Priors from(const Hyperparams& h);
};

inline constexpr double kDefaultPruneEps = 1e-6;

// Per-atom list of posterior dictionary draws, aligned with the active atoms.
using AtomSamples = std::vector<std::vector<Vector>>;

/// Full sampler state for X ~ Phi (Z o S) + noise with class-conditional
/// Bernoulli supports.
///
/// `residual` caches X - Phi (Z o S) and is kept in sync by every sampling
/// routine. Code that edits phi, z or s directly must call
/// recompute_residual() before sampling again.
struct GibbsState {
  TrainingSet data;
  Priors priors;

  Matrix phi;         // m x |K|
  BinaryMatrix z;     // |K| x N
  Matrix s;           // |K| x N
  Matrix pi;          // C x |K|
  Vector lambda_s;    // C
  double lambda_eps = 1.0;

  std::vector<std::int64_t> active_atoms;
  AtomSamples atom_samples;

  Matrix residual;    // m x N

  Eigen::Index num_atoms() const noexcept { return phi.cols(); }
  Matrix codes() const;  // Z o S
  void recompute_residual();
  // Throws InvalidData when shapes or value ranges are inconsistent.
  void check_invariants() const;
};

// Builds a state and its residual; active_atoms become 0..|K|-1.
GibbsState make_state(TrainingSet data, Priors priors, Matrix phi, BinaryMatrix z, Matrix s,
                      Matrix pi, Vector lambda_s, double lambda_eps);

struct GaussianPosterior {
  Vector mean;
  double precision = 1.0;
};

struct ScalarGaussian {
  double mean = 0.0;
  double precision = 1.0;
};

struct BetaParams {
  double a = 1.0;
  double b = 1.0;
};

struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;
};

// x_i - Phi (z_i o s_i) + phi_k z_ik s_ik.
Vector atom_contribution(const GibbsState& state, Eigen::Index i, Eigen::Index k);

GaussianPosterior atom_posterior(const GibbsState& state, Eigen::Index k);
void sample_atom(GibbsState& state, Eigen::Index k, RngStream& rng);

// Posterior probability that z_ik = 1; `c` is the 0-based class of instance i.
double z_success_probability(const GibbsState& state, int c, Eigen::Index i, Eigen::Index k);
bool sample_z(GibbsState& state, int c, Eigen::Index i, Eigen::Index k, RngStream& rng);

ScalarGaussian weight_posterior(const GibbsState& state, int c, Eigen::Index i, Eigen::Index k);
double sample_s(GibbsState& state, int c, Eigen::Index i, Eigen::Index k, RngStream& rng);

BetaParams pi_posterior(const GibbsState& state, int c, Eigen::Index k);
double sample_pi(GibbsState& state, int c, Eigen::Index k, RngStream& rng);

GammaParams lambda_s_posterior(const GibbsState& state, int c);
double sample_lambda_s(GibbsState& state, int c, RngStream& rng);

GammaParams lambda_eps_posterior(const GibbsState& state);
double sample_lambda_eps(GibbsState& state, RngStream& rng);

// True when every class has let go of atom k: either its selection
// probability is below `eps`, or none of the class's instances currently use
// the atom, in which case that probability was just drawn from
// Beta(a0/K, b0(K-1)/K + N_c) and stays negligible from then on.
bool atom_is_dropped(const GibbsState& state, Eigen::Index k, double eps = kDefaultPruneEps);

// Removes every dropped atom from phi, z, s, pi, active_atoms and
// atom_samples. Returns the number removed. Throws AllAtomsPruned instead of
// emptying the dictionary.
Eigen::Index prune_atoms(GibbsState& state, double eps = kDefaultPruneEps);

struct TraceRecord {
  std::int64_t iteration = 0;
  Eigen::Index active_atoms = 0;
  double reconstruction_error = 0.0;  // squared Frobenius norm of the residual
  double lambda_eps = 0.0;
  std::vector<double> lambda_s;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using InferenceTrace = std::vector<TraceRecord>;

struct SweepOptions {
  bool update_pi = true;
  bool prune = true;
  double prune_eps = kDefaultPruneEps;
};

// One sweep: atoms, then (z, s) per instance and atom, then pi, lambda_s,
// lambda_eps, then pruning. Appends a record to `trace` when given.
void gibbs_iteration(GibbsState& state, RngStream& rng, const SweepOptions& options = {},
                     InferenceTrace* trace = nullptr);

struct RunOptions {
  std::int64_t iterations = 35;
  std::int64_t burn_in = 25;
  std::int64_t samples = 10;
  SweepOptions sweep;

  static RunOptions from(const Hyperparams& h);
};

struct InferenceResult {
  GibbsState state;
  InferenceTrace trace;
};

// Runs the sweeps and stores the dictionary draws of the last
// `options.samples` post-burn-in iterations in state.atom_samples.
InferenceResult run_inference(GibbsState state, const RunOptions& options, RngStream& rng);

// Column-wise mean of each atom's draws.
Matrix finalize_dictionary(const AtomSamples& samples);

// Tab-separated: iteration, atoms, frobenius_error, lambda_eps, lambda_s_<c>...
void write_trace(std::ostream& out, const InferenceTrace& trace);

}  // namespace bdl
