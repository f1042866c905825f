#include "bdl/gibbs.hpp"

#include "bdl/error.hpp"
#include "bdl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace bdl {

namespace {

constexpr double kLogZetaClamp = 700.0;

void check_instance(const GibbsState& state, Eigen::Index i) {
  if (i < 0 || i >= state.data.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "instance " + std::to_string(i));
  }
}

void check_atom(const GibbsState& state, Eigen::Index k) {
  if (k < 0 || k >= state.num_atoms()) {
    throw Error(ErrorCode::IndexOutOfRange, "atom " + std::to_string(k));
  }
}

void check_class(const GibbsState& state, int c) {
  if (c < 0 || c >= state.data.num_classes()) {
    throw Error(ErrorCode::IndexOutOfRange, "class " + std::to_string(c));
  }
}

void check_member(const GibbsState& state, int c, Eigen::Index i) {
  check_class(state, c);
  check_instance(state, i);
  if (state.data.label(i) != c + 1) {
    throw Error(ErrorCode::IndexOutOfRange,
                "instance " + std::to_string(i) + " is not in class " + std::to_string(c + 1));
  }
}

// P(z = 1) given the prior pi and the sufficient statistics of the atom
// contribution x: ||phi||^2 and phi'x.
double z_probability(double pi, double lambda_eps, double weight, double phi_norm2,
                     double phi_dot_x) {
  if (pi <= 0.0) return 0.0;
  if (pi >= 1.0) return 1.0;
  const double log_zeta =
      -0.5 * lambda_eps * weight * (phi_norm2 * weight - 2.0 * phi_dot_x);
  const double zeta = std::exp(std::clamp(log_zeta, -kLogZetaClamp, kLogZetaClamp));
  return pi * zeta / (1.0 + pi * (zeta - 1.0));
}

ScalarGaussian weight_conditional(double lambda_s, double lambda_eps, double z, double phi_norm2,
                                  double phi_dot_x) {
  ScalarGaussian post;
  post.precision = lambda_s + lambda_eps * z * z * phi_norm2;
  post.mean = lambda_eps / post.precision * z * phi_dot_x;
  return post;
}

// Resamples (z_ik, s_ik) for all atoms of instance i, in atom order, keeping
// the residual column in sync.
void sweep_instance(GibbsState& state, Eigen::Index i, const Vector& phi_norm2, RngStream& rng) {
  const int c = state.data.label(i) - 1;
  const double lambda_s = state.lambda_s(c);
  auto r = state.residual.col(i);
  for (Eigen::Index k = 0; k < state.num_atoms(); ++k) {
    const auto phi_k = state.phi.col(k);
    double& s = state.s(k, i);
    std::uint8_t& z = state.z(k, i);

    // r becomes the atom contribution x_{i,phi_k}.
    if (z != 0 && s != 0.0) r.noalias() += phi_k * s;
    const double dot = phi_k.dot(r);

    const double p = z_probability(state.pi(c, k), state.lambda_eps, s, phi_norm2(k), dot);
    z = rng.bernoulli(p) ? 1 : 0;

    const ScalarGaussian post =
        weight_conditional(lambda_s, state.lambda_eps, z, phi_norm2(k), dot);
    s = rng.normal(post.mean, 1.0 / std::sqrt(post.precision));

    if (z != 0 && s != 0.0) r.noalias() -= phi_k * s;
  }
}

}  // namespace

Priors Priors::from(const Hyperparams& h) {
  Priors p;
  p.a0 = h.a0.value();
  p.b0 = h.b0.value();
  p.c0 = h.c0.value();
  p.d0 = h.d0.value();
  p.e0 = h.e0.value();
  p.f0 = h.f0.value();
  p.lambda_s0 = h.lambda_s0.value();
  p.lambda_k0 = h.lambda_k0.value();
  p.truncation = h.k_init.value();
  return p;
}

Matrix GibbsState::codes() const { return z.cast<double>().cwiseProduct(s); }

void GibbsState::recompute_residual() { residual = data.features() - phi * codes(); }

void GibbsState::check_invariants() const {
  const auto m = data.feature_dim();
  const auto n = data.size();
  const auto k = phi.cols();
  const auto c = data.num_classes();
  if (phi.rows() != m || z.rows() != k || z.cols() != n || s.rows() != k || s.cols() != n ||
      pi.rows() != c || pi.cols() != k || lambda_s.size() != c ||
      static_cast<Eigen::Index>(active_atoms.size()) != k || residual.rows() != m ||
      residual.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "sampler state shapes are inconsistent");
  }
  if (!atom_samples.empty() && static_cast<Eigen::Index>(atom_samples.size()) != k) {
    throw Error(ErrorCode::DimensionMismatch, "atom samples misaligned with dictionary");
  }
  if ((z.array() > 1).any()) throw Error(ErrorCode::InvalidData, "support bit outside {0,1}");
  if (!pi.allFinite() || (pi.array() < 0.0).any() || (pi.array() > 1.0).any()) {
    throw Error(ErrorCode::InvalidData, "selection probability outside [0,1]");
  }
  if (!(lambda_s.array() > 0.0).all() || !(lambda_eps > 0.0) || !std::isfinite(lambda_eps)) {
    throw Error(ErrorCode::InvalidData, "non-positive precision");
  }
  if (!phi.allFinite() || !s.allFinite() || !residual.allFinite()) {
    throw Error(ErrorCode::InvalidData, "non-finite dictionary, weight or residual");
  }
}

GibbsState make_state(TrainingSet data, Priors priors, Matrix phi, BinaryMatrix z, Matrix s,
                      Matrix pi, Vector lambda_s, double lambda_eps) {
  GibbsState state;
  state.data = std::move(data);
  state.priors = priors;
  state.phi = std::move(phi);
  state.z = std::move(z);
  state.s = std::move(s);
  state.pi = std::move(pi);
  state.lambda_s = std::move(lambda_s);
  state.lambda_eps = lambda_eps;
  state.active_atoms.resize(static_cast<std::size_t>(state.phi.cols()));
  for (std::size_t k = 0; k < state.active_atoms.size(); ++k) {
    state.active_atoms[k] = static_cast<std::int64_t>(k);
  }
  if (state.phi.rows() != state.data.feature_dim() || state.z.cols() != state.data.size() ||
      state.z.rows() != state.phi.cols() || state.s.rows() != state.z.rows() ||
      state.s.cols() != state.z.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "sampler state shapes are inconsistent");
  }
  state.recompute_residual();
  state.check_invariants();
  return state;
}

Vector atom_contribution(const GibbsState& state, Eigen::Index i, Eigen::Index k) {
  check_instance(state, i);
  check_atom(state, k);
  Vector x = state.residual.col(i);
  if (state.z(k, i) != 0) x += state.phi.col(k) * state.s(k, i);
  return x;
}

GaussianPosterior atom_posterior(const GibbsState& state, Eigen::Index k) {
  check_atom(state, k);
  const auto phi_k = state.phi.col(k);
  Vector weighted_sum = Vector::Zero(state.phi.rows());
  double sum_sq = 0.0;
  for (Eigen::Index i = 0; i < state.data.size(); ++i) {
    if (state.z(k, i) == 0) continue;
    const double a = state.s(k, i);
    // a * x_{i,phi_k} with x_{i,phi_k} = r_i + phi_k a
    weighted_sum.noalias() += a * state.residual.col(i) + (a * a) * phi_k;
    sum_sq += a * a;
  }
  GaussianPosterior post;
  post.precision = state.priors.lambda_k0 + state.lambda_eps * sum_sq;
  post.mean = (state.lambda_eps / post.precision) * weighted_sum;
  return post;
}

void sample_atom(GibbsState& state, Eigen::Index k, RngStream& rng) {
  const GaussianPosterior post = atom_posterior(state, k);
  const double stddev = 1.0 / std::sqrt(post.precision);
  Vector fresh(post.mean.size());
  for (Eigen::Index d = 0; d < fresh.size(); ++d) fresh(d) = post.mean(d) + stddev * rng.normal();

  const Vector delta = state.phi.col(k) - fresh;
  for (Eigen::Index i = 0; i < state.data.size(); ++i) {
    if (state.z(k, i) != 0 && state.s(k, i) != 0.0) {
      state.residual.col(i).noalias() += delta * state.s(k, i);
    }
  }
  state.phi.col(k) = fresh;
}

double z_success_probability(const GibbsState& state, int c, Eigen::Index i, Eigen::Index k) {
  check_member(state, c, i);
  check_atom(state, k);
  const Vector x = atom_contribution(state, i, k);
  const auto phi_k = state.phi.col(k);
  return z_probability(state.pi(c, k), state.lambda_eps, state.s(k, i), phi_k.squaredNorm(),
                       phi_k.dot(x));
}

bool sample_z(GibbsState& state, int c, Eigen::Index i, Eigen::Index k, RngStream& rng) {
  const double p = z_success_probability(state, c, i, k);
  const std::uint8_t fresh = rng.bernoulli(p) ? 1 : 0;
  const std::uint8_t old = state.z(k, i);
  if (fresh != old) {
    const double sign = fresh != 0 ? -1.0 : 1.0;
    state.residual.col(i).noalias() += sign * state.s(k, i) * state.phi.col(k);
    state.z(k, i) = fresh;
  }
  return fresh != 0;
}

ScalarGaussian weight_posterior(const GibbsState& state, int c, Eigen::Index i, Eigen::Index k) {
  check_member(state, c, i);
  check_atom(state, k);
  const Vector x = atom_contribution(state, i, k);
  const auto phi_k = state.phi.col(k);
  return weight_conditional(state.lambda_s(c), state.lambda_eps, state.z(k, i),
                            phi_k.squaredNorm(), phi_k.dot(x));
}

double sample_s(GibbsState& state, int c, Eigen::Index i, Eigen::Index k, RngStream& rng) {
  const ScalarGaussian post = weight_posterior(state, c, i, k);
  const double fresh = rng.normal(post.mean, 1.0 / std::sqrt(post.precision));
  if (state.z(k, i) != 0) {
    state.residual.col(i).noalias() += (state.s(k, i) - fresh) * state.phi.col(k);
  }
  state.s(k, i) = fresh;
  return fresh;
}

BetaParams pi_posterior(const GibbsState& state, int c, Eigen::Index k) {
  check_class(state, c);
  check_atom(state, k);
  double used = 0.0;
  for (const auto i : state.data.class_indices(c)) used += state.z(k, i);
  const double trunc = static_cast<double>(state.priors.truncation);
  const double n_c = static_cast<double>(state.data.class_size(c));
  return {state.priors.a0 / trunc + used,
          state.priors.b0 * (trunc - 1.0) / trunc + n_c - used};
}

double sample_pi(GibbsState& state, int c, Eigen::Index k, RngStream& rng) {
  const BetaParams post = pi_posterior(state, c, k);
  const double fresh = rng.beta(post.a, post.b);
  state.pi(c, k) = fresh;
  return fresh;
}

GammaParams lambda_s_posterior(const GibbsState& state, int c) {
  check_class(state, c);
  double sum_sq = 0.0;
  for (const auto i : state.data.class_indices(c)) sum_sq += state.s.col(i).squaredNorm();
  const double n_c = static_cast<double>(state.data.class_size(c));
  return {static_cast<double>(state.num_atoms()) * n_c / 2.0 + state.priors.c0,
          0.5 * sum_sq + state.priors.d0};
}

double sample_lambda_s(GibbsState& state, int c, RngStream& rng) {
  const GammaParams post = lambda_s_posterior(state, c);
  const double fresh = rng.gamma(post.shape, post.rate);
  state.lambda_s(c) = fresh;
  return fresh;
}

GammaParams lambda_eps_posterior(const GibbsState& state) {
  const double mn = static_cast<double>(state.data.feature_dim() * state.data.size());
  return {mn / 2.0 + state.priors.e0, 0.5 * state.residual.squaredNorm() + state.priors.f0};
}

double sample_lambda_eps(GibbsState& state, RngStream& rng) {
  const GammaParams post = lambda_eps_posterior(state);
  state.lambda_eps = rng.gamma(post.shape, post.rate);
  return state.lambda_eps;
}

bool atom_is_dropped(const GibbsState& state, Eigen::Index k, double eps) {
  for (int c = 0; c < state.data.num_classes(); ++c) {
    if (state.pi(c, k) < eps) continue;
    for (const auto i : state.data.class_indices(c)) {
      if (state.z(k, i) != 0) return false;
    }
  }
  return true;
}

Eigen::Index prune_atoms(GibbsState& state, double eps) {
  std::vector<Eigen::Index> keep;
  std::vector<Eigen::Index> drop;
  for (Eigen::Index k = 0; k < state.num_atoms(); ++k) {
    if (atom_is_dropped(state, k, eps)) {
      drop.push_back(k);
    } else {
      keep.push_back(k);
    }
  }
  if (drop.empty()) return 0;
  if (keep.empty()) {
    throw Error(ErrorCode::AllAtomsPruned,
                "every atom has negligible selection probability in every class");
  }

  for (const auto k : drop) {
    for (Eigen::Index i = 0; i < state.data.size(); ++i) {
      if (state.z(k, i) != 0) state.residual.col(i) += state.phi.col(k) * state.s(k, i);
    }
  }

  state.phi = state.phi(Eigen::all, keep).eval();
  state.pi = state.pi(Eigen::all, keep).eval();
  state.z = state.z(keep, Eigen::all).eval();
  state.s = state.s(keep, Eigen::all).eval();

  std::vector<std::int64_t> ids;
  ids.reserve(keep.size());
  for (const auto k : keep) ids.push_back(state.active_atoms[static_cast<std::size_t>(k)]);
  state.active_atoms = std::move(ids);

  if (!state.atom_samples.empty()) {
    AtomSamples kept;
    kept.reserve(keep.size());
    for (const auto k : keep) kept.push_back(std::move(state.atom_samples[static_cast<std::size_t>(k)]));
    state.atom_samples = std::move(kept);
  }
  return static_cast<Eigen::Index>(drop.size());
}

void gibbs_iteration(GibbsState& state, RngStream& rng, const SweepOptions& options,
                     InferenceTrace* trace) {
  for (Eigen::Index k = 0; k < state.num_atoms(); ++k) sample_atom(state, k, rng);

  // Each instance gets its own substream so the result does not depend on
  // how the instance loop is scheduled.
  const Vector phi_norm2 = state.phi.colwise().squaredNorm().transpose();
  const std::uint64_t sweep_key = rng.next_u64();
  parallel_for(static_cast<std::size_t>(state.data.size()), [&](std::size_t i) {
    RngStream local(sweep_key, i);
    sweep_instance(state, static_cast<Eigen::Index>(i), phi_norm2, local);
  });

  if (options.update_pi) {
    for (int c = 0; c < state.data.num_classes(); ++c) {
      for (Eigen::Index k = 0; k < state.num_atoms(); ++k) sample_pi(state, c, k, rng);
    }
  }
  for (int c = 0; c < state.data.num_classes(); ++c) sample_lambda_s(state, c, rng);
  sample_lambda_eps(state, rng);

  if (options.prune) prune_atoms(state, options.prune_eps);

  if (trace != nullptr) {
    TraceRecord rec;
    rec.iteration = static_cast<std::int64_t>(trace->size()) + 1;
    rec.active_atoms = state.num_atoms();
    rec.reconstruction_error = state.residual.squaredNorm();
    rec.lambda_eps = state.lambda_eps;
    rec.lambda_s.assign(state.lambda_s.data(), state.lambda_s.data() + state.lambda_s.size());
    trace->push_back(std::move(rec));
  }
}

RunOptions RunOptions::from(const Hyperparams& h) {
  RunOptions opts;
  opts.iterations = h.gibbs_iters.value();
  opts.burn_in = h.burn_in.value();
  opts.samples = h.dict_samples.value();
  return opts;
}

InferenceResult run_inference(GibbsState state, const RunOptions& options, RngStream& rng) {
  InferenceResult result;
  state.atom_samples.assign(static_cast<std::size_t>(state.num_atoms()), {});
  const std::int64_t first_sample =
      std::max(options.burn_in, options.iterations - options.samples) + 1;
  for (std::int64_t t = 1; t <= options.iterations; ++t) {
    gibbs_iteration(state, rng, options.sweep, &result.trace);
    if (t >= first_sample) {
      for (Eigen::Index k = 0; k < state.num_atoms(); ++k) {
        state.atom_samples[static_cast<std::size_t>(k)].push_back(state.phi.col(k));
      }
    }
  }
  result.state = std::move(state);
  return result;
}

Matrix finalize_dictionary(const AtomSamples& samples) {
  if (samples.empty()) throw Error(ErrorCode::NoSamplesCollected, "no atoms");
  const Eigen::Index m = samples.front().empty() ? 0 : samples.front().front().size();
  Matrix phi(m, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& draws = samples[k];
    if (draws.empty()) {
      throw Error(ErrorCode::NoSamplesCollected, "atom " + std::to_string(k) + " has no draws");
    }
    Vector sum = Vector::Zero(m);
    for (const auto& d : draws) {
      if (d.size() != m) throw Error(ErrorCode::DimensionMismatch, "atom draw length");
      sum += d;
    }
    phi.col(static_cast<Eigen::Index>(k)) = sum / static_cast<double>(draws.size());
  }
  return phi;
}

void write_trace(std::ostream& out, const InferenceTrace& trace) {
  out << "iteration\tatoms\tfrobenius_error\tlambda_eps";
  const std::size_t classes = trace.empty() ? 0 : trace.front().lambda_s.size();
  for (std::size_t c = 0; c < classes; ++c) out << "\tlambda_s_" << (c + 1);
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& rec : trace) {
    out << rec.iteration << '\t' << rec.active_atoms << '\t' << rec.reconstruction_error << '\t'
        << rec.lambda_eps;
    for (const double v : rec.lambda_s) out << '\t' << v;
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace bdl
