#pragma once

#include <cstdint>
#include <random>

namespace bdl {

// Seeded random stream. The engine is std::mt19937_64 seeded through
// std::seed_seq, both of which are fully specified by the standard; the
// distributions are implemented here because the std:: ones are not
// reproducible across standard library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Gamma with shape/rate parameterization (mean = shape / rate).
  double gamma(double shape, double rate);
  // log of a Gamma(shape, 1) variate; stays finite for tiny shapes where the
  // variate itself underflows.
  double log_gamma_variate(double shape);

  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }

  // Independent substream keyed by this stream's next output and `id`.
  RngStream split(std::uint64_t id);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

inline RngStream make_rng(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream(seed, stream_id);
}

}  // namespace bdl
