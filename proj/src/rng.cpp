#include "bdl/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bdl {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32),
                    0x62646c31u};
  return std::mt19937_64(seq);
}

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(seeded_engine(seed, stream_id)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * kTwoPow53Inv;
}

double RngStream::uniform_open() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * kTwoPow53Inv;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  // Rejection keeps the result unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double RngStream::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller.
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

double RngStream::log_gamma_variate(double shape) {
  if (shape < 1.0) {
    // G(a) = G(a + 1) * U^(1/a)
    return log_gamma_variate(shape + 1.0) + std::log(uniform_open()) / shape;
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

double RngStream::gamma(double shape, double rate) {
  return std::exp(log_gamma_variate(shape)) / rate;
}

double RngStream::beta(double a, double b) {
  const double log_x = log_gamma_variate(a);
  const double log_y = log_gamma_variate(b);
  // x / (x + y) evaluated in log space.
  return 1.0 / (1.0 + std::exp(log_y - log_x));
}

RngStream RngStream::split(std::uint64_t id) { return RngStream(engine_(), id); }

}  // namespace bdl
