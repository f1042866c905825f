#include "bdl/parallel.hpp"
#include "bdl/rng.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

using bdl::make_rng;
using bdl::RngStream;

TEST_CASE("same seed and stream reproduce the same draws") {
  RngStream a = make_rng(7, 0);
  RngStream b = make_rng(7, 0);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("different stream ids give different sequences") {
  RngStream a = make_rng(7, 0);
  RngStream b = make_rng(7, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.uniform() == b.uniform();
  CHECK(equal == 0);
}

TEST_CASE("different seeds give different sequences") {
  RngStream a = make_rng(7, 0);
  RngStream b = make_rng(8, 0);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("uniform mean of a million draws") {
  RngStream rng = make_rng(7, 0);
  const int n = 1'000'000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  const double bound = 3.0 / (std::sqrt(12.0) * 1e3);
  CHECK(std::abs(sum / n - 0.5) <= bound);
  CHECK(bound == doctest::Approx(0.000866).epsilon(1e-3));
}

TEST_CASE("uniform_index covers its range evenly") {
  RngStream rng = make_rng(3, 4);
  std::vector<int> counts(6, 0);
  const int n = 60'000;
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_index(6)];
  for (int c : counts) CHECK(std::abs(c - n / 6) < 5 * std::sqrt(n / 6.0));
}

TEST_CASE("normal moments") {
  RngStream rng = make_rng(11, 0);
  const int n = 200'000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(2.0, 3.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean - 2.0) < 4 * 3.0 / std::sqrt(n));
  CHECK(var == doctest::Approx(9.0).epsilon(0.02));
}

TEST_CASE("gamma moments match shape and rate") {
  RngStream rng = make_rng(5, 2);
  struct Case {
    double shape;
    double rate;
  };
  for (Case c : {Case{4.0, 4.0}, Case{0.3, 2.0}, Case{50.0, 0.5}}) {
    const int n = 100'000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.gamma(c.shape, c.rate);
      REQUIRE(x >= 0.0);
      s += x;
      s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(mean == doctest::Approx(c.shape / c.rate).epsilon(0.01 + 4 / std::sqrt(c.shape * n)));
    CHECK(var == doctest::Approx(c.shape / (c.rate * c.rate)).epsilon(0.05));
  }
}

TEST_CASE("Gamma(4, 4): mean 1 and variance 1/4") {
  RngStream rng = make_rng(9, 9);
  const int n = 100'000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gamma(4.0, 4.0);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::abs(mean - 1.0) <= 0.005);
  CHECK(std::abs(var - 0.25) <= 0.01);
}

TEST_CASE("log gamma variate stays finite for tiny shapes") {
  RngStream rng = make_rng(1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double lg = rng.log_gamma_variate(1e-6);
    CHECK(std::isfinite(lg));
  }
}

TEST_CASE("beta moments and range") {
  RngStream rng = make_rng(2, 3);
  struct Case {
    double a;
    double b;
  };
  for (Case c : {Case{2.0, 5.0}, Case{0.05, 14.95}, Case{10.05, 4.95}}) {
    const int n = 100'000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.beta(c.a, c.b);
      REQUIRE(x >= 0.0);
      REQUIRE(x <= 1.0);
      s += x;
      s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    const double m = c.a / (c.a + c.b);
    const double v = c.a * c.b / ((c.a + c.b) * (c.a + c.b) * (c.a + c.b + 1));
    CHECK(std::abs(mean - m) < 4 * std::sqrt(v / n));
    CHECK(var == doctest::Approx(v).epsilon(0.05));
  }
}

TEST_CASE("split streams are deterministic and distinct") {
  RngStream a = make_rng(4, 0);
  RngStream b = make_rng(4, 0);
  RngStream a1 = a.split(1);
  RngStream b1 = b.split(1);
  CHECK(a1.next_u64() == b1.next_u64());
  RngStream c = make_rng(4, 0);
  RngStream c2 = c.split(2);
  RngStream d = make_rng(4, 0);
  RngStream d1 = d.split(1);
  CHECK(c2.next_u64() != d1.next_u64());
}

TEST_CASE("parallel_for visits every index once for any thread cap") {
  for (std::size_t cap : {1u, 2u, 7u}) {
    bdl::set_thread_cap(cap);
    CHECK(bdl::thread_cap() == cap);
    std::vector<std::atomic<int>> hits(101);
    bdl::parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  bdl::set_thread_cap(1);
}

TEST_CASE("parallel_for rethrows worker exceptions") {
  bdl::set_thread_cap(3);
  CHECK_THROWS_AS(bdl::parallel_for(10,
                                    [](std::size_t i) {
                                      if (i == 7) throw std::runtime_error("boom");
                                    }),
                  std::runtime_error);
  bdl::set_thread_cap(1);
}
