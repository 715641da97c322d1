#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "jumphk/parallel.hpp"
#include "jumphk/rng.hpp"

using namespace jumphk;

TEST_CASE("streams replay and separate") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  int diff = 0;
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    if (u != c.uniform()) ++diff;
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(diff > 90);
}

TEST_CASE("stream seeds decorrelate neighbours") {
  int weak = 0;
  for (std::uint64_t s = 0; s < 64; ++s) {
    const auto x = stream_seed(1, s), y = stream_seed(1, s + 1);
    if (std::popcount(x ^ y) < 16) ++weak;
  }
  CHECK(weak == 0);
}

TEST_CASE("moments of the basic draws") {
  RngStream g(123, 0);
  const int n = 200000;
  double s1 = 0, s2 = 0, p1 = 0, e1 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = g.normal();
    s1 += z;
    s2 += z * z;
    p1 += static_cast<double>(g.poisson(3.0));
    e1 += g.exponential();
  }
  const double rn = std::sqrt(static_cast<double>(n));
  CHECK(std::abs(s1 / n) < 4.0 / rn);
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0) / rn);
  CHECK(std::abs(p1 / n - 3.0) < 4.0 * std::sqrt(3.0) / rn);
  CHECK(std::abs(e1 / n - 1.0) < 4.0 / rn);
}

TEST_CASE("uniform range endpoints") {
  RngStream g(5, 5);
  for (int i = 0; i < 1000; ++i) {
    const double u = g.uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
    const auto k = g.integer(7);
    CHECK(k < 7);
  }
}

TEST_CASE("parallel_for covers every index once, any worker count") {
  const std::size_t n = 5000;
  for (int workers : {1, 3, 8}) {
    std::vector<int> hits(n, 0);
    parallel_for(n, workers, [&](std::size_t i) { hits[i] += 1; });
    for (std::size_t i = 0; i < n; ++i) CHECK(hits[i] == 1);
  }
}

TEST_CASE("per-index streams make parallel results worker-independent") {
  const std::size_t n = 512;
  auto run = [&](int workers) {
    std::vector<double> out(n);
    parallel_for(n, workers, [&](std::size_t i) {
      RngStream g(99, i);
      double s = 0;
      for (int k = 0; k < 10; ++k) s += g.normal();
      out[i] = s;
    });
    return out;
  };
  CHECK(run(1) == run(4));
}
