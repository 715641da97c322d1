#pragma once

#include <cstdint>
#include <random>

namespace jumphk {

// splitmix64 finalizer; used to decorrelate (seed, stream) pairs before they
// feed a mt19937_64. Keeps path streams independent of worker scheduling.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(mix64(master) ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

// One engine per logical stream (one path, one sweep, one shuffle). All draws
// for the stream come from this engine in a fixed order, so results do not
// depend on how streams are scheduled across workers.
class RngStream {
 public:
  RngStream(std::uint64_t master, std::uint64_t stream)
      : eng_(stream_seed(master, stream)) {}

  double uniform() { return uni_(eng_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uni_(eng_); }
  double normal() { return normal_(eng_); }
  double exponential() { return exp_(eng_); }
  std::uint64_t poisson(double mean) {
    std::poisson_distribution<std::uint64_t> d(mean);
    return d(eng_);
  }
  std::uint64_t integer(std::uint64_t n) {  // uniform in [0, n)
    std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
    return d(eng_);
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::uniform_real_distribution<double> uni_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::exponential_distribution<double> exp_{1.0};
};

}  // namespace jumphk
