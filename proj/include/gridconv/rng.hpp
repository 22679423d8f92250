#pragma once

// Counter-based deterministic random numbers (splitmix64 finalizer applied to
// seed/counter pairs). Stateless draws make Monte Carlo samples independent
// of evaluation order and reproducible across platforms.

#include <cmath>
#include <cstdint>

namespace gridconv {

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed ^ (0x6a09e667f3bcc909ull * (stream + 1))) {}

  std::uint64_t bits(std::uint64_t counter) const {
    std::uint64_t z = seed_ + counter * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1).
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }

  // Integer in [lo, hi] inclusive.
  long long uniform_int(std::uint64_t counter, long long lo, long long hi) const {
    return lo + static_cast<long long>(bits(counter) % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Standard normal via Box-Muller on two counters derived from one.
  double normal(std::uint64_t counter) const {
    double u1 = uniform(2 * counter), u2 = uniform(2 * counter + 1);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // A "sequential" adapter: draws advance an internal counter.
  class Stream {
   public:
    explicit Stream(const CounterRng& rng, std::uint64_t start = 0) : rng_(&rng), next_(start) {}
    double uniform() { return rng_->uniform(next_++); }
    double uniform(double lo, double hi) { return rng_->uniform(next_++, lo, hi); }
    long long uniform_int(long long lo, long long hi) { return rng_->uniform_int(next_++, lo, hi); }
    double normal() { return rng_->normal(next_++); }

   private:
    const CounterRng* rng_;
    std::uint64_t next_;
  };

  Stream stream(std::uint64_t start = 0) const { return Stream(*this, start); }

 private:
  std::uint64_t seed_;
};

}  // namespace gridconv
