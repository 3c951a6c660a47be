#ifndef NCOMP_RNG_HPP
#define NCOMP_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace ncomp {

// Deterministic random source. All derived draws (unit doubles, bounded
// integers, shuffles) are defined here rather than through the standard
// distributions, whose output is implementation specific; a given seed
// therefore produces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform double in [-limit, limit).
  double next_symmetric(double limit) { return (2.0 * next_unit() - 1.0) * limit; }

  // Uniform integer in [0, n). n must be nonzero.
  std::uint64_t next_below(std::uint64_t n) {
    // Fixed-point multiply keeps the draw reproducible; the bias for the
    // n values used here (< 2^32) is below 2^-32.
    const unsigned __int128 wide = static_cast<unsigned __int128>(engine_()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  // Fisher-Yates shuffle with draws from this stream.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ncomp

#endif  // NCOMP_RNG_HPP
