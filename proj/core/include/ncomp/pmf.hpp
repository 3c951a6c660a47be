#ifndef NCOMP_PMF_HPP
#define NCOMP_PMF_HPP

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>

namespace ncomp {

// Probability distribution over the 256 byte values. Entries are
// non-negative and sum to 1 (within 1e-6 as accepted by quantize_pmf;
// the network's softmax output is normalized far more tightly).
using Pmf = Eigen::VectorXd;

inline constexpr int kAlphabetSize = 256;

// Total frequency budget of the integer coder. Keeping totals at or below
// 2^16 guarantees the range coder never underflows, since its range register
// stays above 2^30 between symbols.
inline constexpr std::uint32_t kMaxFreqTotal = 1u << 16;

// Integer-frequency form of a Pmf as consumed by the range coder. Every
// symbol keeps a frequency of at least 1, so no byte value is ever
// impossible to code regardless of how confident the model is.
class QuantizedPmf {
 public:
  // Builds from per-symbol counts. Counts must be >= 1 and sum to <= 2^16.
  static QuantizedPmf from_counts(std::span<const std::uint32_t> counts);

  std::uint32_t freq(int symbol) const { return cumulative_[symbol + 1] - cumulative_[symbol]; }
  std::uint32_t cum(int symbol) const { return cumulative_[symbol]; }
  std::uint32_t total() const { return cumulative_[kAlphabetSize]; }

  // cumulative()[s] is the sum of frequencies of symbols below s;
  // cumulative()[256] equals total().
  const std::array<std::uint32_t, kAlphabetSize + 1>& cumulative() const { return cumulative_; }

  // Symbol whose cumulative slot contains target (target < total()).
  int find(std::uint32_t target) const;

  bool operator==(const QuantizedPmf&) const = default;

 private:
  std::array<std::uint32_t, kAlphabetSize + 1> cumulative_{};
};

// Deterministic quantization of a real-valued pmf:
//   freq_i = max(1, floor(p_i * (2^16 - 256)))
// Bit-identical inputs give bit-identical outputs. Rejects non-finite
// entries, negative entries, and totals away from 1 by more than 1e-6.
QuantizedPmf quantize_pmf(const Pmf& p);

}  // namespace ncomp

#endif  // NCOMP_PMF_HPP
