#include "ncomp/pmf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ncomp {

QuantizedPmf QuantizedPmf::from_counts(std::span<const std::uint32_t> counts) {
  if (counts.size() != kAlphabetSize) {
    throw std::invalid_argument("QuantizedPmf: expected 256 counts");
  }
  QuantizedPmf q;
  std::uint64_t running = 0;
  for (int i = 0; i < kAlphabetSize; ++i) {
    if (counts[i] == 0) {
      throw std::invalid_argument("QuantizedPmf: count for symbol " + std::to_string(i) +
                                  " is zero");
    }
    q.cumulative_[i] = static_cast<std::uint32_t>(running);
    running += counts[i];
  }
  if (running > kMaxFreqTotal) {
    throw std::invalid_argument("QuantizedPmf: total exceeds 2^16");
  }
  q.cumulative_[kAlphabetSize] = static_cast<std::uint32_t>(running);
  return q;
}

int QuantizedPmf::find(std::uint32_t target) const {
  int lo = 0;
  int hi = kAlphabetSize;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (cumulative_[mid] <= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

QuantizedPmf quantize_pmf(const Pmf& p) {
  if (p.size() != kAlphabetSize) {
    throw std::invalid_argument("quantize_pmf: expected a 256-entry pmf");
  }
  constexpr double kScale = static_cast<double>(kMaxFreqTotal - kAlphabetSize);
  double sum = 0.0;
  std::array<std::uint32_t, kAlphabetSize> counts;
  for (int i = 0; i < kAlphabetSize; ++i) {
    const double pi = p[i];
    if (!std::isfinite(pi)) {
      throw std::invalid_argument("quantize_pmf: non-finite entry at " + std::to_string(i));
    }
    if (pi < 0.0) {
      throw std::invalid_argument("quantize_pmf: negative entry at " + std::to_string(i));
    }
    sum += pi;
    const double scaled = std::floor(pi * kScale);
    counts[i] = scaled < 1.0 ? 1u : static_cast<std::uint32_t>(scaled);
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument("quantize_pmf: pmf sums to " + std::to_string(sum));
  }
  return QuantizedPmf::from_counts(counts);
}

}  // namespace ncomp
