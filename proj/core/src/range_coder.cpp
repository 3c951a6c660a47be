#include "ncomp/range_coder.hpp"

#include <stdexcept>

namespace ncomp {
namespace {

constexpr std::uint64_t kHalf = std::uint64_t{1} << 31;
constexpr std::uint64_t kQuarter = std::uint64_t{1} << 30;
constexpr std::uint64_t kThreeQuarters = 3 * kQuarter;

// Scaled lower bound of symbol slot i inside the current range. Adjacent
// symbols share boundaries exactly, so the partition has no gaps.
inline std::uint64_t scaled_bound(std::uint64_t range, std::uint32_t cum, std::uint32_t total) {
  return (range * cum) / total;
}

}  // namespace

void RangeEncoder::emit(int bit) {
  sink_->put_bit(bit);
  for (; state_.pending > 0; --state_.pending) {
    sink_->put_bit(bit ^ 1);
  }
}

void RangeEncoder::renormalize() {
  for (;;) {
    if (state_.low + state_.range <= kHalf) {
      emit(0);
    } else if (state_.low >= kHalf) {
      emit(1);
      state_.low -= kHalf;
    } else if (state_.low >= kQuarter && state_.low + state_.range <= kThreeQuarters) {
      ++state_.pending;
      state_.low -= kQuarter;
    } else {
      break;
    }
    state_.low <<= 1;
    state_.range <<= 1;
  }
}

void RangeEncoder::encode(const QuantizedPmf& pmf, int symbol) {
  if (symbol < 0 || symbol >= kAlphabetSize) {
    throw std::invalid_argument("RangeEncoder: symbol out of range");
  }
  const std::uint32_t total = pmf.total();
  const std::uint64_t b0 = scaled_bound(state_.range, pmf.cum(symbol), total);
  const std::uint64_t b1 = scaled_bound(state_.range, pmf.cum(symbol + 1), total);
  state_.low += b0;
  state_.range = b1 - b0;
  renormalize();
}

void RangeEncoder::finish() {
  for (int k = 31; k >= 0; --k) {
    emit(static_cast<int>((state_.low >> k) & 1));
  }
}

RangeDecoder::RangeDecoder(BitReader& source) : source_(&source) {
  for (int k = 0; k < 32; ++k) {
    value_ = (value_ << 1) | static_cast<std::uint64_t>(source_->get_bit());
  }
}

int RangeDecoder::decode(const QuantizedPmf& pmf) {
  const std::uint32_t total = pmf.total();
  const std::uint64_t v = value_ - state_.low;

  // Largest symbol whose scaled lower bound is <= v.
  int lo = 0;
  int hi = kAlphabetSize;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (scaled_bound(state_.range, pmf.cum(mid), total) <= v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  const std::uint64_t b0 = scaled_bound(state_.range, pmf.cum(lo), total);
  const std::uint64_t b1 = scaled_bound(state_.range, pmf.cum(lo + 1), total);
  state_.low += b0;
  state_.range = b1 - b0;

  for (;;) {
    if (state_.low + state_.range <= kHalf) {
      // settled zero bit
    } else if (state_.low >= kHalf) {
      state_.low -= kHalf;
      value_ -= kHalf;
    } else if (state_.low >= kQuarter && state_.low + state_.range <= kThreeQuarters) {
      state_.low -= kQuarter;
      value_ -= kQuarter;
    } else {
      break;
    }
    state_.low <<= 1;
    state_.range <<= 1;
    value_ = (value_ << 1) | static_cast<std::uint64_t>(source_->get_bit());
  }
  return lo;
}

}  // namespace ncomp
