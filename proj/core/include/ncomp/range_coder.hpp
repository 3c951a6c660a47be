#ifndef NCOMP_RANGE_CODER_HPP
#define NCOMP_RANGE_CODER_HPP

#include <cstdint>

#include "ncomp/bitio.hpp"
#include "ncomp/pmf.hpp"

namespace ncomp {

// Streaming integer realization of arithmetic coding.
//
// The coder tracks the current subinterval [low, low + range) of the 32-bit
// window [0, 2^32). Renormalization emits one bit per interval doubling:
// a settled top bit is written immediately, while doublings of an interval
// straddling the midpoint are deferred through the pending counter and
// resolved as opposite bits once the next settled bit appears. The carry
// problem of low/range coders therefore never arises: low + range <= 2^32
// holds at all times, and range stays above 2^30 between symbols, which
// with frequency totals <= 2^16 rules out underflow.
//
// Cost accounting: every emitted bit corresponds to one interval doubling,
// and finish() writes the 32-bit window position, so a whole stream costs
// at most sum(-log2 p_quant) + 33 bits.
struct RangeCoderState {
  std::uint64_t low = 0;
  std::uint64_t range = std::uint64_t{1} << 32;
  std::uint32_t pending = 0;
};

class RangeEncoder {
 public:
  explicit RangeEncoder(BitWriter& sink) : sink_(&sink) {}

  void encode(const QuantizedPmf& pmf, int symbol);

  // Pins the interval by writing the 32-bit window position. Must be called
  // exactly once, after the last symbol.
  void finish();

  const RangeCoderState& state() const { return state_; }

 private:
  void emit(int bit);
  void renormalize();

  BitWriter* sink_;
  RangeCoderState state_;
};

class RangeDecoder {
 public:
  // Reads the initial 32-bit window; throws CorruptStreamError when the
  // source cannot supply it.
  explicit RangeDecoder(BitReader& source);

  // Exact inverse of RangeEncoder::encode under the same pmf sequence.
  int decode(const QuantizedPmf& pmf);

  const RangeCoderState& state() const { return state_; }

 private:
  BitReader* source_;
  RangeCoderState state_;
  std::uint64_t value_ = 0;
};

}  // namespace ncomp

#endif  // NCOMP_RANGE_CODER_HPP
