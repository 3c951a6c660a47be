#ifndef NCOMP_COMPRESSOR_HPP
#define NCOMP_COMPRESSOR_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ncomp/model.hpp"
#include "ncomp/pmf.hpp"
#include "ncomp/tagging.hpp"

namespace ncomp {

// Compressed container ("NCZ1" format, version 1):
//   magic "NCZ1" (4 bytes), version (1 byte),
//   flags (1 byte; bit 0 = POS channel enabled, other bits reserved zero),
//   model checksum (u32 little-endian),
//   original length (unsigned LEB128 varint),
//   range coder payload.
struct ContainerHeader {
  std::uint8_t version = 1;
  bool pos_enabled = true;
  std::uint32_t model_checksum = 0;
  std::uint64_t original_length = 0;
};

struct CompressionStats {
  std::size_t input_bytes = 0;
  std::size_t output_bytes = 0;   // whole container, header included
  std::size_t payload_bits = 0;   // exact coder bits, before byte padding
  double bpc = 0.0;               // payload_bits / input_bytes
  double ideal_bpc = 0.0;         // sum of -log2(freq/total) / input_bytes
};

// Observes the quantized distribution used at each position. Lets tests
// certify that encode and decode drive the coder with bit-identical pmfs.
using PmfProbe = std::function<void(std::size_t position, const QuantizedPmf&)>;

// Whole-file compression. Position i is coded under the model's prediction
// from the previous `window` bytes (left-padded with byte 0) and the
// causally tagged prefix (left-padded with tag 0). model_checksum goes into
// the header so decompression can verify it has the same model.
std::vector<std::uint8_t> compress(std::span<const std::uint8_t> text,
                                   const NetworkParams& params, std::uint32_t model_checksum,
                                   const LexiconTagger& tagger,
                                   PosMode pos = PosMode::enabled,
                                   CompressionStats* stats = nullptr,
                                   const PmfProbe& probe = {});

// Exact inverse of compress: re-derives every context and tag stream from
// the already-decoded prefix. Throws FormatError (bad magic/version/flags),
// ChecksumError (model mismatch), or CorruptStreamError (truncated payload).
std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> container,
                                     const NetworkParams& params,
                                     std::uint32_t model_checksum,
                                     const LexiconTagger& tagger,
                                     const PmfProbe& probe = {});

// Runs the exact compression pipeline into memory and reports the stats
// without producing a file.
CompressionStats evaluate_bpc(std::span<const std::uint8_t> text, const NetworkParams& params,
                              const LexiconTagger& tagger, PosMode pos = PosMode::enabled);

// Adaptive order-0 byte model: 256 counts starting at 1; a symbol is coded
// with its current count, then incremented. Counts are halved (rounding up,
// so they stay >= 1) whenever the total would pass the coder's 2^16 budget.
class Order0Model {
 public:
  Order0Model();

  QuantizedPmf pmf() const;
  void update(std::uint8_t symbol);
  std::uint32_t total() const { return total_; }

 private:
  std::array<std::uint32_t, kAlphabetSize> counts_;
  std::uint32_t total_;
};

// Compresses text with the adaptive order-0 model (in memory) and reports
// the stats; the model-free baseline for bpc comparisons.
CompressionStats baseline_order0(std::span<const std::uint8_t> text);

}  // namespace ncomp

#endif  // NCOMP_COMPRESSOR_HPP
