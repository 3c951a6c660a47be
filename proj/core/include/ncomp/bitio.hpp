#ifndef NCOMP_BITIO_HPP
#define NCOMP_BITIO_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace ncomp {

// Bit sink over a growable byte buffer. Bits are packed most significant
// first; the final partial byte is zero padded by bytes().
class BitWriter {
 public:
  void put_bit(int bit);

  // Exact number of bits pushed so far (padding excluded).
  std::uint64_t bit_count() const { return bit_count_; }

  // Finishes the current byte with zero bits and returns the buffer.
  std::vector<std::uint8_t> take_bytes();

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint8_t partial_ = 0;
  int partial_bits_ = 0;
  std::uint64_t bit_count_ = 0;
};

// Bit source over a fixed byte span, most significant bit first.
// Reading past the end throws CorruptStreamError.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  int get_bit();

  std::uint64_t bits_read() const { return pos_; }
  std::uint64_t bits_available() const { return 8 * bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t pos_ = 0;
};

}  // namespace ncomp

#endif  // NCOMP_BITIO_HPP
