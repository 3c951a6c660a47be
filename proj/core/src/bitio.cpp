#include "ncomp/bitio.hpp"

#include "ncomp/errors.hpp"

namespace ncomp {

void BitWriter::put_bit(int bit) {
  partial_ = static_cast<std::uint8_t>((partial_ << 1) | (bit & 1));
  ++partial_bits_;
  ++bit_count_;
  if (partial_bits_ == 8) {
    bytes_.push_back(partial_);
    partial_ = 0;
    partial_bits_ = 0;
  }
}

std::vector<std::uint8_t> BitWriter::take_bytes() {
  if (partial_bits_ > 0) {
    bytes_.push_back(static_cast<std::uint8_t>(partial_ << (8 - partial_bits_)));
    partial_ = 0;
    partial_bits_ = 0;
  }
  return std::move(bytes_);
}

int BitReader::get_bit() {
  const std::uint64_t byte = pos_ >> 3;
  if (byte >= bytes_.size()) {
    throw CorruptStreamError("bit stream truncated");
  }
  const int shift = 7 - static_cast<int>(pos_ & 7);
  ++pos_;
  return (bytes_[byte] >> shift) & 1;
}

}  // namespace ncomp
