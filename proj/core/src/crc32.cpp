#include "ncomp/crc32.hpp"

#include <array>

namespace ncomp {
namespace {

std::array<std::uint32_t, 256> make_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) {
      c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    }
    table[i] = c;
  }
  return table;
}

const std::array<std::uint32_t, 256> kTable = make_table();

}  // namespace

void Crc32::update(std::span<const std::uint8_t> data) {
  for (std::uint8_t b : data) {
    state_ = kTable[(state_ ^ b) & 0xFF] ^ (state_ >> 8);
  }
}

void Crc32::update(const void* data, std::size_t size) {
  update(std::span<const std::uint8_t>(static_cast<const std::uint8_t*>(data), size));
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  Crc32 crc;
  crc.update(data);
  return crc.value();
}

}  // namespace ncomp
